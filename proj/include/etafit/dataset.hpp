#pragma once

#include "etafit/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace etafit {

enum class Sampling { Grid, UniformRandom };

std::string to_string(Sampling sampling);
Sampling parse_sampling(const std::string& text);

inline constexpr std::uint64_t kDefaultDataSeed = 1;

struct DatasetMetadata {
    Eigen::Index n = 0;
    Eigen::Index d = 0;
    std::optional<double> sigma0_true;
    std::optional<std::uint64_t> seed;
    std::optional<Sampling> sampling;
    std::string generator;
};

struct Dataset {
    Points points;
    Eigen::VectorXd z;
    DatasetMetadata meta;
};

// sin(pi x1) + sin(pi x2)
double mean_function(double x1, double x2);

// Points on the inclusive sqrt(n) x sqrt(n) grid of [0,1]^2 (x1 varies fastest)
// or uniform in [0,1]^2, z = mean + sigma0 * N(0,1).
// Noise draw i: CounterRng(seed, 0).normal(i).
// Random coordinates of point i: CounterRng(seed, 1).uniform(2i + j), j = 0, 1.
Dataset generate_synthetic(Eigen::Index n, double sigma0, std::uint64_t seed, Sampling sampling);

// CSV with header x1,..,xd,z and a sidecar <stem>.meta.json.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);
void write_dataset(const Dataset& data, const std::filesystem::path& csv);
Dataset read_dataset(const std::filesystem::path& csv);

// Plain numeric CSV with a header row.
Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

} // namespace etafit
