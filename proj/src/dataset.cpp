#include "etafit/dataset.hpp"
#include "etafit/errors.hpp"
#include "etafit/random.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace etafit {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return "";
    }
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& text, std::size_t line) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(value)) {
        throw InputError("line " + std::to_string(line) + ": '" + t + "' is not a finite number");
    }
    return value;
}

} // namespace

std::string to_string(Sampling sampling) {
    return sampling == Sampling::Grid ? "grid" : "random";
}

Sampling parse_sampling(const std::string& text) {
    if (text == "grid") return Sampling::Grid;
    if (text == "random") return Sampling::UniformRandom;
    throw InputError("unknown sampling '" + text + "' (expected grid or random)");
}

double mean_function(double x1, double x2) {
    return std::sin(std::numbers::pi * x1) + std::sin(std::numbers::pi * x2);
}

Dataset generate_synthetic(Eigen::Index n, double sigma0, std::uint64_t seed, Sampling sampling) {
    if (n < 1) {
        throw InputError("dataset needs at least one point");
    }
    if (!(sigma0 >= 0.0) || !std::isfinite(sigma0)) {
        throw InputError("noise level must be finite and non-negative");
    }
    Dataset data;
    data.points.resize(n, 2);
    if (sampling == Sampling::Grid) {
        const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
        if (side * side != n) {
            throw InputError("grid sampling needs a perfect-square n, got " + std::to_string(n));
        }
        const double step = side > 1 ? 1.0 / static_cast<double>(side - 1) : 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            data.points(i, 0) = static_cast<double>(i % side) * step;
            data.points(i, 1) = static_cast<double>(i / side) * step;
        }
    } else {
        const CounterRng coords(seed, 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int j = 0; j < 2; ++j) {
                data.points(i, j) = coords.uniform(static_cast<std::uint64_t>(2 * i + j));
            }
        }
    }
    const CounterRng noise(seed, 0);
    data.z.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        data.z(i) = mean_function(data.points(i, 0), data.points(i, 1)) +
                    sigma0 * noise.normal(static_cast<std::uint64_t>(i));
    }
    data.meta.n = n;
    data.meta.d = 2;
    data.meta.sigma0_true = sigma0;
    data.meta.seed = seed;
    data.meta.sampling = sampling;
    data.meta.generator = "splitmix64-counter+box-muller";
    return data;
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    std::filesystem::path p = csv;
    p.replace_extension(".meta.json");
    return p;
}

void write_dataset(const Dataset& data, const std::filesystem::path& csv) {
    const Eigen::Index n = data.points.rows();
    const Eigen::Index d = data.points.cols();
    if (data.z.size() != n) {
        throw InputError("dataset has inconsistent row counts");
    }
    std::ofstream os(csv);
    if (!os) {
        throw InputError("cannot write " + csv.string());
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        os << "x" << (j + 1) << ",";
    }
    os << "z\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            os << format_double(data.points(i, j)) << ",";
        }
        os << format_double(data.z(i)) << "\n";
    }

    nlohmann::json meta;
    meta["n"] = n;
    meta["d"] = d;
    meta["sigma0_true"] = data.meta.sigma0_true ? nlohmann::json(*data.meta.sigma0_true) : nlohmann::json();
    meta["seed"] = data.meta.seed ? nlohmann::json(*data.meta.seed) : nlohmann::json();
    meta["sampling"] = data.meta.sampling ? nlohmann::json(to_string(*data.meta.sampling)) : nlohmann::json();
    meta["generator"] = data.meta.generator;
    std::ofstream ms(sidecar_path(csv));
    ms << meta.dump(2) << "\n";
}

Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
    std::ifstream is(path);
    if (!is) {
        throw InputError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(is, line)) {
        throw InputError(path.string() + " is empty");
    }
    std::vector<std::string> names;
    for (const auto& cell : split(line, ',')) {
        names.push_back(trim(cell));
    }
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != names.size()) {
            throw InputError(path.string() + " line " + std::to_string(line_no) + ": expected " +
                             std::to_string(names.size()) + " fields, found " + std::to_string(cells.size()));
        }
        for (const auto& cell : cells) {
            values.push_back(parse_number(cell, line_no));
        }
        ++rows;
    }
    if (rows == 0) {
        throw InputError(path.string() + " has no data rows");
    }
    Eigen::MatrixXd table(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(names.size()));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * names.size() + c];
        }
    }
    if (header) {
        *header = names;
    }
    return table;
}

Dataset read_dataset(const std::filesystem::path& csv) {
    std::vector<std::string> header;
    const Eigen::MatrixXd table = read_numeric_csv(csv, &header);
    const auto cols = static_cast<Eigen::Index>(header.size());
    if (cols < 2 || header.back() != "z") {
        throw InputError(csv.string() + ": header must be x1,..,xd,z");
    }
    for (Eigen::Index j = 0; j + 1 < cols; ++j) {
        if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j + 1)) {
            throw InputError(csv.string() + ": header must be x1,..,xd,z");
        }
    }
    Dataset data;
    data.points = table.leftCols(cols - 1);
    data.z = table.col(cols - 1);
    data.meta.n = table.rows();
    data.meta.d = cols - 1;

    const auto meta_path = sidecar_path(csv);
    if (std::filesystem::exists(meta_path)) {
        std::ifstream ms(meta_path);
        nlohmann::json meta;
        try {
            ms >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw InputError(meta_path.string() + ": " + e.what());
        }
        if (meta.value("n", data.meta.n) != data.meta.n || meta.value("d", data.meta.d) != data.meta.d) {
            throw InputError(meta_path.string() + " does not match the CSV dimensions");
        }
        if (meta.contains("sigma0_true") && meta["sigma0_true"].is_number()) {
            data.meta.sigma0_true = meta["sigma0_true"].get<double>();
        }
        if (meta.contains("seed") && meta["seed"].is_number_unsigned()) {
            data.meta.seed = meta["seed"].get<std::uint64_t>();
        }
        if (meta.contains("sampling") && meta["sampling"].is_string()) {
            data.meta.sampling = parse_sampling(meta["sampling"].get<std::string>());
        }
        data.meta.generator = meta.value("generator", "");
    }
    return data;
}

} // namespace etafit
