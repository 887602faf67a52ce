#pragma once

#include "etafit/core_algebra.hpp"
#include "etafit/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace etafit {

enum class TraceMethod { Eigen, Cholesky, Hutchinson };

std::string to_string(TraceMethod method);
TraceMethod parse_trace_method(const std::string& text);

// eigen for dense n <= 1024, cholesky for dense n <= 8192, hutchinson otherwise.
TraceMethod default_trace_method(const CorrelationMatrix& K);

// All eigenvalues of K in ascending order (dense eigensolve).
Eigen::VectorXd correlation_eigenvalues(const CorrelationMatrix& K);

// sum 1 / (lambda_i + eta); eigenvalues below n * eps * lambda_max are
// raised to that floor so a numerically singular K gives a finite tau0.
double trace_inv_eigen(const Eigen::VectorXd& eigenvalues, double eta);
double trace_inv_eigen(const CorrelationMatrix& K, double eta);

double trace_inv_cholesky(Solver& solver, double eta);
double trace_inv_cholesky(const CorrelationMatrixPtr& K, double eta);

struct HutchinsonEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    int n_vectors = 0;
};

// Rademacher probes; probe k uses CounterRng(seed, k + 1), so results do not
// depend on evaluation order.
HutchinsonEstimate hutchinson_trace(const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& op,
                                    Eigen::Index n, int n_vectors, std::uint64_t seed);
HutchinsonEstimate trace_inv_hutchinson(const CorrelationMatrix& K, double eta, Solver& solver, int n_vectors,
                                        std::uint64_t seed);

inline const std::vector<double> kDefaultInterpolantNodes{1.0, 10.0, 40.0, 100.0, 1000.0};
inline constexpr int kMaxInterpolantNodes = 8;

struct TraceOptions {
    TraceMethod method = TraceMethod::Eigen;
    int hutchinson_vectors = 20;
    std::uint64_t seed = 0;
};

TraceOptions default_trace_options(const CorrelationMatrix& K);

// 1/tau(eta) = 1/tau0 + eta + sum_{i=1..p} w_i eta^(1/(i+1)),  tau = trace / n.
struct TraceInterpolant {
    std::vector<double> nodes;
    double tau0 = 0.0;
    std::vector<double> tau_values;
    std::vector<double> weights; // w_0 = 1 first
    Eigen::Index n = 0;
    TraceMethod method = TraceMethod::Eigen;
    std::uint64_t seed = 0;
    int hutchinson_vectors = 0;
    double condition_number = 1.0;

    int order() const { return static_cast<int>(nodes.size()); }
    bool ill_conditioned() const { return condition_number > 1e12; }
    double trace(double eta) const;
};

// Supplying precomputed eigenvalues or a solver avoids recomputation.
TraceInterpolant fit_tau_interpolant(const CorrelationMatrixPtr& K, std::vector<double> nodes,
                                     const TraceOptions& options, const Eigen::VectorXd* eigenvalues = nullptr,
                                     Solver* solver = nullptr);
double eval_tau(const TraceInterpolant& interp, double eta);

// Providers of trace((K + eta I)^-1) for the likelihood code.
TraceProvider eigen_trace_provider(Eigen::VectorXd eigenvalues);
TraceProvider cholesky_trace_provider(Solver& solver);
TraceProvider hutchinson_trace_provider(Solver& solver, int n_vectors, std::uint64_t seed);
TraceProvider interpolant_trace_provider(TraceInterpolant interp);

} // namespace etafit
