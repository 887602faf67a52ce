#pragma once

#include "etafit/core_algebra.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace etafit {

struct SpectrumSummary {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
    std::string method; // "dense" or "lanczos"
    int iterations = 0;
    // lambda_min was raised to n * eps * lambda_max because K is numerically singular.
    bool numerically_singular = false;
    // Full ascending spectrum when computed densely, empty otherwise.
    Eigen::VectorXd eigenvalues;
};

struct SpectrumOptions {
    Eigen::Index dense_limit = 1024;
    double rel_tol = 1e-6;
    int max_iter = 300;
    std::uint64_t seed = 0;
};

struct LanczosResult {
    double value = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Largest eigenvalue of a symmetric operator by Lanczos with full reorthogonalization.
LanczosResult lanczos_largest(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op, Eigen::Index n,
                              double rel_tol, int max_iter, std::uint64_t seed);

// Extreme eigenvalues of K: dense eigensolve up to dense_limit, otherwise
// Lanczos on K (largest) and on K^-1 through the solver (smallest).
SpectrumSummary spectrum_bounds(const CorrelationMatrixPtr& K, const SpectrumOptions& options = {},
                                Solver* solver = nullptr);

// (b1, b2): bounds on |d ell/d eta| and |d2 ell/d eta2|.
std::pair<double, double> derivative_bounds(const SpectrumSummary& spec, Eigen::Index n, Eigen::Index m, double eta);

// Bound on |ell(eta) - ell(eta')| for the profile likelihood.
double ell_gap_bound(const SpectrumSummary& spec, Eigen::Index n, Eigen::Index m, double eta, double eta_prime);

struct AsymptoteCoefficients {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double trace_N = 0.0;
    double trace_N2 = 0.0;
    bool large_n_approx = false;
};

// n > 50 m
bool default_large_n_approx(const GpModel& model);

// The matrices A_0..A_3 and N = K Q applied to vectors; never formed densely.
class AsymptoteOperators {
public:
    AsymptoteOperators(const GpModel& model, bool large_n_approx);

    Eigen::VectorXd apply_N(const Eigen::VectorXd& v) const;
    Eigen::VectorXd apply_A(int i, const Eigen::VectorXd& v) const;
    // z / ||z||_Q
    Eigen::VectorXd z_check() const;

    double trace_N() const { return trace_N_; }
    double trace_N2() const { return trace_N2_; }
    bool large_n_approx() const { return large_n_approx_; }

private:
    const GpModel& model_;
    bool large_n_approx_;
    double trace_N_ = 0.0;
    double trace_N2_ = 0.0;
};

AsymptoteCoefficients asymptote_coefficients(const GpModel& model, std::optional<bool> large_n_approx = {});

// -(n - m)/2 eta^-2 (a0 + a1/eta [+ a2/eta^2 + a3/eta^3 for order 2])
double asymptote_derivative(const AsymptoteCoefficients& coeffs, double dof, double eta, int order);

// Positive real roots of a0 eta + a1 (order 1) or a0 eta^3 + a1 eta^2 + a2 eta + a3 (order 2), ascending.
std::vector<double> asymptote_roots(const AsymptoteCoefficients& coeffs, int order);

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending, Newton-polished.
std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0);

// [lambda_min / 10, 10 max(lambda_max, largest asymptote root, 1)] clamped to [1e-6, 1e8].
std::pair<double, double> search_interval(const SpectrumSummary& spec, const std::vector<double>& asym_roots);

} // namespace etafit
