#pragma once

#include "etafit/core_algebra.hpp"
#include "etafit/trace_tools.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>

namespace etafit {

// trace((K + eta I)^-1) and, for the second derivative, trace((K + eta I)^-2).
struct TraceSource {
    TraceProvider inverse;
    TraceProvider inverse_squared;
    bool interpolated = false;
};

// Exact traces: from eigenvalues when given, otherwise Cholesky (dense) or
// Hutchinson (sparse) through the solver.
TraceSource exact_trace_source(Solver& solver, const Eigen::VectorXd* eigenvalues = nullptr,
                               int hutchinson_vectors = 20, std::uint64_t seed = 0);
// Interpolated trace(K_eta^-1); the squared trace stays exact.
TraceSource interpolated_trace_source(TraceInterpolant interp, Solver& solver,
                                      const Eigen::VectorXd* eigenvalues = nullptr, int hutchinson_vectors = 20,
                                      std::uint64_t seed = 0);

struct LikelihoodEval {
    double eta = 0.0;
    double sigma2_hat = 0.0;
    std::optional<double> ell;
    double d_ell = 0.0;
    std::optional<double> d2_ell;
    double zMz = 0.0;  // z^T M1 z
    double zM2z = 0.0; // z^T M1^2 z
    std::optional<double> zM3z;
    double trace_m1 = 0.0;
    std::optional<double> trace_m1_sq;
};

// z^T M1 z / (n - m)
double sigma2_hat(const GpModel& model, double eta, Solver& solver);

// Log marginal likelihood at (sigma2, eta), with beta integrated out.
double log_marginal_likelihood(const GpModel& model, double sigma2, double eta, Solver& solver);
// Same likelihood in the (sigma2, sigma02) parameterization; sigma2 = 0 is allowed.
double log_marginal_likelihood_variances(const GpModel& model, double sigma2, double sigma02, Solver& solver);

// Limits of the variance estimators: eta = 0 gives the error-only fit,
// eta -> infinity the noise-only fit z^T Q z / (n - m).
double sigma2_error_limit(const GpModel& model, Solver& solver);
double sigma02_noise_limit(const GpModel& model);
// Profile log likelihood in the limit eta -> infinity.
double profile_ell_noise_limit(const GpModel& model);

LikelihoodEval profile_ell(const GpModel& model, double eta, Solver& solver, const TraceSource& traces,
                           bool second_derivative = false, bool with_ell = true);
double d_ell_deta(const GpModel& model, double eta, Solver& solver, const TraceSource& traces);
double d2_ell_deta2(const GpModel& model, double eta, Solver& solver, const TraceSource& traces);

using MatrixAction = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

// k-th derivative (k = 1, 2) of the log marginal likelihood along a parameter
// theta with dSigma/dtheta given as a matrix action; Sigma linear in theta is
// assumed for k = 2. Builds M densely, so n is capped at 2000.
double ell_derivative_generic(const GpModel& model, double sigma2, double eta, const MatrixAction& sigma_dot,
                              int k);

// Memoized profile evaluations over eta with an evaluation counter.
class ProfileEvaluator {
public:
    ProfileEvaluator(const GpModel& model, Solver& solver, TraceSource traces);

    // ell is always filled unless the solver is iterative and need_ell is false.
    const LikelihoodEval& evaluate(double eta, bool need_ell = true);
    const LikelihoodEval& evaluate_second(double eta);

    int evaluations() const { return evaluations_; }
    void set_observer(std::function<void(double eta)> observer) { observer_ = std::move(observer); }

private:
    const GpModel& model_;
    Solver& solver_;
    TraceSource traces_;
    std::map<double, LikelihoodEval> cache_;
    int evaluations_ = 0;
    std::function<void(double)> observer_;
};

} // namespace etafit
