#pragma once

#include "etafit/analysis.hpp"
#include "etafit/core_algebra.hpp"
#include "etafit/likelihood.hpp"
#include "etafit/trace_tools.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace etafit {

enum class Outcome { Interior, NoiseDominated, ErrorDominated, Degenerate };
enum class EstimationMethod { ProfiledEta, DirectNelderMead };

std::string to_string(Outcome outcome);
std::string to_string(EstimationMethod method);

// Auto uses exact eigenvalue traces whenever the full spectrum is already
// known and the fitted interpolant otherwise.
enum class TraceMode { Auto, Interpolated, Exact };

struct EstimationConfig {
    double c = 1e-4; // eta below c: error dominated
    double C = 1e4;  // eta above C: noise dominated
    double x_tol_log10 = 1e-6;
    double f_tol_rel = 1e-8; // scaled by n - m
    int scan_probes = 16;
    int max_root_iter = 100;
    TraceMode trace_mode = TraceMode::Auto;
    std::optional<TraceMethod> trace_method;
    std::vector<double> nodes = kDefaultInterpolantNodes;
    int hutchinson_vectors = 20;
    std::uint64_t seed = 0;
    std::optional<bool> large_n_approx;
    bool second_derivative = true;
    SpectrumOptions spectrum;
    // Invoked once per profile likelihood evaluation (eta = +inf for the noise limit).
    std::function<void(double)> observer;

    void validate() const;
};

// Quantities that depend only on K and can be reused across designs.
struct EstimationContext {
    std::optional<SpectrumSummary> spectrum;
    std::optional<TraceInterpolant> interpolant;
};

struct ScanProbe {
    double eta = 0.0;
    double d_ell = 0.0;
    double bound = 0.0;
};

struct BracketRecord {
    double lo = 0.0;
    double hi = 0.0;
    double root = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string error;
};

struct CandidateRecord {
    std::string kind; // "root", "eta_zero", "eta_infinity"
    double eta = 0.0;
    double ell = 0.0;
    std::optional<double> d_ell;
    std::optional<double> d2_ell;
    bool admissible = true;
};

struct EstimationDiagnostics {
    SpectrumSummary spectrum;
    std::optional<AsymptoteCoefficients> asymptote;
    std::vector<double> asymptote_roots_1;
    std::vector<double> asymptote_roots_2;
    double eta_lo = 0.0;
    double eta_hi = 0.0;
    std::vector<ScanProbe> probes;
    std::vector<BracketRecord> brackets;
    std::vector<CandidateRecord> candidates;
    std::string trace_source;
    std::optional<TraceInterpolant> interpolant;
    double jitter = 0.0;
    int failed_evaluations = 0;
    std::vector<std::string> warnings;
};

struct PhaseTimings {
    double precompute = 0.0;
    double root_find = 0.0;
    double total = 0.0;
};

struct EstimationReport {
    HyperParams hyperparams;
    std::optional<double> alpha_hat;
    std::optional<double> nu_hat;
    double ell_max = 0.0;
    std::optional<double> log_posterior;
    int n_ell_evals = 0;
    int n_root_iters = 0;
    int n_objective_evals = 0;
    bool converged = true;
    EstimationMethod method = EstimationMethod::ProfiledEta;
    Outcome outcome = Outcome::Interior;
    EstimationDiagnostics diagnostics;
    PhaseTimings timings;

    double eta_hat() const { return hyperparams.eta; }
};

// Profile-likelihood estimate of (sigma2, sigma02): bracket the roots of
// d ell / d eta over the search interval, refine each, and keep the best of
// the admissible roots and the two boundary limits.
EstimationReport estimate_variances(const GpModel& model, Solver& solver, const EstimationConfig& config = {},
                                    const EstimationContext* context = nullptr);
EstimationReport estimate_variances(const GpModel& model, const EstimationConfig& config = {},
                                    const EstimationContext* context = nullptr);

// Spectrum and (when needed) interpolant for K, to share across several runs.
EstimationContext prepare_context(const CorrelationMatrixPtr& K, const EstimationConfig& config = {});

} // namespace etafit
