#include "etafit/estimation.hpp"
#include "etafit/errors.hpp"
#include "etafit/roots.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace etafit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool use_interpolant(const EstimationConfig& config, const SpectrumSummary& spectrum) {
    switch (config.trace_mode) {
    case TraceMode::Exact: return false;
    case TraceMode::Interpolated: return true;
    case TraceMode::Auto: return spectrum.eigenvalues.size() == 0;
    }
    return true;
}

TraceInterpolant fit_for_config(const CorrelationMatrixPtr& K, const EstimationConfig& config,
                                const SpectrumSummary& spectrum, Solver* solver) {
    TraceOptions options;
    options.method = config.trace_method.value_or(default_trace_method(*K));
    options.hutchinson_vectors = config.hutchinson_vectors;
    options.seed = config.seed;
    const Eigen::VectorXd* ev = spectrum.eigenvalues.size() ? &spectrum.eigenvalues : nullptr;
    return fit_tau_interpolant(K, config.nodes, options, ev, solver);
}

} // namespace

std::string to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::Interior: return "Interior";
    case Outcome::NoiseDominated: return "NoiseDominated";
    case Outcome::ErrorDominated: return "ErrorDominated";
    case Outcome::Degenerate: return "Degenerate";
    }
    return "unknown";
}

std::string to_string(EstimationMethod method) {
    return method == EstimationMethod::ProfiledEta ? "ProfiledEta" : "DirectNelderMead";
}

void EstimationConfig::validate() const {
    if (!(c > 0.0) || !(C > c) || !std::isfinite(C)) {
        throw InputError("thresholds must satisfy 0 < c < C < infinity");
    }
    if (!(x_tol_log10 > 0.0) || !(f_tol_rel >= 0.0)) {
        throw InputError("root tolerances must be positive");
    }
    if (scan_probes < 2) {
        throw InputError("the bracketing scan needs at least 2 probes");
    }
    if (hutchinson_vectors < 2) {
        throw InputError("Hutchinson estimation needs at least 2 probe vectors");
    }
}

EstimationContext prepare_context(const CorrelationMatrixPtr& K, const EstimationConfig& config) {
    config.validate();
    EstimationContext context;
    Solver solver(K);
    context.spectrum = spectrum_bounds(K, config.spectrum, &solver);
    if (use_interpolant(config, *context.spectrum)) {
        context.interpolant = fit_for_config(K, config, *context.spectrum, &solver);
    }
    return context;
}

EstimationReport estimate_variances(const GpModel& model, const EstimationConfig& config,
                                    const EstimationContext* context) {
    Solver solver(model.K_ptr());
    return estimate_variances(model, solver, config, context);
}

EstimationReport estimate_variances(const GpModel& model, Solver& solver, const EstimationConfig& config,
                                    const EstimationContext* context) {
    config.validate();
    const auto start = Clock::now();
    EstimationReport report;
    report.method = EstimationMethod::ProfiledEta;
    EstimationDiagnostics& diag = report.diagnostics;

    if (model.degenerate()) {
        report.outcome = Outcome::Degenerate;
        report.hyperparams = HyperParams{0.0, 0.0, 0.0};
        report.ell_max = std::numeric_limits<double>::quiet_NaN();
        diag.warnings.push_back("z lies in range(X); variances are trivially zero");
        report.timings.total = seconds_since(start);
        return report;
    }
    if (&solver.matrix() != &model.K()) {
        throw InputError("solver was built for a different correlation matrix");
    }

    // Precompute: spectrum, trace source, asymptote advisory.
    diag.spectrum = context && context->spectrum ? *context->spectrum
                                                  : spectrum_bounds(model.K_ptr(), config.spectrum, &solver);
    const Eigen::VectorXd* eigenvalues = diag.spectrum.eigenvalues.size() ? &diag.spectrum.eigenvalues : nullptr;
    TraceSource traces;
    if (use_interpolant(config, diag.spectrum)) {
        TraceInterpolant interp = context && context->interpolant
                                      ? *context->interpolant
                                      : fit_for_config(model.K_ptr(), config, diag.spectrum, &solver);
        if (interp.n != model.n()) {
            throw InputError("trace interpolant was fitted for a different matrix size");
        }
        if (interp.ill_conditioned()) {
            diag.warnings.push_back("interpolant weight system is ill-conditioned");
        }
        diag.trace_source = "interpolant:" + to_string(interp.method);
        diag.interpolant = interp;
        traces = interpolated_trace_source(std::move(interp), solver, eigenvalues, config.hutchinson_vectors,
                                           config.seed);
    } else {
        diag.trace_source = eigenvalues ? "exact:eigen"
                            : solver.options().method == SolverMethod::DenseCholesky ? "exact:cholesky"
                                                                                     : "exact:hutchinson";
        traces = exact_trace_source(solver, eigenvalues, config.hutchinson_vectors, config.seed);
    }

    try {
        diag.asymptote = asymptote_coefficients(model, config.large_n_approx);
        diag.asymptote_roots_1 = asymptote_roots(*diag.asymptote, 1);
        diag.asymptote_roots_2 = asymptote_roots(*diag.asymptote, 2);
    } catch (const Error& e) {
        diag.warnings.push_back(std::string("asymptote unavailable: ") + e.what());
    }
    std::vector<double> all_roots = diag.asymptote_roots_1;
    all_roots.insert(all_roots.end(), diag.asymptote_roots_2.begin(), diag.asymptote_roots_2.end());
    std::tie(diag.eta_lo, diag.eta_hi) = search_interval(diag.spectrum, all_roots);
    report.timings.precompute = seconds_since(start);

    // Scan, bracket, refine.
    const auto root_start = Clock::now();
    ProfileEvaluator evaluator(model, solver, std::move(traces));
    if (config.observer) {
        evaluator.set_observer(config.observer);
    }
    const double dof = model.dof();
    auto d_ell_at_log = [&](double x) { return evaluator.evaluate(std::pow(10.0, x), false).d_ell; };

    const double x_lo = std::log10(diag.eta_lo);
    const double x_hi = std::log10(diag.eta_hi);
    std::vector<double> xs;
    std::vector<double> fs;
    for (int i = 0; i < config.scan_probes; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / (config.scan_probes - 1);
        const double eta = std::pow(10.0, x);
        try {
            const double d = d_ell_at_log(x);
            xs.push_back(x);
            fs.push_back(d);
            diag.probes.push_back({eta, d, derivative_bounds(diag.spectrum, model.n(), model.m(), eta).first});
        } catch (const NumericError& e) {
            ++diag.failed_evaluations;
            diag.warnings.push_back(std::string("scan probe failed: ") + e.what());
        }
    }

    const double f_tol = config.f_tol_rel * dof;
    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        // A maximum needs d ell / d eta to go from positive to negative; other
        // sign changes are minima and are recorded but not refined.
        if (!(fs[i] > 0.0 && fs[i + 1] <= 0.0)) {
            continue;
        }
        BracketRecord rec;
        rec.lo = std::pow(10.0, xs[i]);
        rec.hi = std::pow(10.0, xs[i + 1]);
        try {
            const RootResult r = chandrupatla_root(d_ell_at_log, xs[i], xs[i + 1], config.x_tol_log10, f_tol,
                                                   config.max_root_iter, fs[i], fs[i + 1]);
            rec.root = std::pow(10.0, r.root);
            rec.iterations = r.iterations;
            rec.converged = true;
            roots.push_back(rec.root);
        } catch (const ConvergenceError& e) {
            rec.error = e.what();
            rec.iterations = config.max_root_iter;
            diag.warnings.push_back(std::string("root refinement failed: ") + e.what());
        } catch (const NumericError& e) {
            rec.error = e.what();
            ++diag.failed_evaluations;
            diag.warnings.push_back(std::string("root refinement failed: ") + e.what());
        }
        report.n_root_iters += rec.iterations;
        diag.brackets.push_back(rec);
    }

    // Candidates: refined roots plus the two boundary limits.
    for (double eta : roots) {
        CandidateRecord cand;
        cand.kind = "root";
        cand.eta = eta;
        try {
            const LikelihoodEval& ev = config.second_derivative ? evaluator.evaluate_second(eta)
                                                                : evaluator.evaluate(eta, true);
            cand.ell = *ev.ell;
            cand.d_ell = ev.d_ell;
            cand.d2_ell = ev.d2_ell;
            cand.admissible = !ev.d2_ell || *ev.d2_ell < 0.0;
            diag.candidates.push_back(cand);
        } catch (const NumericError& e) {
            diag.warnings.push_back(std::string("candidate evaluation failed: ") + e.what());
        }
    }
    try {
        const LikelihoodEval& ev = evaluator.evaluate(0.0, true);
        CandidateRecord cand;
        cand.kind = "eta_zero";
        cand.eta = 0.0;
        cand.ell = *ev.ell;
        cand.d_ell = ev.d_ell;
        diag.candidates.push_back(cand);
    } catch (const NumericError& e) {
        diag.warnings.push_back(std::string("eta = 0 limit unavailable: ") + e.what());
    }
    {
        CandidateRecord cand;
        cand.kind = "eta_infinity";
        cand.eta = std::numeric_limits<double>::infinity();
        cand.ell = profile_ell_noise_limit(model);
        if (config.observer) {
            config.observer(cand.eta);
        }
        diag.candidates.push_back(cand);
    }
    report.n_ell_evals = evaluator.evaluations() + 1;

    const CandidateRecord* best = nullptr;
    bool any_root = false;
    for (const auto& cand : diag.candidates) {
        if (!cand.admissible || !std::isfinite(cand.ell)) {
            continue;
        }
        any_root = any_root || cand.kind == "root";
        if (!best || cand.ell > best->ell) {
            best = &cand;
        }
    }
    if (!best) {
        throw NumericError("no usable likelihood candidate");
    }
    if (!any_root) {
        diag.warnings.push_back("no admissible interior root; best boundary limit returned");
    }

    const double eta_hat = best->eta;
    auto error_limit = [&]() {
        report.outcome = Outcome::ErrorDominated;
        const LikelihoodEval& ev = evaluator.evaluate(0.0, true);
        report.hyperparams = HyperParams::error_only(ev.sigma2_hat);
        report.ell_max = *ev.ell;
    };
    auto noise_limit = [&]() {
        report.outcome = Outcome::NoiseDominated;
        report.hyperparams = HyperParams::noise_only(sigma02_noise_limit(model));
        report.ell_max = profile_ell_noise_limit(model);
    };
    if (eta_hat < config.c) {
        error_limit();
    } else if (eta_hat > config.C) {
        noise_limit();
    } else {
        const LikelihoodEval& ev = evaluator.evaluate(eta_hat, true);
        report.outcome = Outcome::Interior;
        report.hyperparams = HyperParams::from_ratio(ev.sigma2_hat, eta_hat);
        report.ell_max = *ev.ell;
    }
    report.n_ell_evals = evaluator.evaluations() + 1;
    diag.jitter = solver.jitter();
    report.timings.root_find = seconds_since(root_start);
    report.timings.total = seconds_since(start);
    return report;
}

} // namespace etafit
