#include "etafit/profile.hpp"
#include "etafit/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>

namespace etafit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Outcome classify_variances(double sigma2, double sigma02) {
    if (sigma2 == 0.0) {
        return Outcome::NoiseDominated;
    }
    if (sigma02 == 0.0) {
        return Outcome::ErrorDominated;
    }
    return Outcome::Interior;
}

} // namespace

double Prior::log_density(double x) const {
    if (!std::isfinite(x) && x != kInf) {
        return -kInf;
    }
    switch (kind) {
    case PriorKind::Uniform:
        return (x > lo && x <= hi) ? 0.0 : -kInf;
    case PriorKind::InverseSquare:
        return x > 0.0 && std::isfinite(x) ? -2.0 * std::log1p(x / scale) : -kInf;
    }
    return -kInf;
}

PriorSpec PriorSpec::uniform() {
    return {Prior::uniform(0.0, kInf), Prior::uniform(0.0, 25.0)};
}

PriorSpec PriorSpec::inverse_square() {
    return {Prior::inverse_square(1.0), Prior::inverse_square(25.0)};
}

PriorSpec PriorSpec::flat() {
    return {};
}

PriorSpec PriorSpec::parse(const std::string& text) {
    if (text == "uniform") return uniform();
    if (text == "inverse-square") return inverse_square();
    if (text == "none" || text == "flat") return flat();
    throw InputError("unknown prior '" + text + "' (expected uniform, inverse-square or none)");
}

double PriorSpec::log_prior(double a, double n) const {
    return alpha.log_density(a) + nu.log_density(n);
}

ModelBuilder matern_model_builder(Points points, Eigen::VectorXd z, DesignMatrix design) {
    return [points = std::move(points), z = std::move(z), design = std::move(design)](double a, double n) {
        return GpModel(z, design, make_correlation(points, CorrelationKernel::matern(a, n)));
    };
}

EstimationReport profile_optimize(const ModelBuilder& builder, double alpha0, double nu0, const PriorSpec& priors,
                                  const ProfileOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    auto in_box = [&](double a, double n) {
        return a > 0.0 && n >= options.nu_min && n <= options.nu_max &&
               std::isfinite(priors.log_prior(a, n));
    };
    if (!in_box(alpha0, nu0)) {
        throw InputError("initial (alpha, nu) lies outside the prior support or the nu box");
    }

    std::map<std::pair<double, double>, EstimationReport> inner_reports;
    int total_ell_evals = 0;
    int failures = 0;
    std::vector<std::string> failure_notes;

    auto objective = [&](const Eigen::VectorXd& x) {
        const double a = x(0);
        const double n = x(1);
        if (!in_box(a, n)) {
            return kInf;
        }
        try {
            const GpModel model = builder(a, n);
            EstimationReport rep = estimate_variances(model, options.inner);
            total_ell_evals += rep.n_ell_evals;
            const double value = rep.ell_max + priors.log_prior(a, n);
            inner_reports[{a, n}] = std::move(rep);
            return std::isfinite(value) ? -value : kInf;
        } catch (const Error& e) {
            ++failures;
            if (failure_notes.size() < 10) {
                failure_notes.push_back(e.what());
            }
            return kInf;
        }
    };

    NelderMeadOptions nm_options;
    nm_options.x_tol = options.tol;
    nm_options.f_tol = options.tol;
    nm_options.max_evals = options.max_evals;
    const NelderMeadResult nm = nelder_mead(objective, Eigen::Vector2d(alpha0, nu0), nm_options);

    auto it = inner_reports.find({nm.x(0), nm.x(1)});
    if (it == inner_reports.end()) {
        throw NumericError("profile optimizer has no successful evaluation at its optimum");
    }
    EstimationReport report = it->second;
    report.alpha_hat = nm.x(0);
    report.nu_hat = nm.x(1);
    report.log_posterior = -nm.f;
    report.n_ell_evals = total_ell_evals;
    report.n_objective_evals = nm.evaluations;
    report.converged = nm.converged;
    report.method = EstimationMethod::ProfiledEta;
    report.diagnostics.failed_evaluations = failures;
    for (const auto& note : failure_notes) {
        report.diagnostics.warnings.push_back("inner estimation failed: " + note);
    }
    if (!nm.converged) {
        report.diagnostics.warnings.push_back("Nelder-Mead reached its evaluation limit");
    }
    report.timings.total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

EstimationReport direct_optimize(const ModelBuilder& builder, const Eigen::Vector4d& init, const PriorSpec& priors,
                                 const DirectOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    auto in_box = [&](const Eigen::VectorXd& x) {
        return x(0) > 0.0 && x(1) >= options.nu_min && x(1) <= options.nu_max && x(2) >= 0.0 && x(3) >= 0.0 &&
               (x(2) > 0.0 || x(3) > 0.0) && std::isfinite(priors.log_prior(x(0), x(1)));
    };
    if (!in_box(init)) {
        throw InputError("initial point lies outside the prior support or the parameter box");
    }
    int failures = 0;
    auto objective = [&](const Eigen::VectorXd& x) {
        if (!in_box(x)) {
            return kInf;
        }
        try {
            const GpModel model = builder(x(0), x(1));
            Solver solver(model.K_ptr());
            const double ell = log_marginal_likelihood_variances(model, x(2) * x(2), x(3) * x(3), solver);
            const double value = ell + priors.log_prior(x(0), x(1));
            return std::isfinite(value) ? -value : kInf;
        } catch (const Error&) {
            ++failures;
            return kInf;
        }
    };

    NelderMeadOptions nm_options;
    nm_options.x_tol = options.tol;
    nm_options.f_tol = options.tol;
    nm_options.max_evals = options.max_evals;
    const NelderMeadResult nm = nelder_mead(objective, Eigen::VectorXd(init), nm_options);

    EstimationReport report;
    report.method = EstimationMethod::DirectNelderMead;
    report.alpha_hat = nm.x(0);
    report.nu_hat = nm.x(1);
    const double s2 = nm.x(2) * nm.x(2);
    const double s02 = nm.x(3) * nm.x(3);
    report.hyperparams = {s2, s02, s2 > 0.0 ? s02 / s2 : kInf};
    report.log_posterior = -nm.f;
    report.ell_max = -nm.f - priors.log_prior(nm.x(0), nm.x(1));
    report.outcome = classify_variances(s2, s02);
    report.n_ell_evals = nm.evaluations;
    report.n_objective_evals = nm.evaluations;
    report.converged = nm.converged;
    report.diagnostics.failed_evaluations = failures;
    if (!nm.converged) {
        report.diagnostics.warnings.push_back("Nelder-Mead reached its evaluation limit");
    }
    report.timings.total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

DirectVarianceResult direct_variance_search(const GpModel& model, double sigma2_init, double sigma02_init,
                                            NelderMeadOptions options) {
    Solver solver(model.K_ptr());
    auto objective = [&](const Eigen::VectorXd& x) {
        if (x(0) < 0.0 || x(1) < 0.0) return kInf;
        try {
            return -log_marginal_likelihood_variances(model, x(0), x(1), solver);
        } catch (const Error&) {
            return kInf;
        }
    };
    DirectVarianceResult result;
    result.nm = nelder_mead(objective, Eigen::Vector2d(sigma2_init, sigma02_init), options);
    result.sigma = std::sqrt(result.nm.x(0));
    result.sigma0 = std::sqrt(result.nm.x(1));
    result.ell = -result.nm.f;
    return result;
}

} // namespace etafit
