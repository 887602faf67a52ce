#pragma once

#include "etafit/estimation.hpp"
#include "etafit/nelder_mead.hpp"

#include <functional>
#include <limits>
#include <string>

namespace etafit {

enum class PriorKind { Uniform, InverseSquare };

// Unnormalized prior density on a positive hyperparameter.
struct Prior {
    PriorKind kind = PriorKind::Uniform;
    double lo = 0.0; // support (lo, hi] for Uniform
    double hi = std::numeric_limits<double>::infinity();
    double scale = 1.0; // InverseSquare: p(x) = 1 / (1 + x/scale)^2 for x > 0

    static Prior uniform(double lo, double hi) { return {PriorKind::Uniform, lo, hi, 1.0}; }
    static Prior inverse_square(double scale) {
        return {PriorKind::InverseSquare, 0.0, std::numeric_limits<double>::infinity(), scale};
    }

    double log_density(double x) const; // -infinity outside the support
};

struct PriorSpec {
    Prior alpha = Prior::uniform(0.0, std::numeric_limits<double>::infinity());
    Prior nu = Prior::uniform(0.0, std::numeric_limits<double>::infinity());

    // alpha > 0 and 0 < nu <= 25, flat.
    static PriorSpec uniform();
    // 1/(1 + alpha)^2 and 1/(1 + nu/25)^2.
    static PriorSpec inverse_square();
    // No restriction beyond positivity.
    static PriorSpec flat();
    static PriorSpec parse(const std::string& text);

    double log_prior(double alpha, double nu) const;
};

using ModelBuilder = std::function<GpModel(double alpha, double nu)>;

// Matern correlation on fixed points, data and design.
ModelBuilder matern_model_builder(Points points, Eigen::VectorXd z, DesignMatrix design);

struct ProfileOptions {
    double tol = 1e-4;
    int max_evals = 600;
    double nu_min = 1e-2;
    double nu_max = 25.0;
    EstimationConfig inner;
};

// Nelder-Mead over (alpha, nu) of the profiled log posterior; each objective
// evaluation runs estimate_variances on a freshly built model.
EstimationReport profile_optimize(const ModelBuilder& builder, double alpha0, double nu0, const PriorSpec& priors,
                                  const ProfileOptions& options = {});

struct DirectOptions {
    double tol = 1e-4;
    int max_evals = 5000;
    double nu_min = 1e-2;
    double nu_max = 25.0;
};

// Nelder-Mead over (alpha, nu, sigma, sigma0) of the log posterior evaluated directly.
EstimationReport direct_optimize(const ModelBuilder& builder, const Eigen::Vector4d& init, const PriorSpec& priors,
                                 const DirectOptions& options = {});

struct DirectVarianceResult {
    double sigma = 0.0;
    double sigma0 = 0.0;
    double ell = 0.0;
    NelderMeadResult nm;
};

// Nelder-Mead over (sigma2, sigma02) of the log likelihood at fixed K;
// negative variances are infeasible.
DirectVarianceResult direct_variance_search(const GpModel& model, double sigma2_init, double sigma02_init,
                                            NelderMeadOptions options);

} // namespace etafit
