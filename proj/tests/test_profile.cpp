#include "doctest.h"

#include "etafit/dataset.hpp"
#include "etafit/errors.hpp"
#include "etafit/likelihood.hpp"
#include "etafit/profile.hpp"

#include <cmath>

using namespace etafit;

TEST_CASE("prior densities") {
    const auto u = PriorSpec::uniform();
    CHECK(u.log_prior(0.1, 1.0) == 0.0);
    CHECK(u.log_prior(0.1, 25.0) == 0.0);
    CHECK(std::isinf(u.log_prior(0.1, 25.5)));
    CHECK(std::isinf(u.log_prior(-0.1, 1.0)));
    const auto s = PriorSpec::inverse_square();
    CHECK(s.log_prior(1.0, 25.0) == doctest::Approx(-4.0 * std::log(2.0)));
    CHECK(std::isinf(s.log_prior(0.0, 1.0)));
    CHECK(PriorSpec::parse("none").log_prior(3.0, 100.0) == 0.0);
    CHECK_THROWS_AS(PriorSpec::parse("gamma"), InputError);
}

TEST_CASE("profiled kernel optimization improves on its start") {
    const Dataset d = generate_synthetic(144, 0.2, 5, Sampling::Grid);
    const auto design = build_design(d.points, BasisSpec::polynomial(1));
    const auto builder = matern_model_builder(d.points, d.z, design);
    ProfileOptions options;
    options.max_evals = 80;
    const auto r = profile_optimize(builder, 0.1, 1.0, PriorSpec::inverse_square(), options);
    REQUIRE(r.alpha_hat);
    REQUIRE(r.nu_hat);
    CHECK(r.method == EstimationMethod::ProfiledEta);
    CHECK(r.n_objective_evals <= 80);
    CHECK(r.n_ell_evals > r.n_objective_evals);
    const GpModel start = builder(0.1, 1.0);
    const auto start_report = estimate_variances(start);
    const double start_post = start_report.ell_max + PriorSpec::inverse_square().log_prior(0.1, 1.0);
    CHECK(*r.log_posterior >= start_post);
}

TEST_CASE("direct searches evaluate the plain likelihood") {
    const Dataset d = generate_synthetic(100, 0.2, 6, Sampling::Grid);
    const auto design = build_design(d.points, BasisSpec::polynomial(1));
    const GpModel model(d.z, design, make_correlation(d.points, CorrelationKernel::exponential(0.1)));
    NelderMeadOptions opt;
    opt.x_tol = 1e-8;
    opt.f_tol = 1e-10;
    const auto r = direct_variance_search(model, 0.01, 0.01, opt);
    Solver solver(model.K_ptr());
    CHECK(r.ell == doctest::Approx(log_marginal_likelihood_variances(model, r.sigma * r.sigma, r.sigma0 * r.sigma0, solver)));
    const auto profiled = estimate_variances(model);
    CHECK(r.ell <= profiled.ell_max + 1e-6);
    CHECK(r.ell == doctest::Approx(profiled.ell_max).epsilon(1e-6));

    const auto builder = matern_model_builder(d.points, d.z, design);
    DirectOptions dopt;
    dopt.max_evals = 200;
    const auto dr = direct_optimize(builder, Eigen::Vector4d(0.1, 1.0, 0.05, 0.05), PriorSpec::uniform(), dopt);
    CHECK(dr.method == EstimationMethod::DirectNelderMead);
    CHECK(dr.n_objective_evals <= 200);
    CHECK(std::isfinite(*dr.log_posterior));
}
