#include "doctest.h"
#include "oracles.hpp"

#include "etafit/core_algebra.hpp"
#include "etafit/errors.hpp"
#include "etafit/trace_tools.hpp"

#include <limits>

using namespace etafit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("hyperparameter constructors") {
    const auto h = HyperParams::from_ratio(0.04, 2.0);
    CHECK(h.sigma02 == doctest::Approx(0.08));
    CHECK(h.sigma() == doctest::Approx(0.2));
    const auto noise = HyperParams::noise_only(0.04);
    CHECK(noise.sigma2 == 0.0);
    CHECK(std::isinf(noise.eta));
    CHECK(noise.sigma0() == doctest::Approx(0.2));
    const auto err = HyperParams::error_only(0.09);
    CHECK(err.eta == 0.0);
    CHECK(err.sigma02 == 0.0);
}

TEST_CASE("projected operator matches explicit M1") {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const int n = 8;
        const int m = 1 + static_cast<int>(seed % 3);
        const auto inst = oracle::random_instance(n, m, seed);
        const GpModel model = oracle::model_of(inst);
        Solver solver(inst.K);
        const MatrixXd K = inst.K->to_dense();
        for (double eta : {0.0, 1e-3, 0.5, 3.0, 1e3}) {
            const MatrixXd M = oracle::m1(K, inst.design.X, eta);
            const ProjectedOperator op(model, solver, eta);
            VectorXd v = VectorXd::LinSpaced(n, -1.0, 2.0);
            CHECK((op.apply(v) - M * v).norm() <= 1e-8 * (M * v).norm() + 1e-12);
            CHECK((m1_apply(model, eta, solver) - M * inst.z).norm() <= 1e-8 * (M * inst.z).norm());
            const TraceProvider exact = [&](double e) { return oracle::k_eta(K, e).inverse().trace(); };
            CHECK(oracle::rel_err(trace_m1(model, eta, exact, solver), M.trace()) < 1e-8);
        }
    }
}

TEST_CASE("M1 has exactly m zero eigenvalues") {
    for (int m = 1; m <= 4; ++m) {
        const auto inst = oracle::random_instance(8, m, 11 + m);
        const GpModel model = oracle::model_of(inst);
        Solver solver(inst.K);
        const ProjectedOperator op(model, solver, 0.3);
        const MatrixXd M = op.apply(MatrixXd(MatrixXd::Identity(8, 8)));
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()));
        const VectorXd ev = es.eigenvalues();
        const double scale = ev.cwiseAbs().maxCoeff();
        int zeros = 0;
        for (int i = 0; i < 8; ++i) {
            if (std::abs(ev(i)) < 1e-10 * scale) ++zeros;
            else CHECK(ev(i) > 0.0);
        }
        CHECK(zeros == m);
    }
}

TEST_CASE("GLS coefficients and orthogonal decomposition") {
    const auto inst = oracle::random_instance(8, 3, 7);
    const GpModel model = oracle::model_of(inst);
    Solver solver(inst.K);
    const MatrixXd K = inst.K->to_dense();
    const MatrixXd& X = inst.design.X;
    const double eta = 0.7;
    const MatrixXd Ki = oracle::k_eta(K, eta).inverse();
    const VectorXd beta_ref = (X.transpose() * Ki * X).ldlt().solve(X.transpose() * Ki * inst.z);
    const VectorXd beta = beta_gls(model, eta, solver);
    CHECK((beta - beta_ref).norm() < 1e-8 * beta_ref.norm());

    std::mt19937 gen(3);
    std::normal_distribution<double> g;
    const ProjectedOperator op(model, solver, eta);
    for (int trial = 0; trial < 5; ++trial) {
        VectorXd b(3);
        for (int j = 0; j < 3; ++j) b(j) = g(gen);
        const VectorXd r = inst.z - X * b;
        const double lhs = r.dot(Ki * r);
        const VectorXd d = b - beta;
        const double rhs = inst.z.dot(op.apply(inst.z)) + d.dot(X.transpose() * Ki * X * d);
        CHECK(oracle::rel_err(lhs, rhs) < 1e-9);
    }
}

TEST_CASE("solver paths agree") {
    const auto inst = oracle::random_instance(40, 2, 5, 0.05);
    const MatrixXd K = inst.K->to_dense();
    CorrelationMatrix::SparseMatrix sp = K.sparseView();
    const auto Ks = std::make_shared<const CorrelationMatrix>(sp);
    const VectorXd b = VectorXd::LinSpaced(40, 0.0, 1.0);
    for (double eta : {1e-2, 1.0}) {
        const VectorXd ref = oracle::k_eta(K, eta).ldlt().solve(b);
        Solver dense(inst.K);
        Solver chol(Ks, {SolverMethod::SparseCholesky, 1e-12, 0});
        Solver cg(Ks, {SolverMethod::ConjugateGradient, 1e-12, 0});
        CHECK((dense.solve(eta, b) - ref).norm() < 1e-10 * ref.norm());
        CHECK((chol.solve(eta, b) - ref).norm() < 1e-10 * ref.norm());
        CHECK((cg.solve(eta, b) - ref).norm() < 1e-8 * ref.norm());
        const double logdet = std::log(oracle::k_eta(K, eta).determinant());
        CHECK(dense.log_det(eta) == doctest::Approx(logdet).epsilon(1e-10));
        CHECK(chol.log_det(eta) == doctest::Approx(logdet).epsilon(1e-10));
        const double tr = oracle::k_eta(K, eta).inverse().trace();
        CHECK(dense.trace_inverse_cholesky(eta) == doctest::Approx(tr).epsilon(1e-10));
        CHECK(chol.trace_inverse_cholesky(eta) == doctest::Approx(tr).epsilon(1e-10));
    }
}

TEST_CASE("factorizations are cached per eta") {
    const auto inst = oracle::random_instance(20, 1, 2);
    Solver solver(inst.K);
    const VectorXd b = VectorXd::Ones(20);
    solver.solve(0.5, b);
    solver.solve(0.5, b);
    solver.log_det(0.5);
    CHECK(solver.factorizations() == 1);
    solver.solve(1.5, b);
    solver.solve(0.5, b);
    CHECK(solver.factorizations() == 2);
}

TEST_CASE("model validation") {
    const auto inst = oracle::random_instance(8, 2, 9);
    VectorXd short_z = inst.z.head(7);
    CHECK_THROWS_AS(GpModel(short_z, inst.design, inst.K), InputError);
    MatrixXd X = inst.design.X;
    X.col(1) = 2.0 * X.col(0);
    CHECK_THROWS_AS(GpModel(inst.z, DesignMatrix{X, {"a", "b"}}, inst.K), ModelError);
    const VectorXd in_range = inst.design.X * VectorXd::Ones(2);
    CHECK(GpModel(in_range, inst.design, inst.K).degenerate());
    CHECK_FALSE(oracle::model_of(inst).degenerate());
}

TEST_CASE("compensated dot recovers cancelled terms") {
    VectorXd a(4), b(4);
    a << 1e16, 1.0, -1e16, 1.0;
    b << 1.0, 1.0, 1.0, 1.0;
    CHECK(compensated_dot(a, b) == 2.0);
}
