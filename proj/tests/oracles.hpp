#pragma once

// Explicit dense-matrix reference constructions for small instances.

#include "etafit/core_algebra.hpp"
#include "etafit/design.hpp"
#include "etafit/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Instance {
    etafit::Points points;
    VectorXd z;
    etafit::DesignMatrix design;
    etafit::CorrelationMatrixPtr K;
};

// Random points in the unit square, exponential kernel, design of ones plus
// random columns, z drawn independently of the model.
inline Instance random_instance(int n, int m, unsigned seed, double alpha = 0.3) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    Instance inst;
    inst.points.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        inst.points(i, 0) = u(gen);
        inst.points(i, 1) = u(gen);
    }
    MatrixXd X(n, m);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (int j = 1; j < m; ++j) X(i, j) = g(gen);
    }
    inst.design = etafit::design_from_table(X);
    inst.z.resize(n);
    for (int i = 0; i < n; ++i) inst.z(i) = g(gen);
    inst.K = etafit::make_correlation(inst.points, etafit::CorrelationKernel::exponential(alpha));
    return inst;
}

inline etafit::GpModel model_of(const Instance& inst) {
    return etafit::GpModel(inst.z, inst.design, inst.K);
}

inline MatrixXd k_eta(const MatrixXd& K, double eta) {
    return K + eta * MatrixXd::Identity(K.rows(), K.cols());
}

// K_eta^-1 - K_eta^-1 X (X^T K_eta^-1 X)^-1 X^T K_eta^-1 through explicit inverses.
inline MatrixXd m1(const MatrixXd& K, const MatrixXd& X, double eta) {
    const MatrixXd Ki = k_eta(K, eta).inverse();
    const MatrixXd S = X.transpose() * Ki * X;
    return Ki - Ki * X * S.inverse() * X.transpose() * Ki;
}

inline double sigma2_hat(const MatrixXd& K, const MatrixXd& X, const VectorXd& z, double eta) {
    return z.dot(m1(K, X, eta) * z) / static_cast<double>(X.rows() - X.cols());
}

// Log marginal likelihood with Sigma = sigma2 K + sigma02 I, beta integrated out.
inline double log_marginal(const MatrixXd& K, const MatrixXd& X, const VectorXd& z, double sigma2, double sigma02) {
    const auto n = static_cast<double>(X.rows());
    const auto m = static_cast<double>(X.cols());
    const MatrixXd Sigma = sigma2 * K + sigma02 * MatrixXd::Identity(K.rows(), K.cols());
    const MatrixXd Si = Sigma.inverse();
    const MatrixXd XtSiX = X.transpose() * Si * X;
    const MatrixXd M = Si - Si * X * XtSiX.inverse() * X.transpose() * Si;
    return -0.5 * (n - m) * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(Sigma.determinant()) -
           0.5 * std::log(XtSiX.determinant()) - 0.5 * z.dot(M * z);
}

inline double profile_ell(const MatrixXd& K, const MatrixXd& X, const VectorXd& z, double eta) {
    const double s2 = sigma2_hat(K, X, z, eta);
    return log_marginal(K, X, z, s2, eta * s2);
}

inline MatrixXd G(const MatrixXd& K, const MatrixXd& X, double eta) {
    const MatrixXd M = m1(K, X, eta);
    const double dof = static_cast<double>(X.rows() - X.cols());
    return M.trace() / dof * M - M * M;
}

inline MatrixXd H(const MatrixXd& K, const MatrixXd& X, double eta) {
    const MatrixXd M = m1(K, X, eta);
    const MatrixXd M2 = M * M;
    const double dof = static_cast<double>(X.rows() - X.cols());
    const double t1 = M.trace() / dof;
    return (M2.trace() / dof + t1 * t1) * M - 2.0 * M2 * M;
}

inline MatrixXd projector_q(const MatrixXd& X) {
    return MatrixXd::Identity(X.rows(), X.rows()) - X * (X.transpose() * X).inverse() * X.transpose();
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

// Central difference with step h.
template <class F>
double central_diff(F&& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <class F>
double central_diff2(F&& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

} // namespace oracle
