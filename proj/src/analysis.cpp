#include "etafit/analysis.hpp"
#include "etafit/errors.hpp"
#include "etafit/random.hpp"
#include "etafit/trace_tools.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace etafit {

LanczosResult lanczos_largest(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op, Eigen::Index n,
                              double rel_tol, int max_iter, std::uint64_t seed) {
    if (n < 1) {
        throw InputError("Lanczos needs a non-empty operator");
    }
    const int k_max = static_cast<int>(std::min<Eigen::Index>(n, std::max(max_iter, 2)));
    Eigen::MatrixXd V(n, k_max);
    std::vector<double> alpha;
    std::vector<double> beta;

    const CounterRng rng(seed, 0x1A4C205);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = rng.normal(static_cast<std::uint64_t>(i));
    }
    v.normalize();
    V.col(0) = v;

    LanczosResult result;
    for (int j = 0; j < k_max; ++j) {
        Eigen::VectorXd w = op(V.col(j));
        alpha.push_back(V.col(j).dot(w));
        // Full reorthogonalization, applied twice for stability.
        for (int pass = 0; pass < 2; ++pass) {
            w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        }
        const double b = w.norm();

        const int k = j + 1;
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
        Eigen::VectorXd sub = k > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), k - 1))
                                    : Eigen::VectorXd();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const double theta = tri.eigenvalues()(k - 1);
        const double residual = b * std::abs(tri.eigenvectors()(k - 1, k - 1));
        result.value = theta;
        result.residual = residual;
        result.iterations = k;
        if (residual <= rel_tol * std::abs(theta) || b <= 1e-14 * std::abs(theta) || k == n) {
            result.converged = true;
            return result;
        }
        if (j + 1 < k_max) {
            beta.push_back(b);
            V.col(j + 1) = w / b;
        }
    }
    return result;
}

SpectrumSummary spectrum_bounds(const CorrelationMatrixPtr& K, const SpectrumOptions& options, Solver* solver) {
    SpectrumSummary summary;
    const Eigen::Index n = K->size();
    if (n <= options.dense_limit) {
        summary.eigenvalues = correlation_eigenvalues(*K);
        summary.lambda_min = summary.eigenvalues(0);
        summary.lambda_max = summary.eigenvalues(n - 1);
        summary.method = "dense";
    } else {
        auto apply_K = [&](const Eigen::VectorXd& x) { return K->apply(x); };
        const LanczosResult top = lanczos_largest(apply_K, n, options.rel_tol, options.max_iter, options.seed);
        if (!top.converged) {
            std::ostringstream os;
            os << "Lanczos for the largest eigenvalue did not converge (residual " << top.residual << ")";
            throw NumericError(os.str());
        }
        std::unique_ptr<Solver> owned;
        if (!solver || &solver->matrix() != K.get()) {
            owned = std::make_unique<Solver>(K);
            solver = owned.get();
        }
        auto apply_inverse = [&](const Eigen::VectorXd& x) { return solver->solve(0.0, x); };
        const LanczosResult bottom =
            lanczos_largest(apply_inverse, n, options.rel_tol, options.max_iter, options.seed + 1);
        if (!bottom.converged || !(bottom.value > 0.0)) {
            std::ostringstream os;
            os << "Lanczos for the smallest eigenvalue did not converge (residual " << bottom.residual << ")";
            throw NumericError(os.str());
        }
        summary.lambda_max = top.value;
        summary.lambda_min = 1.0 / bottom.value;
        summary.iterations = top.iterations + bottom.iterations;
        summary.method = "lanczos";
    }
    const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * summary.lambda_max;
    if (!(summary.lambda_min > floor)) {
        summary.lambda_min = floor;
        summary.numerically_singular = true;
    }
    return summary;
}

std::pair<double, double> derivative_bounds(const SpectrumSummary& spec, Eigen::Index n, Eigen::Index m,
                                            double eta) {
    if (!(eta >= 0.0)) {
        throw InputError("eta must be non-negative");
    }
    const double dof = static_cast<double>(n - m);
    const double lo = 1.0 / (spec.lambda_min + eta);
    const double hi = 1.0 / (spec.lambda_max + eta);
    return {0.5 * dof * (lo - hi), dof * (lo * lo - hi * hi)};
}

double ell_gap_bound(const SpectrumSummary& spec, Eigen::Index n, Eigen::Index m, double eta, double eta_prime) {
    if (!(eta >= 0.0) || !(eta_prime >= 0.0)) {
        throw InputError("eta must be non-negative");
    }
    const double dof = static_cast<double>(n - m);
    const double l1 = spec.lambda_min;
    const double ln = spec.lambda_max;
    const double ratio = ((l1 + eta) / (ln + eta)) * ((ln + eta_prime) / (l1 + eta_prime));
    return std::abs(0.5 * dof * std::log(ratio));
}

bool default_large_n_approx(const GpModel& model) {
    return model.n() > 50 * model.m();
}

AsymptoteOperators::AsymptoteOperators(const GpModel& model, bool large_n_approx)
    : model_(model), large_n_approx_(large_n_approx) {
    if (model.degenerate()) {
        throw ModelError("degenerate model: ||z||_Q = 0");
    }
    const double n = static_cast<double>(model.n());
    if (large_n_approx_) {
        trace_N_ = n;
        trace_N2_ = model.K().frobenius_norm_squared();
    } else {
        const Eigen::MatrixXd& U = model.range_basis();
        const Eigen::MatrixXd KU = model.K().apply(U);
        const Eigen::MatrixXd UKU = U.transpose() * KU;
        double trace_K = 0.0;
        for (Eigen::Index i = 0; i < model.n(); ++i) {
            trace_K += model.K().entry(i, i);
        }
        trace_N_ = trace_K - UKU.trace();
        trace_N2_ = model.K().frobenius_norm_squared() - 2.0 * KU.squaredNorm() + UKU.squaredNorm();
    }
}

Eigen::VectorXd AsymptoteOperators::apply_N(const Eigen::VectorXd& v) const {
    return model_.K().apply(model_.project_out(v));
}

Eigen::VectorXd AsymptoteOperators::z_check() const {
    return model_.z() / std::sqrt(model_.z_q_norm_squared());
}

Eigen::VectorXd AsymptoteOperators::apply_A(int i, const Eigen::VectorXd& v) const {
    const double dof = model_.dof();
    const double t1 = trace_N_ / dof;
    const double t2 = trace_N2_ / dof;
    const Eigen::VectorXd n1 = apply_N(v);
    const Eigen::VectorXd n2 = apply_N(n1);
    Eigen::VectorXd inner;
    switch (i) {
    case 0:
        inner = -(t1 * v - n1);
        break;
    case 1:
        inner = t2 * v + t1 * n1 - 2.0 * n2;
        break;
    case 2: {
        const Eigen::VectorXd n3 = apply_N(n2);
        inner = -(t2 * n1 + t1 * n2 - 2.0 * n3);
        break;
    }
    case 3: {
        const Eigen::VectorXd n4 = apply_N(apply_N(n2));
        inner = t2 * n2 - n4;
        break;
    }
    default:
        throw InputError("asymptote matrix index must be 0..3");
    }
    return model_.project_out(inner);
}

AsymptoteCoefficients asymptote_coefficients(const GpModel& model, std::optional<bool> large_n_approx) {
    const AsymptoteOperators ops(model, large_n_approx.value_or(default_large_n_approx(model)));
    const Eigen::VectorXd zc = ops.z_check();
    const Eigen::VectorXd q = model.project_out(zc);

    // s_k = (Q z)^T N^k z, all coefficients are combinations of these.
    double s[5];
    Eigen::VectorXd y = zc;
    for (int k = 0; k <= 4; ++k) {
        if (k > 0) {
            y = ops.apply_N(y);
        }
        s[k] = compensated_dot(q, y);
    }
    const double dof = model.dof();
    const double t1 = ops.trace_N() / dof;
    const double t2 = ops.trace_N2() / dof;

    AsymptoteCoefficients c;
    c.a0 = -(t1 * s[0] - s[1]);
    c.a1 = t2 * s[0] + t1 * s[1] - 2.0 * s[2];
    c.a2 = -(t2 * s[1] + t1 * s[2] - 2.0 * s[3]);
    c.a3 = t2 * s[2] - s[4];
    c.trace_N = ops.trace_N();
    c.trace_N2 = ops.trace_N2();
    c.large_n_approx = ops.large_n_approx();
    return c;
}

double asymptote_derivative(const AsymptoteCoefficients& c, double dof, double eta, int order) {
    if (order != 1 && order != 2) {
        throw InputError("asymptote order must be 1 or 2");
    }
    if (!(eta > 0.0)) {
        throw InputError("asymptote needs eta > 0");
    }
    double poly = c.a0 + c.a1 / eta;
    if (order == 2) {
        poly += c.a2 / (eta * eta) + c.a3 / (eta * eta * eta);
    }
    return -0.5 * dof * poly / (eta * eta);
}

std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
    std::vector<double> roots;
    const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    if (scale == 0.0) {
        return roots;
    }
    auto eval = [&](double x) { return ((c3 * x + c2) * x + c1) * x + c0; };
    auto deriv = [&](double x) { return (3.0 * c3 * x + 2.0 * c2) * x + c1; };

    if (std::abs(c3) <= 1e-14 * scale) {
        if (std::abs(c2) <= 1e-14 * scale) {
            if (c1 != 0.0) {
                roots.push_back(-c0 / c1);
            }
            return roots;
        }
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc < 0.0) {
            return roots;
        }
        // Cancellation-free quadratic formula.
        const double qq = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
        if (qq != 0.0) {
            roots.push_back(qq / c2);
            roots.push_back(c0 / qq);
        } else {
            roots.push_back(0.0);
        }
        std::sort(roots.begin(), roots.end());
        return roots;
    }

    // Depressed cubic t^3 + p t + q with x = t - b/3.
    const double b = c2 / c3;
    const double c = c1 / c3;
    const double d = c0 / c3;
    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    const double shift = -b / 3.0;
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) + shift);
    } else if (p == 0.0) {
        roots.push_back(shift);
    } else {
        const double r = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
        }
    }
    for (double& x : roots) {
        for (int it = 0; it < 4; ++it) {
            const double fp = deriv(x);
            if (fp == 0.0) {
                break;
            }
            const double step = eval(x) / fp;
            if (!std::isfinite(step)) {
                break;
            }
            x -= step;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

std::vector<double> asymptote_roots(const AsymptoteCoefficients& c, int order) {
    std::vector<double> all;
    if (order == 1) {
        if (c.a0 != 0.0) {
            all.push_back(-c.a1 / c.a0);
        }
    } else if (order == 2) {
        all = real_cubic_roots(c.a0, c.a1, c.a2, c.a3);
    } else {
        throw InputError("asymptote order must be 1 or 2");
    }
    std::vector<double> positive;
    for (double r : all) {
        if (r > 0.0 && std::isfinite(r)) {
            positive.push_back(r);
        }
    }
    std::sort(positive.begin(), positive.end());
    return positive;
}

std::pair<double, double> search_interval(const SpectrumSummary& spec, const std::vector<double>& asym_roots) {
    double top = std::max(spec.lambda_max, 1.0);
    for (double r : asym_roots) {
        top = std::max(top, r);
    }
    const double lo = std::clamp(spec.lambda_min / 10.0, 1e-6, 1e8);
    const double hi = std::clamp(10.0 * top, 1e-6, 1e8);
    return {lo, std::max(lo, hi)};
}

} // namespace etafit
