#include "etafit/likelihood.hpp"
#include "etafit/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace etafit {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_nondegenerate(const GpModel& model) {
    if (model.degenerate()) {
        throw ModelError("degenerate model (z lies in range(X)); the variance estimate is trivially zero");
    }
}

double trace_inv_sq_eigen(const Eigen::VectorXd& ev, double eta) {
    const double floor = static_cast<double>(ev.size()) * std::numeric_limits<double>::epsilon() *
                         std::abs(ev.maxCoeff());
    double total = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double d = std::max(ev(i), floor) + eta;
        total += 1.0 / (d * d);
    }
    return total;
}

TraceProvider exact_squared_provider(Solver& solver, const Eigen::VectorXd* eigenvalues, int vectors,
                                     std::uint64_t seed) {
    if (eigenvalues) {
        return [ev = *eigenvalues](double eta) { return trace_inv_sq_eigen(ev, eta); };
    }
    if (solver.options().method == SolverMethod::DenseCholesky) {
        return [&solver](double eta) { return solver.inverse(eta).squaredNorm(); };
    }
    return [&solver, vectors, seed](double eta) {
        auto op = [&](const Eigen::MatrixXd& V) { return solver.solve(eta, solver.solve(eta, V)); };
        return hutchinson_trace(op, solver.size(), vectors, seed).estimate;
    };
}

} // namespace

TraceSource exact_trace_source(Solver& solver, const Eigen::VectorXd* eigenvalues, int hutchinson_vectors,
                               std::uint64_t seed) {
    TraceSource source;
    if (eigenvalues) {
        source.inverse = eigen_trace_provider(*eigenvalues);
    } else if (solver.options().method == SolverMethod::DenseCholesky) {
        source.inverse = cholesky_trace_provider(solver);
    } else {
        source.inverse = hutchinson_trace_provider(solver, hutchinson_vectors, seed);
    }
    source.inverse_squared = exact_squared_provider(solver, eigenvalues, hutchinson_vectors, seed);
    return source;
}

TraceSource interpolated_trace_source(TraceInterpolant interp, Solver& solver, const Eigen::VectorXd* eigenvalues,
                                      int hutchinson_vectors, std::uint64_t seed) {
    TraceSource source;
    source.inverse = interpolant_trace_provider(std::move(interp));
    source.inverse_squared = exact_squared_provider(solver, eigenvalues, hutchinson_vectors, seed);
    source.interpolated = true;
    return source;
}

double sigma2_hat(const GpModel& model, double eta, Solver& solver) {
    require_nondegenerate(model);
    const Eigen::VectorXd w = m1_apply(model, eta, solver);
    const double value = compensated_dot(model.z(), w) / model.dof();
    if (!(value > 0.0)) {
        throw NumericError("non-positive variance estimate at eta=" + std::to_string(eta));
    }
    return value;
}

double log_marginal_likelihood(const GpModel& model, double sigma2, double eta, Solver& solver) {
    require_nondegenerate(model);
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw InputError("sigma2 must be positive and finite");
    }
    const ProjectedOperator op(model, solver, eta);
    const Eigen::VectorXd w = op.apply(model.z());
    const double zMz = compensated_dot(model.z(), w);
    const double dof = model.dof();
    return -0.5 * dof * (kLog2Pi + std::log(sigma2)) - 0.5 * solver.log_det(eta) - 0.5 * op.log_det_gram() -
           0.5 * zMz / sigma2;
}

double log_marginal_likelihood_variances(const GpModel& model, double sigma2, double sigma02, Solver& solver) {
    if (!(sigma2 >= 0.0) || !(sigma02 >= 0.0) || !std::isfinite(sigma2) || !std::isfinite(sigma02)) {
        throw InputError("variances must be finite and non-negative");
    }
    if (sigma2 > 0.0) {
        return log_marginal_likelihood(model, sigma2, sigma02 / sigma2, solver);
    }
    if (sigma02 == 0.0) {
        throw InputError("both variances are zero");
    }
    require_nondegenerate(model);
    const double dof = model.dof();
    return -0.5 * dof * (kLog2Pi + std::log(sigma02)) - 0.5 * model.log_det_xtx() -
           0.5 * model.z_q_norm_squared() / sigma02;
}

double sigma2_error_limit(const GpModel& model, Solver& solver) {
    return sigma2_hat(model, 0.0, solver);
}

double sigma02_noise_limit(const GpModel& model) {
    return model.z_q_norm_squared() / model.dof();
}

double profile_ell_noise_limit(const GpModel& model) {
    require_nondegenerate(model);
    const double dof = model.dof();
    return -0.5 * dof * (kLog2Pi + 1.0 + std::log(sigma02_noise_limit(model))) - 0.5 * model.log_det_xtx();
}

LikelihoodEval profile_ell(const GpModel& model, double eta, Solver& solver, const TraceSource& traces,
                           bool second_derivative, bool with_ell) {
    require_nondegenerate(model);
    const ProjectedOperator op(model, solver, eta);
    const Eigen::VectorXd w = op.apply(model.z());
    const double dof = model.dof();

    LikelihoodEval ev;
    ev.eta = eta;
    ev.zMz = compensated_dot(model.z(), w);
    ev.zM2z = compensated_dot(w, w);
    ev.sigma2_hat = ev.zMz / dof;
    if (!(ev.sigma2_hat > 0.0) || !std::isfinite(ev.sigma2_hat)) {
        std::ostringstream os;
        os << "non-positive variance estimate " << ev.sigma2_hat << " at eta=" << eta;
        throw NumericError(os.str());
    }
    ev.trace_m1 = traces.inverse(eta) - op.trace_correction();
    ev.d_ell = -0.5 * (ev.trace_m1 - dof * ev.zM2z / ev.zMz);

    if (with_ell || solver.options().method != SolverMethod::ConjugateGradient) {
        ev.ell = -0.5 * dof * (kLog2Pi + 1.0 + std::log(ev.sigma2_hat)) - 0.5 * solver.log_det(eta) -
                 0.5 * op.log_det_gram();
    }

    if (second_derivative) {
        if (!traces.inverse_squared) {
            throw InputError("second derivative needs trace((K + eta I)^-2)");
        }
        const Eigen::VectorXd v = op.apply(w);
        ev.zM3z = compensated_dot(w, v);
        // trace(M1^2) = tr(K^-2) - 2 tr(S^-1 Y^T K^-1 Y) + tr((S^-1 Y^T Y)^2)
        const Eigen::MatrixXd KY = solver.solve(eta, op.Y());
        const Eigen::MatrixXd B = op.solve_gram(op.Y().transpose() * op.Y());
        const double cross = op.solve_gram(op.Y().transpose() * KY).trace();
        ev.trace_m1_sq = traces.inverse_squared(eta) - 2.0 * cross + (B * B).trace();
        const double s2 = ev.sigma2_hat;
        ev.d2_ell = 0.5 * *ev.trace_m1_sq - *ev.zM3z / s2 + 0.5 * ev.zM2z * ev.zM2z / (dof * s2 * s2);
    }
    return ev;
}

double d_ell_deta(const GpModel& model, double eta, Solver& solver, const TraceSource& traces) {
    return profile_ell(model, eta, solver, traces, false, false).d_ell;
}

double d2_ell_deta2(const GpModel& model, double eta, Solver& solver, const TraceSource& traces) {
    return *profile_ell(model, eta, solver, traces, true, false).d2_ell;
}

double ell_derivative_generic(const GpModel& model, double sigma2, double eta, const MatrixAction& sigma_dot,
                              int k) {
    if (k != 1 && k != 2) {
        throw InputError("only first and second derivatives are supported");
    }
    if (model.n() > 2000) {
        throw InputError("generic derivative builds M densely; n must not exceed 2000");
    }
    if (!(sigma2 > 0.0) || !(eta >= 0.0)) {
        throw InputError("generic derivative needs sigma2 > 0 and eta >= 0");
    }
    const Eigen::Index n = model.n();
    Eigen::MatrixXd Sigma = model.K().to_dense();
    Sigma.diagonal().array() += eta;
    Sigma *= sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
    if (llt.info() != Eigen::Success) {
        throw NumericError("covariance matrix is not positive definite");
    }
    const Eigen::MatrixXd Sinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd SX = Sinv * model.X();
    const Eigen::MatrixXd A = model.X().transpose() * SX;
    Eigen::MatrixXd M = Sinv - SX * A.llt().solve(SX.transpose());
    M = 0.5 * (M + M.transpose()).eval();

    const Eigen::MatrixXd D = sigma_dot(M);
    const Eigen::VectorXd Mz = M * model.z();
    const Eigen::VectorXd b = sigma_dot(Eigen::MatrixXd(Mz)).col(0);
    if (k == 1) {
        return -0.5 * D.trace() + 0.5 * Mz.dot(b);
    }
    const double trace_dd = (D.array() * D.transpose().array()).sum();
    return 0.5 * (trace_dd - 2.0 * b.dot(M * b));
}

ProfileEvaluator::ProfileEvaluator(const GpModel& model, Solver& solver, TraceSource traces)
    : model_(model), solver_(solver), traces_(std::move(traces)) {}

const LikelihoodEval& ProfileEvaluator::evaluate(double eta, bool need_ell) {
    auto it = cache_.find(eta);
    if (it != cache_.end()) {
        if (need_ell && !it->second.ell) {
            it->second = profile_ell(model_, eta, solver_, traces_, it->second.d2_ell.has_value(), true);
        }
        return it->second;
    }
    LikelihoodEval ev = profile_ell(model_, eta, solver_, traces_, false, need_ell);
    ++evaluations_;
    if (observer_) {
        observer_(eta);
    }
    return cache_.emplace(eta, std::move(ev)).first->second;
}

const LikelihoodEval& ProfileEvaluator::evaluate_second(double eta) {
    const LikelihoodEval& first = evaluate(eta, true);
    if (first.d2_ell) {
        return first;
    }
    LikelihoodEval full = profile_ell(model_, eta, solver_, traces_, true, true);
    auto& slot = cache_[eta];
    slot = std::move(full);
    return slot;
}

} // namespace etafit
