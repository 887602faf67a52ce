#include "etafit/core_algebra.hpp"
#include "etafit/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace etafit {

HyperParams HyperParams::from_ratio(double sigma2, double eta) {
    if (!(sigma2 >= 0.0) || !(eta >= 0.0) || !std::isfinite(eta)) {
        throw InputError("from_ratio needs sigma2 >= 0 and finite eta >= 0");
    }
    return {sigma2, eta * sigma2, eta};
}

HyperParams HyperParams::noise_only(double sigma02) {
    return {0.0, sigma02, std::numeric_limits<double>::infinity()};
}

HyperParams HyperParams::error_only(double sigma2) {
    return {sigma2, 0.0, 0.0};
}

double HyperParams::sigma() const { return std::sqrt(sigma2); }
double HyperParams::sigma0() const { return std::sqrt(sigma02); }

GpModel::GpModel(Eigen::VectorXd z, DesignMatrix design, CorrelationMatrixPtr K)
    : z_(std::move(z)), design_(std::move(design)), K_(std::move(K)) {
    if (!K_) {
        throw InputError("model needs a correlation matrix");
    }
    if (z_.size() != design_.n() || z_.size() != K_->size()) {
        std::ostringstream os;
        os << "inconsistent model sizes: len(z)=" << z_.size() << ", rows(X)=" << design_.n()
           << ", size(K)=" << K_->size();
        throw InputError(os.str());
    }
    if (!z_.allFinite()) {
        throw InputError("observations must be finite");
    }
    check_full_rank(design_);

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(design_.X);
    U_ = qr.householderQ() * Eigen::MatrixXd::Identity(n(), m());
    const Eigen::VectorXd r = qr.matrixQR().diagonal();
    log_det_xtx_ = 2.0 * r.array().abs().log().sum();

    const Eigen::VectorXd qz = project_out(z_);
    zqz_ = compensated_dot(qz, qz);
    degenerate_ = qz.norm() <= 1e-12 * z_.norm() || z_.norm() == 0.0;
}

Eigen::VectorXd GpModel::project_out(const Eigen::VectorXd& v) const {
    return v - U_ * (U_.transpose() * v);
}

SolverOptions default_solver_options(const CorrelationMatrix& K) {
    SolverOptions options;
    options.method = K.is_sparse() ? SolverMethod::ConjugateGradient : SolverMethod::DenseCholesky;
    return options;
}

Solver::Solver(CorrelationMatrixPtr K, SolverOptions options) : K_(std::move(K)), options_(options) {
    if (!K_) {
        throw InputError("solver needs a correlation matrix");
    }
    const bool sparse_method = options_.method != SolverMethod::DenseCholesky;
    if (sparse_method && !K_->is_sparse()) {
        throw InputError("sparse solver methods need sparse storage");
    }
    if (!sparse_method && K_->is_sparse()) {
        throw InputError("dense Cholesky needs dense storage");
    }
    if (!(options_.cg_tol > 0.0)) {
        throw InputError("CG tolerance must be positive");
    }
    if (K_->is_sparse()) {
        const SparseMatrix& S = K_->sparse();
        diagonal_slots_.assign(static_cast<std::size_t>(S.cols()), -1);
        for (Eigen::Index j = 0; j < S.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(S, j); it; ++it) {
                if (it.row() == j) {
                    diagonal_slots_[static_cast<std::size_t>(j)] = &it.value() - S.valuePtr();
                }
            }
        }
        shifted_ = S;
        for (Eigen::Index slot : diagonal_slots_) {
            if (slot < 0) {
                throw InputError("sparse correlation matrix must store its diagonal");
            }
        }
    }
}

Solver::Solver(CorrelationMatrixPtr K) : Solver(K, default_solver_options(*K)) {}

double Solver::jitter_amount() const {
    return std::max(1e-10, static_cast<double>(size()) * std::numeric_limits<double>::epsilon());
}

Solver::DenseFactor& Solver::dense_factor(double eta) {
    for (auto it = dense_cache_.begin(); it != dense_cache_.end(); ++it) {
        if (it->eta == eta) {
            dense_cache_.splice(dense_cache_.begin(), dense_cache_, it);
            return dense_cache_.front();
        }
    }
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw InputError("eta must be finite and non-negative");
    }
    Eigen::MatrixXd A = K_->dense();
    A.diagonal().array() += eta;
    DenseFactor factor{eta, Eigen::LLT<Eigen::MatrixXd>(A)};
    ++factorizations_;
    if (factor.llt.info() != Eigen::Success) {
        const double jitter = jitter_amount();
        A.diagonal().array() += jitter;
        factor.llt.compute(A);
        ++factorizations_;
        if (factor.llt.info() != Eigen::Success) {
            std::ostringstream os;
            os << "Cholesky of K + eta I failed at eta=" << eta << " even with jitter " << jitter;
            throw NumericError(os.str());
        }
        jitter_ = std::max(jitter_, jitter);
    }
    dense_cache_.push_front(std::move(factor));
    while (dense_cache_.size() > 2) {
        dense_cache_.pop_back();
    }
    return dense_cache_.front();
}

const Solver::SparseMatrix& Solver::shifted_sparse(double eta) {
    if (!(shifted_eta_ == eta)) {
        const SparseMatrix& S = K_->sparse();
        std::copy(S.valuePtr(), S.valuePtr() + S.nonZeros(), shifted_.valuePtr());
        for (Eigen::Index slot : diagonal_slots_) {
            shifted_.valuePtr()[slot] += eta;
        }
        shifted_eta_ = eta;
    }
    return shifted_;
}

Eigen::SimplicialLLT<Solver::SparseMatrix>& Solver::sparse_factor(double eta) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw InputError("eta must be finite and non-negative");
    }
    if (sparse_llt_ && sparse_llt_eta_ == eta) {
        return *sparse_llt_;
    }
    if (!sparse_llt_) {
        sparse_llt_ = std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>();
    }
    if (!pattern_analyzed_) {
        sparse_llt_->analyzePattern(K_->sparse());
        pattern_analyzed_ = true;
    }
    sparse_llt_->factorize(shifted_sparse(eta));
    ++factorizations_;
    if (sparse_llt_->info() != Eigen::Success) {
        const double jitter = jitter_amount();
        sparse_llt_->factorize(shifted_sparse(eta + jitter));
        ++factorizations_;
        if (sparse_llt_->info() != Eigen::Success) {
            sparse_llt_eta_ = std::numeric_limits<double>::quiet_NaN();
            std::ostringstream os;
            os << "sparse Cholesky of K + eta I failed at eta=" << eta << " even with jitter " << jitter;
            throw NumericError(os.str());
        }
        jitter_ = std::max(jitter_, jitter);
    }
    sparse_llt_eta_ = eta;
    return *sparse_llt_;
}

Eigen::MatrixXd Solver::solve(double eta, const Eigen::MatrixXd& B) {
    if (B.rows() != size()) {
        throw InputError("right-hand side has the wrong number of rows");
    }
    switch (options_.method) {
    case SolverMethod::DenseCholesky:
        return dense_factor(eta).llt.solve(B);
    case SolverMethod::SparseCholesky:
        return sparse_factor(eta).solve(B);
    case SolverMethod::ConjugateGradient: {
        if (!(eta >= 0.0) || !std::isfinite(eta)) {
            throw InputError("eta must be finite and non-negative");
        }
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(options_.cg_tol);
        const int max_iter = options_.cg_max_iter > 0 ? options_.cg_max_iter : static_cast<int>(10 * size());
        cg.setMaxIterations(max_iter);
        const SparseMatrix& A = shifted_sparse(eta);
        cg.compute(A);
        Eigen::MatrixXd X(B.rows(), B.cols());
        for (Eigen::Index c = 0; c < B.cols(); ++c) {
            const Eigen::VectorXd b = B.col(c);
            const double bnorm = b.norm();
            if (bnorm == 0.0) {
                X.col(c).setZero();
                continue;
            }
            Eigen::VectorXd x = cg.solve(b);
            cg_iterations_ += cg.iterations();
            const double residual = (A * x - b).norm() / bnorm;
            if (cg.info() != Eigen::Success || !(residual <= 10.0 * options_.cg_tol)) {
                std::ostringstream os;
                os << "conjugate gradients did not converge at eta=" << eta << " (relative residual "
                   << residual << " after " << cg.iterations() << " iterations)";
                throw SolverError(os.str(), residual, static_cast<int>(cg.iterations()));
            }
            X.col(c) = x;
        }
        return X;
    }
    }
    throw InputError("unknown solver method");
}

Eigen::VectorXd Solver::solve(double eta, const Eigen::VectorXd& b) {
    return solve(eta, Eigen::MatrixXd(b)).col(0);
}

double Solver::log_det(double eta) {
    if (options_.method == SolverMethod::DenseCholesky) {
        const auto& llt = dense_factor(eta).llt;
        return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    const auto& llt = sparse_factor(eta);
    return 2.0 * llt.matrixL().nestedExpression().diagonal().array().log().sum();
}

double Solver::trace_inverse_cholesky(double eta) {
    if (options_.method == SolverMethod::DenseCholesky) {
        const auto& llt = dense_factor(eta).llt;
        Eigen::MatrixXd Linv = Eigen::MatrixXd::Identity(size(), size());
        llt.matrixL().solveInPlace(Linv);
        return Linv.squaredNorm();
    }
    // Blocks of unit vectors through the sparse factor, O(n) memory per block.
    const auto& llt = sparse_factor(eta);
    const Eigen::Index n = size();
    const Eigen::Index block = 64;
    double total = 0.0;
    for (Eigen::Index start = 0; start < n; start += block) {
        const Eigen::Index width = std::min(block, n - start);
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, width);
        for (Eigen::Index k = 0; k < width; ++k) {
            E(start + k, k) = 1.0;
        }
        Eigen::MatrixXd W = llt.matrixL().solve(E);
        total += W.squaredNorm();
    }
    return total;
}

Eigen::MatrixXd Solver::inverse(double eta) {
    if (options_.method != SolverMethod::DenseCholesky) {
        throw InputError("explicit inverse is only available for dense Cholesky");
    }
    return dense_factor(eta).llt.solve(Eigen::MatrixXd::Identity(size(), size()));
}

ProjectedOperator::ProjectedOperator(const GpModel& model, Solver& solver, double eta)
    : model_(model), solver_(solver), eta_(eta) {
    if (&solver.matrix() != &model.K()) {
        throw InputError("solver was built for a different correlation matrix");
    }
    Y_ = solver_.solve(eta, model.X());
    S_ = model.X().transpose() * Y_;
    S_ = 0.5 * (S_ + S_.transpose()).eval();
    S_llt_.compute(S_);
    if (S_llt_.info() != Eigen::Success || !S_.allFinite()) {
        throw ModelError("X^T K_eta^-1 X is singular at eta=" + std::to_string(eta));
    }
    const Eigen::VectorXd d = S_llt_.matrixLLT().diagonal();
    if (d.minCoeff() <= 1e-14 * d.maxCoeff()) {
        throw ModelError("X^T K_eta^-1 X is numerically singular at eta=" + std::to_string(eta));
    }
}

Eigen::VectorXd ProjectedOperator::apply(const Eigen::VectorXd& v) const {
    const Eigen::VectorXd u = solver_.solve(eta_, v);
    return u - Y_ * S_llt_.solve(Y_.transpose() * v);
}

Eigen::MatrixXd ProjectedOperator::apply(const Eigen::MatrixXd& V) const {
    const Eigen::MatrixXd U = solver_.solve(eta_, V);
    return U - Y_ * S_llt_.solve(Y_.transpose() * V);
}

Eigen::VectorXd ProjectedOperator::coefficients(const Eigen::VectorXd& v) const {
    return S_llt_.solve(Y_.transpose() * v);
}

Eigen::MatrixXd ProjectedOperator::solve_gram(const Eigen::MatrixXd& B) const {
    return S_llt_.solve(B);
}

double ProjectedOperator::log_det_gram() const {
    return 2.0 * S_llt_.matrixLLT().diagonal().array().log().sum();
}

double ProjectedOperator::trace_correction() const {
    const Eigen::MatrixXd YtY = Y_.transpose() * Y_;
    return S_llt_.solve(YtY).trace();
}

Eigen::MatrixXd solve_K_eta(const GpModel& model, double eta, const Eigen::MatrixXd& B, Solver& solver) {
    if (&solver.matrix() != &model.K()) {
        throw InputError("solver was built for a different correlation matrix");
    }
    return solver.solve(eta, B);
}

Eigen::VectorXd m1_apply(const GpModel& model, double eta, Solver& solver) {
    return ProjectedOperator(model, solver, eta).apply(model.z());
}

Eigen::VectorXd beta_gls(const GpModel& model, double eta, Solver& solver) {
    return ProjectedOperator(model, solver, eta).coefficients(model.z());
}

double trace_m1(const GpModel& model, double eta, const TraceProvider& trace_provider, Solver& solver) {
    const ProjectedOperator op(model, solver, eta);
    return trace_provider(eta) - op.trace_correction();
}

double compensated_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw InputError("dot product of vectors with different lengths");
    }
    double sum = 0.0;
    double comp = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double p = a(i) * b(i);
        const double perr = std::fma(a(i), b(i), -p);
        const double t = sum + p;
        if (std::abs(sum) >= std::abs(p)) {
            comp += (sum - t) + p;
        } else {
            comp += (p - t) + sum;
        }
        sum = t;
        comp += perr;
    }
    return sum + comp;
}

} // namespace etafit
