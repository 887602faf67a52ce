#pragma once

#include "etafit/design.hpp"
#include "etafit/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <functional>
#include <limits>
#include <list>
#include <memory>

namespace etafit {

// Variances of the correlated residual (sigma2) and the nugget (sigma02),
// with eta = sigma02 / sigma2.
struct HyperParams {
    double sigma2 = 0.0;
    double sigma02 = 0.0;
    double eta = 0.0;

    static HyperParams from_ratio(double sigma2, double eta);
    static HyperParams noise_only(double sigma02);
    static HyperParams error_only(double sigma2);

    double sigma() const;
    double sigma0() const;
};

class GpModel {
public:
    GpModel(Eigen::VectorXd z, DesignMatrix design, CorrelationMatrixPtr K);

    const Eigen::VectorXd& z() const { return z_; }
    const Eigen::MatrixXd& X() const { return design_.X; }
    const DesignMatrix& design() const { return design_; }
    const CorrelationMatrix& K() const { return *K_; }
    const CorrelationMatrixPtr& K_ptr() const { return K_; }

    Eigen::Index n() const { return z_.size(); }
    Eigen::Index m() const { return design_.m(); }
    double dof() const { return static_cast<double>(n() - m()); }

    // z lies in range(X): every M action on z vanishes.
    bool degenerate() const { return degenerate_; }

    // Orthonormal basis U of range(X); Q = I - U U^T.
    const Eigen::MatrixXd& range_basis() const { return U_; }
    Eigen::VectorXd project_out(const Eigen::VectorXd& v) const;
    double z_q_norm_squared() const { return zqz_; }
    double log_det_xtx() const { return log_det_xtx_; }

private:
    Eigen::VectorXd z_;
    DesignMatrix design_;
    CorrelationMatrixPtr K_;
    Eigen::MatrixXd U_;
    double zqz_ = 0.0;
    double log_det_xtx_ = 0.0;
    bool degenerate_ = false;
};

enum class SolverMethod { DenseCholesky, SparseCholesky, ConjugateGradient };

struct SolverOptions {
    SolverMethod method = SolverMethod::DenseCholesky;
    double cg_tol = 1e-10;
    int cg_max_iter = 0; // 0 means 10 n
};

// Dense Cholesky for dense storage, conjugate gradients for sparse storage.
SolverOptions default_solver_options(const CorrelationMatrix& K);

// Solves with K_eta = K + eta I. Factorizations are cached per distinct eta
// (two most recent values), symbolic sparse analysis once per solver.
class Solver {
public:
    explicit Solver(CorrelationMatrixPtr K, SolverOptions options);
    explicit Solver(CorrelationMatrixPtr K);

    Eigen::MatrixXd solve(double eta, const Eigen::MatrixXd& B);
    Eigen::VectorXd solve(double eta, const Eigen::VectorXd& b);

    // log |K + eta I|
    double log_det(double eta);
    // trace((K + eta I)^-1) as the squared Frobenius norm of the inverse Cholesky factor.
    double trace_inverse_cholesky(double eta);
    // Explicit (K + eta I)^-1, dense storage only.
    Eigen::MatrixXd inverse(double eta);

    const CorrelationMatrix& matrix() const { return *K_; }
    const SolverOptions& options() const { return options_; }
    Eigen::Index size() const { return K_->size(); }

    int factorizations() const { return factorizations_; }
    long cg_iterations() const { return cg_iterations_; }
    // Largest diagonal jitter that had to be added, 0 if none.
    double jitter() const { return jitter_; }
    double jitter_amount() const;

private:
    struct DenseFactor {
        double eta;
        Eigen::LLT<Eigen::MatrixXd> llt;
    };
    using SparseMatrix = CorrelationMatrix::SparseMatrix;

    DenseFactor& dense_factor(double eta);
    Eigen::SimplicialLLT<SparseMatrix>& sparse_factor(double eta);
    const SparseMatrix& shifted_sparse(double eta);

    CorrelationMatrixPtr K_;
    SolverOptions options_;
    std::list<DenseFactor> dense_cache_;
    std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>> sparse_llt_;
    double sparse_llt_eta_ = std::numeric_limits<double>::quiet_NaN();
    bool pattern_analyzed_ = false;
    SparseMatrix shifted_;
    double shifted_eta_ = std::numeric_limits<double>::quiet_NaN();
    std::vector<Eigen::Index> diagonal_slots_;
    int factorizations_ = 0;
    long cg_iterations_ = 0;
    double jitter_ = 0.0;
};

// Action of M_{1,eta} = K_eta^-1 - K_eta^-1 X (X^T K_eta^-1 X)^-1 X^T K_eta^-1.
// Holds Y = K_eta^-1 X and the m x m Gram factor for one eta.
class ProjectedOperator {
public:
    ProjectedOperator(const GpModel& model, Solver& solver, double eta);

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& V) const;
    // (X^T Y)^-1 Y^T v
    Eigen::VectorXd coefficients(const Eigen::VectorXd& v) const;
    // (X^T Y)^-1 B
    Eigen::MatrixXd solve_gram(const Eigen::MatrixXd& B) const;

    double eta() const { return eta_; }
    const Eigen::MatrixXd& Y() const { return Y_; }
    const Eigen::MatrixXd& gram() const { return S_; }
    double log_det_gram() const;
    // trace((X^T Y)^-1 Y^T Y)
    double trace_correction() const;

private:
    const GpModel& model_;
    Solver& solver_;
    double eta_;
    Eigen::MatrixXd Y_;
    Eigen::MatrixXd S_;
    Eigen::LLT<Eigen::MatrixXd> S_llt_;
};

using TraceProvider = std::function<double(double eta)>;

Eigen::MatrixXd solve_K_eta(const GpModel& model, double eta, const Eigen::MatrixXd& B, Solver& solver);
Eigen::VectorXd m1_apply(const GpModel& model, double eta, Solver& solver);
Eigen::VectorXd beta_gls(const GpModel& model, double eta, Solver& solver);
double trace_m1(const GpModel& model, double eta, const TraceProvider& trace_provider, Solver& solver);

// Dot product with Neumaier-compensated accumulation.
double compensated_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

} // namespace etafit
