#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <string>
#include <variant>

namespace etafit {

using Points = Eigen::MatrixXd; // one point per row

enum class KernelFamily { Exponential, Matern, Gaussian };

struct CorrelationKernel {
    KernelFamily family = KernelFamily::Exponential;
    double alpha = 0.1;           // decorrelation scale
    double nu = 0.5;              // Matern smoothness, ignored otherwise
    double taper_threshold = 0.0; // values <= threshold become 0; 0 disables

    static CorrelationKernel exponential(double alpha, double taper = 0.0);
    static CorrelationKernel matern(double alpha, double nu, double taper = 0.0);
    static CorrelationKernel gaussian(double alpha, double taper = 0.0);

    void validate() const;
    std::string describe() const;
};

// Matern smoothness at or above this value is evaluated with the Gaussian kernel.
inline constexpr double kMaternGaussianCutoff = 25.0;

// Untapered Matern correlation at scaled distance r = d / alpha, evaluated
// without the Gaussian substitution. Half-integer nu uses the closed form.
double matern_correlation(double nu, double r);

double kernel_value_untapered(const CorrelationKernel& kernel, double distance);
double kernel_value(const CorrelationKernel& kernel, double distance);

// Distance beyond which the tapered kernel is zero (infinity when untapered).
double taper_radius(const CorrelationKernel& kernel);

enum class MatrixStorage { Dense, Sparse };

class CorrelationMatrix {
public:
    using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

    explicit CorrelationMatrix(Eigen::MatrixXd dense, long duplicate_pairs = 0);
    explicit CorrelationMatrix(SparseMatrix sparse, long duplicate_pairs = 0);

    MatrixStorage storage() const;
    bool is_sparse() const { return storage() == MatrixStorage::Sparse; }
    Eigen::Index size() const;

    const Eigen::MatrixXd& dense() const;
    const SparseMatrix& sparse() const;
    Eigen::MatrixXd to_dense() const;

    double entry(Eigen::Index i, Eigen::Index j) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& v) const;

    // Fraction of stored non-zero entries.
    double density() const;
    double frobenius_norm_squared() const;
    // Pairs of coincident points; these break strict positive definiteness.
    long duplicate_pairs() const { return duplicate_pairs_; }

private:
    std::variant<Eigen::MatrixXd, SparseMatrix> data_;
    long duplicate_pairs_ = 0;
};

using CorrelationMatrixPtr = std::shared_ptr<const CorrelationMatrix>;

CorrelationMatrix correlation_matrix(const Points& points, const CorrelationKernel& kernel);

inline CorrelationMatrixPtr make_correlation(const Points& points, const CorrelationKernel& kernel) {
    return std::make_shared<const CorrelationMatrix>(correlation_matrix(points, kernel));
}

} // namespace etafit
