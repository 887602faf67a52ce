#include "etafit/kernels.hpp"
#include "etafit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace etafit {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

bool half_integer(double nu, int& p) {
    const double shifted = nu - 0.5;
    const double rounded = std::round(shifted);
    if (rounded < 0.0 || rounded > 40.0 || std::abs(shifted - rounded) > 1e-12) {
        return false;
    }
    p = static_cast<int>(rounded);
    return true;
}

// exp(-x) * p!/(2p)! * sum_k (p+k)!/(k!(p-k)!) (2x)^(p-k)
double matern_half_integer(int p, double x) {
    const double scale = std::lgamma(p + 1.0) - std::lgamma(2.0 * p + 1.0);
    double sum = 0.0;
    for (int k = 0; k <= p; ++k) {
        const double log_coeff = std::lgamma(p + k + 1.0) - std::lgamma(k + 1.0) - std::lgamma(p - k + 1.0);
        sum += std::exp(log_coeff + scale) * std::pow(2.0 * x, p - k);
    }
    return std::exp(-x) * sum;
}

double gaussian_value(double alpha, double d) {
    const double r = d / alpha;
    return std::exp(-0.5 * r * r);
}

} // namespace

CorrelationKernel CorrelationKernel::exponential(double alpha, double taper) {
    return {KernelFamily::Exponential, alpha, 0.5, taper};
}

CorrelationKernel CorrelationKernel::matern(double alpha, double nu, double taper) {
    return {KernelFamily::Matern, alpha, nu, taper};
}

CorrelationKernel CorrelationKernel::gaussian(double alpha, double taper) {
    return {KernelFamily::Gaussian, alpha, 0.0, taper};
}

void CorrelationKernel::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw InputError("kernel scale alpha must be positive and finite");
    }
    if (family == KernelFamily::Matern && (!(nu > 0.0) || !std::isfinite(nu))) {
        throw InputError("Matern smoothness nu must be positive and finite");
    }
    if (!(taper_threshold >= 0.0 && taper_threshold < 1.0)) {
        throw InputError("taper threshold must lie in [0, 1)");
    }
}

std::string CorrelationKernel::describe() const {
    std::ostringstream os;
    switch (family) {
    case KernelFamily::Exponential: os << "exp:" << alpha; break;
    case KernelFamily::Matern: os << "matern:" << alpha << ":" << nu; break;
    case KernelFamily::Gaussian: os << "gauss:" << alpha; break;
    }
    if (taper_threshold > 0.0) {
        os << " taper:" << taper_threshold;
    }
    return os.str();
}

double matern_correlation(double nu, double r) {
    if (r == 0.0) {
        return 1.0;
    }
    const double x = std::sqrt(2.0 * nu) * r;
    int p = 0;
    if (half_integer(nu, p)) {
        return matern_half_integer(p, x);
    }
    if (x > 700.0) {
        return 0.0;
    }
    const double bessel = std::cyl_bessel_k(nu, x);
    if (bessel == 0.0) {
        return 0.0;
    }
    if (!std::isfinite(bessel)) {
        // Small-argument expansion of the normalized Matern function.
        return nu > 1.0 ? 1.0 - x * x / (4.0 * (nu - 1.0)) : 1.0;
    }
    const double log_value = (1.0 - nu) * kLn2 - std::lgamma(nu) + nu * std::log(x) + std::log(bessel);
    return std::min(1.0, std::exp(log_value));
}

double kernel_value_untapered(const CorrelationKernel& kernel, double distance) {
    if (!std::isfinite(distance) || distance < 0.0) {
        throw InputError("kernel distance must be finite and non-negative");
    }
    if (distance == 0.0) {
        return 1.0;
    }
    switch (kernel.family) {
    case KernelFamily::Exponential:
        return std::exp(-distance / kernel.alpha);
    case KernelFamily::Gaussian:
        return gaussian_value(kernel.alpha, distance);
    case KernelFamily::Matern: {
        if (kernel.nu >= kMaternGaussianCutoff) {
            return gaussian_value(kernel.alpha, distance);
        }
        const double value = matern_correlation(kernel.nu, distance / kernel.alpha);
        return std::isfinite(value) ? value : gaussian_value(kernel.alpha, distance);
    }
    }
    return 0.0;
}

double kernel_value(const CorrelationKernel& kernel, double distance) {
    const double value = kernel_value_untapered(kernel, distance);
    if (kernel.taper_threshold > 0.0 && value <= kernel.taper_threshold) {
        return 0.0;
    }
    return value;
}

double taper_radius(const CorrelationKernel& kernel) {
    if (kernel.taper_threshold <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    double hi = kernel.alpha;
    while (kernel_value_untapered(kernel, hi) > kernel.taper_threshold) {
        hi *= 2.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kernel_value_untapered(kernel, mid) > kernel.taper_threshold) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi * (1.0 + 1e-12);
}

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd dense, long duplicate_pairs)
    : data_(std::move(dense)), duplicate_pairs_(duplicate_pairs) {}

CorrelationMatrix::CorrelationMatrix(SparseMatrix sparse, long duplicate_pairs)
    : data_(std::move(sparse)), duplicate_pairs_(duplicate_pairs) {
    std::get<SparseMatrix>(data_).makeCompressed();
}

MatrixStorage CorrelationMatrix::storage() const {
    return std::holds_alternative<SparseMatrix>(data_) ? MatrixStorage::Sparse : MatrixStorage::Dense;
}

Eigen::Index CorrelationMatrix::size() const {
    return is_sparse() ? sparse().rows() : dense().rows();
}

const Eigen::MatrixXd& CorrelationMatrix::dense() const {
    if (is_sparse()) {
        throw InputError("correlation matrix is stored sparse");
    }
    return std::get<Eigen::MatrixXd>(data_);
}

const CorrelationMatrix::SparseMatrix& CorrelationMatrix::sparse() const {
    if (!is_sparse()) {
        throw InputError("correlation matrix is stored dense");
    }
    return std::get<SparseMatrix>(data_);
}

Eigen::MatrixXd CorrelationMatrix::to_dense() const {
    return is_sparse() ? Eigen::MatrixXd(sparse()) : dense();
}

double CorrelationMatrix::entry(Eigen::Index i, Eigen::Index j) const {
    return is_sparse() ? sparse().coeff(i, j) : dense()(i, j);
}

Eigen::VectorXd CorrelationMatrix::apply(const Eigen::VectorXd& v) const {
    if (is_sparse()) {
        return sparse() * v;
    }
    return dense() * v;
}

Eigen::MatrixXd CorrelationMatrix::apply(const Eigen::MatrixXd& v) const {
    if (is_sparse()) {
        return sparse() * v;
    }
    return dense() * v;
}

double CorrelationMatrix::density() const {
    const double total = static_cast<double>(size()) * static_cast<double>(size());
    if (is_sparse()) {
        return static_cast<double>(sparse().nonZeros()) / total;
    }
    return static_cast<double>((dense().array() != 0.0).count()) / total;
}

double CorrelationMatrix::frobenius_norm_squared() const {
    return is_sparse() ? sparse().squaredNorm() : dense().squaredNorm();
}

CorrelationMatrix correlation_matrix(const Points& points, const CorrelationKernel& kernel) {
    kernel.validate();
    const Eigen::Index n = points.rows();
    if (n < 1) {
        throw InputError("correlation matrix needs at least one point");
    }
    if (!points.allFinite()) {
        throw InputError("points must be finite");
    }

    auto distance = [&](Eigen::Index i, Eigen::Index j) { return (points.row(i) - points.row(j)).norm(); };

    long duplicates = 0;
    if (kernel.taper_threshold <= 0.0) {
        int p = 0;
        const bool expensive = kernel.family == KernelFamily::Matern && kernel.nu < kMaternGaussianCutoff &&
                               !half_integer(kernel.nu, p);
        // Bessel evaluations dominate on gridded data; memoize by exact distance.
        std::unordered_map<double, double> cache;
        constexpr std::size_t kCacheLimit = std::size_t{1} << 20;

        Eigen::MatrixXd K(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            K(j, j) = 1.0;
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const double d = distance(i, j);
                if (d == 0.0) {
                    ++duplicates;
                }
                double value;
                if (expensive) {
                    auto it = cache.find(d);
                    if (it != cache.end()) {
                        value = it->second;
                    } else {
                        value = kernel_value(kernel, d);
                        if (cache.size() < kCacheLimit) {
                            cache.emplace(d, value);
                        }
                    }
                } else {
                    value = kernel_value(kernel, d);
                }
                K(i, j) = value;
                K(j, i) = value;
            }
        }
        return CorrelationMatrix(std::move(K), duplicates);
    }

    // Tapered: sweep points sorted by first coordinate, stop once the
    // coordinate gap alone exceeds the taper radius.
    const double radius = taper_radius(kernel);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return points(a, 0) < points(b, 0);
    });

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 8);
    for (Eigen::Index i = 0; i < n; ++i) {
        triplets.emplace_back(i, i, 1.0);
    }
    for (std::size_t a = 0; a < order.size(); ++a) {
        const Eigen::Index i = order[a];
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            const Eigen::Index j = order[b];
            if (points(j, 0) - points(i, 0) > radius) {
                break;
            }
            const double d = distance(i, j);
            if (d == 0.0) {
                ++duplicates;
            }
            if (d > radius) {
                continue;
            }
            const double value = kernel_value(kernel, d);
            if (value != 0.0) {
                triplets.emplace_back(i, j, value);
                triplets.emplace_back(j, i, value);
            }
        }
    }
    CorrelationMatrix::SparseMatrix K(n, n);
    K.setFromTriplets(triplets.begin(), triplets.end());
    return CorrelationMatrix(std::move(K), duplicates);
}

} // namespace etafit
