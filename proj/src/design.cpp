#include "etafit/design.hpp"
#include "etafit/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

namespace etafit {

namespace {

// Exponent vectors of total degree k, x1 power descending first.
void exponents_of_degree(int k, int d, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    const int var = static_cast<int>(current.size());
    if (var == d - 1) {
        current.push_back(k);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int e = k; e >= 0; --e) {
        current.push_back(e);
        exponents_of_degree(k - e, d, current, out);
        current.pop_back();
    }
}

std::string monomial_name(const std::vector<int>& exps) {
    std::ostringstream os;
    bool any = false;
    for (std::size_t v = 0; v < exps.size(); ++v) {
        if (exps[v] == 0) {
            continue;
        }
        if (any) {
            os << "*";
        }
        os << "x" << (v + 1);
        if (exps[v] > 1) {
            os << "^" << exps[v];
        }
        any = true;
    }
    return any ? os.str() : "1";
}

} // namespace

BasisSpec BasisSpec::parse(const std::string& text) {
    if (text == "trig" || text == "trigonometric") {
        return trigonometric();
    }
    const std::string prefix = "poly:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string rest = text.substr(prefix.size());
        std::size_t used = 0;
        int q = -1;
        try {
            q = std::stoi(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != rest.size() || rest.empty() || q < 0) {
            throw InputError("invalid polynomial order in basis '" + text + "'");
        }
        return polynomial(q);
    }
    throw InputError("unknown basis '" + text + "' (expected poly:q or trig)");
}

std::string BasisSpec::name() const {
    switch (family) {
    case BasisFamily::Polynomial: return "poly:" + std::to_string(order);
    case BasisFamily::Trigonometric: return "trig";
    case BasisFamily::Tabulated: return "table";
    }
    return "unknown";
}

int polynomial_basis_count(int q, int d) {
    if (q < 0 || d < 1) {
        throw InputError("polynomial basis needs q >= 0 and d >= 1");
    }
    // binomial(q + d, d)
    double count = 1.0;
    for (int i = 1; i <= d; ++i) {
        count = count * (q + i) / i;
    }
    return static_cast<int>(std::lround(count));
}

DesignMatrix build_design(const Points& points, const BasisSpec& spec) {
    const Eigen::Index n = points.rows();
    const int d = static_cast<int>(points.cols());
    if (n == 0 || d == 0) {
        throw InputError("design matrix needs at least one point and one coordinate");
    }
    if (!points.allFinite()) {
        throw InputError("points must be finite");
    }

    DesignMatrix design;
    if (spec.family == BasisFamily::Polynomial) {
        if (spec.order < 0) {
            throw InputError("polynomial order must be non-negative");
        }
        std::vector<std::vector<int>> exps;
        for (int k = 0; k <= spec.order; ++k) {
            std::vector<int> current;
            exponents_of_degree(k, d, current, exps);
        }
        design.X.resize(n, static_cast<Eigen::Index>(exps.size()));
        for (std::size_t c = 0; c < exps.size(); ++c) {
            Eigen::VectorXd col = Eigen::VectorXd::Ones(n);
            for (int v = 0; v < d; ++v) {
                for (int e = 0; e < exps[c][v]; ++e) {
                    col.array() *= points.col(v).array();
                }
            }
            design.X.col(static_cast<Eigen::Index>(c)) = col;
            design.column_names.push_back(monomial_name(exps[c]));
        }
    } else if (spec.family == BasisFamily::Trigonometric) {
        design.X.resize(n, 2 * d);
        for (int v = 0; v < d; ++v) {
            const Eigen::ArrayXd arg = std::numbers::pi * points.col(v).array();
            design.X.col(2 * v) = arg.sin().matrix();
            design.X.col(2 * v + 1) = arg.cos().matrix();
            design.column_names.push_back("sin(pi*x" + std::to_string(v + 1) + ")");
            design.column_names.push_back("cos(pi*x" + std::to_string(v + 1) + ")");
        }
    } else {
        throw InputError("tabulated bases are ingested with design_from_table");
    }
    check_full_rank(design);
    return design;
}

DesignMatrix design_from_table(Eigen::MatrixXd X, std::vector<std::string> names) {
    if (!X.allFinite()) {
        throw InputError("design table must be finite");
    }
    if (names.empty()) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            names.push_back("col" + std::to_string(c + 1));
        }
    }
    if (static_cast<Eigen::Index>(names.size()) != X.cols()) {
        throw InputError("design table column names do not match column count");
    }
    DesignMatrix design{std::move(X), std::move(names)};
    check_full_rank(design);
    return design;
}

void check_full_rank(const DesignMatrix& design) {
    const Eigen::Index n = design.n();
    const Eigen::Index m = design.m();
    if (m < 1) {
        throw InputError("design matrix has no columns");
    }
    if (n <= m) {
        throw InputError("design matrix needs more rows than columns (n=" + std::to_string(n) +
                         ", m=" + std::to_string(m) + ")");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(design.X);
    const Eigen::VectorXd& s = svd.singularValues();
    const double tol = static_cast<double>(n) * s(0) * 1e-12;
    if (s(m - 1) > tol) {
        return;
    }
    // Column pivoting puts the dependent columns last; name them.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    std::ostringstream os;
    os << "design matrix is rank deficient (rank " << rank << " < m=" << m << "); dependent basis:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = std::min(rank, m - 1); k < m; ++k) {
        os << " " << design.column_names[static_cast<std::size_t>(perm(k))];
    }
    throw ModelError(os.str());
}

} // namespace etafit
