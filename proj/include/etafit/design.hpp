#pragma once

#include "etafit/kernels.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace etafit {

enum class BasisFamily { Polynomial, Trigonometric, Tabulated };

struct BasisSpec {
    BasisFamily family = BasisFamily::Polynomial;
    int order = 0; // polynomial degree q

    static BasisSpec polynomial(int q) { return {BasisFamily::Polynomial, q}; }
    static BasisSpec trigonometric() { return {BasisFamily::Trigonometric, 0}; }

    // "poly:q" or "trig".
    static BasisSpec parse(const std::string& text);
    std::string name() const;
};

// Number of monomials of total degree <= q in d variables.
int polynomial_basis_count(int q, int d);

struct DesignMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> column_names;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index m() const { return X.cols(); }
};

// Monomials in graded-lex order: 1, x1, x2, x1^2, x1 x2, x2^2, ...
DesignMatrix build_design(const Points& points, const BasisSpec& spec);

// Wraps a user-provided matrix; applies the same shape and rank checks.
DesignMatrix design_from_table(Eigen::MatrixXd X, std::vector<std::string> names = {});

// Throws ModelError naming the dependent columns when rank(X) < m, InputError when n <= m.
void check_full_rank(const DesignMatrix& design);

} // namespace etafit
