#include "doctest.h"

#include "etafit/design.hpp"
#include "etafit/errors.hpp"

#include <cmath>
#include <numbers>

using namespace etafit;

TEST_CASE("polynomial basis counts") {
    CHECK(polynomial_basis_count(0, 2) == 1);
    CHECK(polynomial_basis_count(1, 2) == 3);
    CHECK(polynomial_basis_count(2, 2) == 6);
    CHECK(polynomial_basis_count(5, 2) == 21);
    CHECK(polynomial_basis_count(3, 3) == 20);
}

TEST_CASE("monomials in graded order") {
    Points p(8, 2);
    for (int i = 0; i < 8; ++i) p.row(i) << 0.1 * i, 0.05 * i * i;
    p.row(0) << 2.0, 3.0;
    const auto d = build_design(p, BasisSpec::polynomial(2));
    REQUIRE(d.m() == 6);
    const double expect[] = {1.0, 2.0, 3.0, 4.0, 6.0, 9.0};
    for (int j = 0; j < 6; ++j) CHECK(d.X(0, j) == expect[j]);
}

TEST_CASE("trigonometric basis") {
    Points p(6, 2);
    for (int i = 0; i < 6; ++i) p.row(i) << 0.13 * i, 0.07 * i * i;
    p.row(0) << 0.5, 0.25;
    const auto d = build_design(p, BasisSpec::trigonometric());
    REQUIRE(d.m() == 4);
    CHECK(d.X(0, 0) == doctest::Approx(1.0));
    CHECK(d.X(0, 1) == doctest::Approx(0.0));
    CHECK(d.X(0, 2) == doctest::Approx(std::sin(std::numbers::pi / 4)));
    CHECK(d.X(0, 3) == doctest::Approx(std::cos(std::numbers::pi / 4)));
}

TEST_CASE("basis spec parsing") {
    CHECK(BasisSpec::parse("poly:3").order == 3);
    CHECK(BasisSpec::parse("trig").family == BasisFamily::Trigonometric);
    CHECK(BasisSpec::parse("poly:2").name() == "poly:2");
    CHECK_THROWS_AS(BasisSpec::parse("poly:-1"), InputError);
    CHECK_THROWS_AS(BasisSpec::parse("spline"), InputError);
}

TEST_CASE("rank and shape checks") {
    Eigen::MatrixXd X(5, 3);
    X.col(0).setOnes();
    X.col(1) << 1, 2, 3, 4, 5;
    X.col(2) = 2.0 * X.col(1) + X.col(0);
    CHECK_THROWS_AS(design_from_table(X), ModelError);
    CHECK_THROWS_AS(design_from_table(Eigen::MatrixXd::Random(3, 3)), InputError);
    Points line(6, 2);
    for (int i = 0; i < 6; ++i) line.row(i) << 0.1 * i, 0.1 * i;
    CHECK_THROWS_AS(build_design(line, BasisSpec::polynomial(1)), ModelError);
}
