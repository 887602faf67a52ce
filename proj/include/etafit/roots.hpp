#pragma once

#include <functional>
#include <optional>

namespace etafit {

struct RootResult {
    double root = 0.0;
    double f_root = 0.0;
    int iterations = 0;  // function evaluations after the two endpoints
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

// Chandrupatla's bracketing method: inverse quadratic interpolation when the
// three retained points pass the method's acceptance test, bisection otherwise.
// Stops when the bracket is narrower than x_tol or |f| <= f_tol.
// Known endpoint values may be passed to skip those evaluations.
RootResult chandrupatla_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                             double f_tol, int max_iter = 100, std::optional<double> f_lo = {},
                             std::optional<double> f_hi = {});

} // namespace etafit
