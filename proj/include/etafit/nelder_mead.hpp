#pragma once

#include <Eigen/Dense>

#include <functional>

namespace etafit {

struct NelderMeadOptions {
    double x_tol = 1e-4;
    double f_tol = 1e-4;
    int max_evals = 2000;
    // Per-coordinate initial steps; empty means 5% of each coordinate (2.5e-4 for zeros).
    Eigen::VectorXd initial_step;
    // Called after every objective evaluation with (count, point, value).
    std::function<void(int, const Eigen::VectorXd&, double)> on_eval;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int evaluations = 0;
    int iterations = 0;
    bool converged = false;
};

// Minimizes f with the dimension-adaptive coefficients of Gao and Han:
// reflection 1, expansion 1 + 2/k, contraction 0.75 - 1/(2k), shrink 1 - 1/k
// (standard 1, 2, 0.5, 0.5 when k = 1). Non-finite values count as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& options = {});

} // namespace etafit
