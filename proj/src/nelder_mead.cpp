#include "etafit/nelder_mead.hpp"
#include "etafit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace etafit {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& options) {
    const Eigen::Index k = x0.size();
    if (k < 1) {
        throw InputError("Nelder-Mead needs at least one variable");
    }
    if (options.initial_step.size() != 0 && options.initial_step.size() != k) {
        throw InputError("initial step size does not match the dimension");
    }
    const double dim = static_cast<double>(k);
    const double rho = 1.0;
    const double chi = k > 1 ? 1.0 + 2.0 / dim : 2.0;
    const double psi = k > 1 ? 0.75 - 1.0 / (2.0 * dim) : 0.5;
    const double sigma = k > 1 ? 1.0 - 1.0 / dim : 0.5;

    NelderMeadResult result;
    auto eval = [&](const Eigen::VectorXd& x) {
        double value = f(x);
        ++result.evaluations;
        if (!std::isfinite(value)) {
            value = std::numeric_limits<double>::infinity();
        }
        if (options.on_eval) {
            options.on_eval(result.evaluations, x, value);
        }
        return value;
    };

    std::vector<Eigen::VectorXd> sim(static_cast<std::size_t>(k) + 1, x0);
    std::vector<double> fs(static_cast<std::size_t>(k) + 1);
    fs[0] = eval(x0);
    if (!std::isfinite(fs[0])) {
        throw InputError("Nelder-Mead objective is not finite at the initial point");
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::VectorXd y = x0;
        if (options.initial_step.size() == k) {
            y(j) += options.initial_step(j);
        } else {
            y(j) = y(j) != 0.0 ? 1.05 * y(j) : 2.5e-4;
        }
        sim[static_cast<std::size_t>(j) + 1] = y;
        fs[static_cast<std::size_t>(j) + 1] = eval(y);
    }

    std::vector<std::size_t> order(sim.size());
    auto sort_simplex = [&]() {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        std::vector<Eigen::VectorXd> s2;
        std::vector<double> f2;
        for (std::size_t i : order) {
            s2.push_back(sim[i]);
            f2.push_back(fs[i]);
        }
        sim = std::move(s2);
        fs = std::move(f2);
    };
    sort_simplex();

    const std::size_t last = sim.size() - 1;
    while (result.evaluations < options.max_evals) {
        double size = 0.0;
        double spread = 0.0;
        for (std::size_t i = 1; i <= last; ++i) {
            size = std::max(size, (sim[i] - sim[0]).cwiseAbs().maxCoeff());
            spread = std::max(spread, std::abs(fs[i] - fs[0]));
        }
        if (size <= options.x_tol && spread <= options.f_tol) {
            result.converged = true;
            break;
        }
        ++result.iterations;

        Eigen::VectorXd xbar = Eigen::VectorXd::Zero(k);
        for (std::size_t i = 0; i < last; ++i) {
            xbar += sim[i];
        }
        xbar /= dim;

        const Eigen::VectorXd xr = (1.0 + rho) * xbar - rho * sim[last];
        const double fr = eval(xr);
        bool shrink = false;
        if (fr < fs[0]) {
            const Eigen::VectorXd xe = (1.0 + rho * chi) * xbar - rho * chi * sim[last];
            const double fe = eval(xe);
            if (fe < fr) {
                sim[last] = xe;
                fs[last] = fe;
            } else {
                sim[last] = xr;
                fs[last] = fr;
            }
        } else if (fr < fs[last - 1]) {
            sim[last] = xr;
            fs[last] = fr;
        } else if (fr < fs[last]) {
            const Eigen::VectorXd xc = (1.0 + psi * rho) * xbar - psi * rho * sim[last];
            const double fc = eval(xc);
            if (fc <= fr) {
                sim[last] = xc;
                fs[last] = fc;
            } else {
                shrink = true;
            }
        } else {
            const Eigen::VectorXd xcc = (1.0 - psi) * xbar + psi * sim[last];
            const double fcc = eval(xcc);
            if (fcc < fs[last]) {
                sim[last] = xcc;
                fs[last] = fcc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 1; i <= last; ++i) {
                sim[i] = sim[0] + sigma * (sim[i] - sim[0]);
                fs[i] = eval(sim[i]);
            }
        }
        sort_simplex();
    }
    result.x = sim[0];
    result.f = fs[0];
    return result;
}

} // namespace etafit
