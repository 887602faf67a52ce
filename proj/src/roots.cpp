#include "etafit/roots.hpp"
#include "etafit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace etafit {

RootResult chandrupatla_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                             double f_tol, int max_iter, std::optional<double> f_lo, std::optional<double> f_hi) {
    if (!(lo < hi)) {
        throw InputError("root bracket needs lo < hi");
    }
    if (!(x_tol > 0.0) || !(f_tol >= 0.0)) {
        throw InputError("root tolerances must be positive");
    }
    double a = lo;
    double b = hi;
    double fa = f_lo ? *f_lo : f(a);
    double fb = f_hi ? *f_hi : f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) {
        throw BracketError("function is not finite at the bracket ends");
    }

    RootResult result;
    if (fa == 0.0 || fb == 0.0) {
        result.root = fa == 0.0 ? a : b;
        result.bracket_lo = lo;
        result.bracket_hi = hi;
        return result;
    }
    if ((fa > 0.0) == (fb > 0.0)) {
        std::ostringstream os;
        os << "no sign change on [" << lo << ", " << hi << "]: f=" << fa << ", " << fb;
        throw BracketError(os.str());
    }

    double c = a;
    double fc = fa;
    double t = 0.5;
    for (int iter = 1;; ++iter) {
        if (iter > max_iter) {
            throw ConvergenceError("root finder exceeded its iteration limit", std::min(a, b), std::max(a, b));
        }
        const double xt = a + t * (b - a);
        const double ft = f(xt);
        if (!std::isfinite(ft)) {
            throw NumericError("function is not finite inside the bracket");
        }
        if ((ft > 0.0) == (fa > 0.0)) {
            c = a;
            fc = fa;
        } else {
            c = b;
            fc = fb;
            b = a;
            fb = fa;
        }
        a = xt;
        fa = ft;

        const bool a_best = std::abs(fa) < std::abs(fb);
        const double xm = a_best ? a : b;
        const double fm = a_best ? fa : fb;
        const double width = std::abs(b - a);
        result.iterations = iter;
        result.root = xm;
        result.f_root = fm;
        result.bracket_lo = std::min(a, b);
        result.bracket_hi = std::max(a, b);
        if (fm == 0.0 || width <= x_tol || std::abs(fm) <= f_tol) {
            return result;
        }

        const double tlim = 0.5 * x_tol / width;
        const double xi = (a - b) / (c - b);
        const double phi = (fa - fb) / (fc - fb);
        if (phi * phi < xi && (1.0 - phi) * (1.0 - phi) < 1.0 - xi) {
            t = fa / (fb - fa) * fc / (fb - fc) + (c - a) / (b - a) * fa / (fc - fa) * fb / (fc - fb);
        } else {
            t = 0.5;
        }
        t = std::clamp(t, tlim, 1.0 - tlim);
    }
}

} // namespace etafit
