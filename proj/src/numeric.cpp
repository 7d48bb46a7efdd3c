#include "cspit/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "cspit/errors.hpp"

namespace cspit {

double expm1_c1(double x) {
    if (std::abs(x) < 0.01) {
        // x^2/2 * (1 - x/3 + x^2/12 - x^3/60 + x^4/360)
        return 0.5 * x * x * (1.0 - x / 3.0 + x * x / 12.0 - x * x * x / 60.0 + x * x * x * x / 360.0);
    }
    return std::expm1(-x) + x;
}

double expm1_c2(double x) {
    if (std::abs(x) < 0.01) {
        // -x^3/6 * (1 - x/4 + x^2/20 - x^3/120 + x^4/840)
        return -x * x * x / 6.0 *
               (1.0 - x / 4.0 + x * x / 20.0 - x * x * x / 120.0 + x * x * x * x / 840.0);
    }
    return std::expm1(-x) + x - 0.5 * x * x;
}

namespace {

double simpson_panel(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_recurse(const std::function<double(double)>& f, double a, double fa, double b,
                       double fb, double fm, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = simpson_panel(f, a, fa, m, fm, flm);
    double right = simpson_panel(f, m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    if (depth <= 0) {
        std::ostringstream msg;
        msg << "adaptive_simpson: depth exhausted on [" << a << ", " << b
            << "], residual " << std::abs(delta);
        throw numeric_error(msg.str());
    }
    return simpson_recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol, int max_depth) {
    if (b <= a) return 0.0;
    double fa = f(a);
    double fb = f(b);
    double fm = f(0.5 * (a + b));
    double whole = simpson_panel(f, a, fa, b, fb, fm);
    double tol = std::max(abs_tol, rel_tol * std::abs(whole));
    return simpson_recurse(f, a, fa, b, fb, fm, whole, tol, max_depth);
}

double bisect_to_target(const std::function<double(double)>& f, double target, double lo,
                        double hi, double rel_tol) {
    if (!(lo < hi)) throw numeric_error("bisect_to_target: empty bracket");
    if (f(lo) > target || f(hi) < target) {
        std::ostringstream msg;
        msg << "bisect_to_target: target " << target << " not bracketed by [" << lo << ", " << hi
            << "] -> [" << f(lo) << ", " << f(hi) << "]";
        throw numeric_error(msg.str());
    }
    for (int i = 0; i < 2000 && (hi - lo) > rel_tol * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval below representable resolution
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double student_t_975(unsigned dof) {
    static constexpr std::array<double, 30> table = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof == 0) return table[0];
    if (dof <= table.size()) return table[dof - 1];
    if (dof <= 60) return 2.00;
    return 1.96;
}

}  // namespace cspit
