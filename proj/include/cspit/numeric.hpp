#pragma once

#include <cmath>
#include <functional>

namespace cspit {

// Neumaier-compensated accumulator for long sums.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// 1 - exp(-x) without cancellation for small x.
inline double one_minus_exp(double x) { return -std::expm1(-x); }

// expm1_c1(x) = exp(-x) - 1 + x            ~ x^2/2   for small x
// expm1_c2(x) = exp(-x) - 1 + x - x^2/2    ~ -x^3/6  for small x
// Both are evaluated by series below the cancellation threshold.
double expm1_c1(double x);
double expm1_c2(double x);

// Adaptive Simpson quadrature. Throws numeric_error if the recursion depth
// is exhausted before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol, int max_depth = 48);

// Smallest x in [lo, hi] (to relative width rel_tol) with f(x) = target,
// assuming f continuous with f(lo) <= target <= f(hi).
double bisect_to_target(const std::function<double(double)>& f, double target, double lo,
                        double hi, double rel_tol);

// Two-sided 97.5% Student-t quantile (95% confidence half-widths).
double student_t_975(unsigned dof);

}  // namespace cspit
