#include "cspit/renewal_math.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cspit/errors.hpp"
#include "cspit/numeric.hpp"

namespace cspit {

namespace {

void require_window(double t, const char* what) {
    if (!(t >= 0.0)) {
        std::ostringstream msg;
        msg << what << ": window length must be >= 0, got " << t;
        throw std::domain_error(msg.str());
    }
}

void require_order(int order, const char* what) {
    if (order != 1 && order != 2) {
        std::ostringstream msg;
        msg << what << ": only moment orders 1 and 2 are supported, got " << order;
        throw std::domain_error(msg.str());
    }
}

double forcing_value(const RenewalSpec& spec, RenewalForcing forcing, double t) {
    return forcing == RenewalForcing::Ordinary ? spec.cdf(t) : spec.age_cdf(t);
}

// Step count for the grid fallback: h = min(t, 1/mean_rate) / 200.
std::size_t base_steps(const RenewalSpec& spec, double t) {
    double cycles = t * spec.mean_rate();
    double n = 200.0 * std::max(1.0, cycles);
    if (n > 400000.0) {
        std::ostringstream msg;
        msg << "renewal grid: " << cycles << " mean interarrivals in the window need "
            << n << " grid steps; use the closed form at this scale";
        throw numeric_error(msg.str());
    }
    auto steps = static_cast<std::size_t>(std::ceil(n));
    return steps + (steps % 2);  // Simpson companions need an even count
}

double simpson_weights_integral(const std::vector<double>& values, double h) {
    // values on an even number of intervals
    std::size_t n = values.size() - 1;
    CompensatedSum acc;
    acc.add(values[0]);
    acc.add(values[n]);
    for (std::size_t i = 1; i < n; ++i) acc.add(values[i] * (i % 2 ? 4.0 : 2.0));
    return acc.value() * h / 3.0;
}

double grid_rn_at_steps(const RenewalSpec& spec, double t, int order, std::size_t steps) {
    auto m = RenewalFunction::solve_grid(spec, RenewalForcing::Ordinary, t, steps);
    double h = t / static_cast<double>(steps);
    if (order == 1) {
        // r_1(t) = t + integral_0^t m(x) dx
        return t + simpson_weights_integral(m, h);
    }
    // r_2(t) = t^2 + 2 integral_0^t (t - x) m(x) dx
    std::vector<double> g(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) g[i] = (t - h * static_cast<double>(i)) * m[i];
    return t * t + 2.0 * simpson_weights_integral(g, h);
}

// Step-doubling ladder with Richardson extrapolation for the O(h^2) grid
// schemes. `check_tol` is the acceptance threshold on the estimated
// trapezoid-pair error; the returned extrapolated value is an order more
// accurate than the estimate.
template <typename Eval>
double refine_extrapolate(Eval eval, std::size_t n0, double check_tol, const char* what) {
    std::size_t n = n0;
    double coarse = eval(n);
    for (int round = 0; round < 7; ++round) {
        double fine = eval(2 * n);
        double extrapolated = fine + (fine - coarse) / 3.0;
        double est = std::abs(fine - coarse) / 3.0;
        if (est <= check_tol * std::max(std::abs(extrapolated), 1e-300)) {
            return extrapolated;
        }
        n *= 2;
        coarse = fine;
    }
    std::ostringstream msg;
    msg << what << ": grid refinement did not converge to " << check_tol << " after 7 doublings from "
        << n0 << " steps";
    throw numeric_error(msg.str());
}

}  // namespace

RenewalFunction::RenewalFunction(const RenewalSpec& spec, RenewalForcing forcing) {
    cf_.linear = spec.mean_rate();
    if (forcing == RenewalForcing::Equilibrium || spec.branch_count() == 1) {
        // Poisson has m(t) = lambda t; the equilibrium-forced equation is
        // solved by lambda t for every renewal process.
        cf_.amp = 0.0;
        cf_.decay = 1.0;
        return;
    }
    // Partial-fraction inversion of m*(s) = f*(s) / (s (1 - f*(s))) for the
    // two-branch mixture: m(t) = lambda t + amp (1 - exp(-decay t)) with
    //   amp   = lambda^2 E[X^2]/2 - 1
    //   decay = w2 mu1 + w1 mu2
    double lam = spec.mean_rate();
    cf_.amp = 0.5 * lam * lam * spec.interarrival_moment2() - 1.0;
    cf_.decay = spec.branch_weight(1) * spec.branch_rate(0) +
                spec.branch_weight(0) * spec.branch_rate(1);
}

double RenewalFunction::operator()(double t) const {
    require_window(t, "RenewalFunction");
    return cf_.linear * t + cf_.amp * one_minus_exp(cf_.decay * t);
}

std::vector<double> RenewalFunction::solve_grid(const RenewalSpec& spec, RenewalForcing forcing,
                                                double t_max, std::size_t steps) {
    require_window(t_max, "RenewalFunction::solve_grid");
    if (steps == 0) throw std::domain_error("RenewalFunction::solve_grid: steps must be >= 1");
    double h = t_max / static_cast<double>(steps);
    std::vector<double> m(steps + 1, 0.0);
    std::vector<double> f(steps + 1);
    std::vector<double> frev(steps + 1);  // frev[steps - i] = f(t_i)
    for (std::size_t i = 0; i <= steps; ++i) {
        f[i] = spec.density(h * static_cast<double>(i));
        frev[steps - i] = f[i];
    }
    double pivot = 1.0 - 0.5 * h * f[0];
    if (pivot <= 0.0) throw numeric_error("RenewalFunction::solve_grid: step too coarse for kernel");
    // Trapezoidal discretization of m(t_j) = G(t_j) + int_0^{t_j} m(t_j - x) f(x) dx,
    // using m(0) = 0. The convolution sum is a contiguous dot product of
    // m[1..j-1] with the reversed kernel.
    for (std::size_t j = 1; j <= steps; ++j) {
        double acc = 0.0;
        const double* mk = m.data();
        const double* fk = frev.data() + (steps - j);
        for (std::size_t u = 1; u < j; ++u) acc += mk[u] * fk[u];
        m[j] = (forcing_value(spec, forcing, h * static_cast<double>(j)) + h * acc) / pivot;
    }
    return m;
}

double RenewalFunction::grid_value(const RenewalSpec& spec, RenewalForcing forcing, double t,
                                   double rel_tol) {
    require_window(t, "RenewalFunction::grid_value");
    if (t == 0.0) return 0.0;
    auto eval = [&](std::size_t steps) { return solve_grid(spec, forcing, t, steps).back(); };
    return refine_extrapolate(eval, base_steps(spec, t), rel_tol, "RenewalFunction::grid_value");
}

double renewal_function(const RenewalSpec& spec, double t, RenewalForcing forcing) {
    return RenewalFunction(spec, forcing)(t);
}

double residual_moment_sum(const RenewalSpec& spec, double t, int order, RenewalForcing forcing) {
    require_window(t, "residual_moment_sum");
    require_order(order, "residual_moment_sum");
    const auto cf = RenewalFunction(spec, forcing).coefficients();
    double a = cf.linear;
    double b = cf.amp;
    double c = cf.decay;
    if (order == 1) {
        // t + a t^2/2 + b (t - (1 - e^{-ct})/c)
        return t + 0.5 * a * t * t + b * expm1_c1(c * t) / c;
    }
    // t^2 + a t^3/3 + b (t^2 - 2t/c + 2(1 - e^{-ct})/c^2)
    return t * t + a * t * t * t / 3.0 - 2.0 * b * expm1_c2(c * t) / (c * c);
}

double residual_moment_sum_grid(const RenewalSpec& spec, double t, int order, double rel_tol) {
    require_window(t, "residual_moment_sum_grid");
    require_order(order, "residual_moment_sum_grid");
    if (t == 0.0) return 0.0;
    auto eval = [&](std::size_t steps) { return grid_rn_at_steps(spec, t, order, steps); };
    return refine_extrapolate(eval, base_steps(spec, t), rel_tol, "residual_moment_sum_grid");
}

double residual_moment(const RenewalSpec& spec, double d, int order, RenewalForcing forcing) {
    require_window(d, "residual_moment");
    require_order(order, "residual_moment");
    if (d == 0.0) return 0.0;
    double rn = residual_moment_sum(spec, d, order, forcing);
    double m = renewal_function(spec, d, forcing);
    return rn / (m + 1.0);
}

double residual_moment_grid(const RenewalSpec& spec, double d, int order, double rel_tol) {
    require_window(d, "residual_moment_grid");
    require_order(order, "residual_moment_grid");
    if (d == 0.0) return 0.0;
    double rn = residual_moment_sum_grid(spec, d, order, rel_tol);
    double m = RenewalFunction::grid_value(spec, RenewalForcing::Ordinary, d, rel_tol);
    return rn / (m + 1.0);
}

double ResidualFit::mean() const {
    switch (family) {
        case ResidualFamily::PointMassZero: return 0.0;
        case ResidualFamily::Deterministic:
        case ResidualFamily::Exponential: return m1;
        case ResidualFamily::Hyper2: return p1 / mu1 + p2 / mu2;
        case ResidualFamily::ErlangLike: return static_cast<double>(phases) / erlang_rate;
    }
    return 0.0;
}

double ResidualFit::second_moment() const {
    switch (family) {
        case ResidualFamily::PointMassZero: return 0.0;
        case ResidualFamily::Deterministic: return m1 * m1;
        case ResidualFamily::Exponential: return 2.0 * m1 * m1;
        case ResidualFamily::Hyper2: return 2.0 * (p1 / (mu1 * mu1) + p2 / (mu2 * mu2));
        case ResidualFamily::ErlangLike: {
            double k = static_cast<double>(phases);
            return k * (k + 1.0) / (erlang_rate * erlang_rate);
        }
    }
    return 0.0;
}

double ResidualFit::laplace(double s) const {
    switch (family) {
        case ResidualFamily::PointMassZero: return 1.0;
        case ResidualFamily::Deterministic: return std::exp(-s * m1);
        case ResidualFamily::Exponential: return 1.0 / (1.0 + s * m1);
        case ResidualFamily::Hyper2: return p1 * mu1 / (mu1 + s) + p2 * mu2 / (mu2 + s);
        case ResidualFamily::ErlangLike:
            return std::exp(-static_cast<double>(phases) * std::log1p(s / erlang_rate));
    }
    return 1.0;
}

double ResidualFit::survival(double r) const {
    if (r < 0.0) return 1.0;
    switch (family) {
        case ResidualFamily::PointMassZero: return 0.0;
        case ResidualFamily::Deterministic: return r < m1 ? 1.0 : 0.0;
        case ResidualFamily::Exponential: return std::exp(-r / m1);
        case ResidualFamily::Hyper2: return p1 * std::exp(-mu1 * r) + p2 * std::exp(-mu2 * r);
        case ResidualFamily::ErlangLike: {
            double x = erlang_rate * r;
            if (phases <= 64) {
                double term = std::exp(-x);
                double total = term;
                for (std::uint64_t j = 1; j < phases; ++j) {
                    term *= x / static_cast<double>(j);
                    total += term;
                }
                return std::min(total, 1.0);
            }
            // Chernoff upper bound; only used to locate quadrature cutoffs.
            double k = static_cast<double>(phases);
            if (x <= k) return 1.0;
            return std::min(1.0, std::exp(k - x + k * std::log(x / k)));
        }
    }
    return 0.0;
}

bool ResidualFit::has_density() const {
    return family == ResidualFamily::Exponential || family == ResidualFamily::Hyper2 ||
           family == ResidualFamily::ErlangLike;
}

double ResidualFit::density(double r) const {
    if (r < 0.0) return 0.0;
    switch (family) {
        case ResidualFamily::Exponential: return std::exp(-r / m1) / m1;
        case ResidualFamily::Hyper2:
            return p1 * mu1 * std::exp(-mu1 * r) + p2 * mu2 * std::exp(-mu2 * r);
        case ResidualFamily::ErlangLike: {
            if (r == 0.0) return phases == 1 ? erlang_rate : 0.0;
            double k = static_cast<double>(phases);
            return std::exp(k * std::log(erlang_rate) + (k - 1.0) * std::log(r) - erlang_rate * r -
                            std::lgamma(k));
        }
        default: return 0.0;
    }
}

double ResidualFit::atom_location() const {
    return family == ResidualFamily::Deterministic ? m1 : 0.0;
}

ResidualFit fit_residual(double m1, double m2) {
    if (!(m1 >= 0.0) || !(m2 >= 0.0)) {
        throw std::domain_error("fit_residual: moments must be non-negative");
    }
    ResidualFit fit;
    fit.m1 = m1;
    fit.m2 = m2;
    if (m1 == 0.0) {
        if (m2 > 0.0) throw std::domain_error("fit_residual: m2 > 0 with zero mean is infeasible");
        fit.family = ResidualFamily::PointMassZero;
        return fit;
    }
    double scv = m2 / (m1 * m1) - 1.0;
    fit.scv = scv;
    if (scv < -1e-9) {
        std::ostringstream msg;
        msg << "fit_residual: infeasible moments m2 = " << m2 << " < m1^2 = " << m1 * m1;
        throw std::domain_error(msg.str());
    }
    if (std::abs(scv) <= 1e-9) {
        fit.family = ResidualFamily::Deterministic;
        fit.fit_residual = m2 > 0.0 ? std::abs(m1 * m1 - m2) / m2 : 0.0;
        return fit;
    }
    if (std::abs(scv - 1.0) <= 1e-9) {
        fit.family = ResidualFamily::Exponential;
        return fit;
    }
    if (scv > 1.0) {
        // Balanced-means hyper-exponential: p1/mu1 = p2/mu2 = m1/2; matches
        // both moments exactly. p2 is formed without the 1 - sqrt(...)
        // cancellation.
        double x = (scv - 1.0) / (scv + 1.0);
        double sq = std::sqrt(x);
        fit.family = ResidualFamily::Hyper2;
        fit.p1 = 0.5 * (1.0 + sq);
        fit.p2 = 1.0 / ((scv + 1.0) * (1.0 + sq));
        fit.mu1 = 2.0 * fit.p1 / m1;
        fit.mu2 = 2.0 * fit.p2 / m1;
        return fit;
    }
    // 0 < scv < 1: Erlang with the phase count whose 1/k is nearest to scv.
    double kf = 1.0 / scv;
    auto lo = static_cast<std::uint64_t>(std::max(1.0, std::floor(kf)));
    std::uint64_t hi = lo + 1;
    double err_lo = std::abs(1.0 / static_cast<double>(lo) - scv);
    double err_hi = std::abs(1.0 / static_cast<double>(hi) - scv);
    std::uint64_t k = err_lo <= err_hi ? lo : hi;
    fit.family = ResidualFamily::ErlangLike;
    fit.phases = k;
    fit.erlang_rate = static_cast<double>(k) / m1;
    double fitted_m2 = m1 * m1 * (1.0 + 1.0 / static_cast<double>(k));
    fit.fit_residual = std::abs(fitted_m2 - m2) / m2;
    return fit;
}

RhoPair rho_integrals(const RenewalSpec& spec, const ResidualFit& fit, double t_c) {
    require_window(t_c, "rho_integrals");
    // F(r + T) - F(r) = sum_i w_i e^{-mu_i r} (1 - e^{-mu_i T}), so the
    // integral against dR(r) is the Laplace transform of R at each branch
    // rate (and likewise for F_hat with weights w_i / mu_i).
    RhoPair out;
    double lam = spec.mean_rate();
    for (int i = 0; i < spec.branch_count(); ++i) {
        double w = spec.branch_weight(i);
        double mu = spec.branch_rate(i);
        double gap = one_minus_exp(mu * t_c);
        double transform = fit.laplace(mu);
        out.rho += w * gap * transform;
        out.rho_prime += lam * w / mu * gap * transform;
    }
    return out;
}

RhoPair rho_integrals_quadrature(const RenewalSpec& spec, const ResidualFit& fit, double t_c,
                                 double rel_tol) {
    require_window(t_c, "rho_integrals_quadrature");
    RhoPair out;
    auto f_gap = [&](double r) { return spec.survival(r) - spec.survival(r + t_c); };
    auto fhat_gap = [&](double r) { return spec.age_survival(r) - spec.age_survival(r + t_c); };
    if (!fit.has_density()) {
        double atom = fit.atom_location();
        out.rho = f_gap(atom);
        out.rho_prime = fhat_gap(atom);
        return out;
    }
    double r_max = std::max(fit.m1, t_c);
    if (r_max <= 0.0) r_max = 1.0;
    int guard = 0;
    while (fit.survival(r_max) >= 1e-10 && guard++ < 600) r_max *= 2.0;
    if (guard >= 600) throw numeric_error("rho_integrals_quadrature: residual tail did not decay");
    out.rho = adaptive_simpson([&](double r) { return f_gap(r) * fit.density(r); }, 0.0, r_max,
                               rel_tol, 1e-14);
    out.rho_prime = adaptive_simpson([&](double r) { return fhat_gap(r) * fit.density(r); }, 0.0,
                                     r_max, rel_tol, 1e-14);
    return out;
}

}  // namespace cspit
