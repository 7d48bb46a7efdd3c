#pragma once

#include <cstdint>
#include <vector>

#include "cspit/renewal.hpp"

namespace cspit {

// Forcing term of the renewal integral equation
//     m(t) = G(t) + integral_0^t m(t - x) f(x) dx.
// Ordinary uses G = F (expected renewals in a window opened by an arrival),
// Equilibrium uses G = F_hat. The ordinary reading is what the solvers use;
// the equilibrium variant is kept for comparison (its solution is exactly
// mean_rate * t for any renewal process).
enum class RenewalForcing { Ordinary, Equilibrium };

// Closed form m(t) = linear * t + amp * (1 - exp(-decay * t)); exact for
// exponential and two-branch hyper-exponential interarrivals.
struct RenewalClosedForm {
    double linear = 0.0;
    double amp = 0.0;
    double decay = 1.0;
};

class RenewalFunction {
public:
    explicit RenewalFunction(const RenewalSpec& spec,
                             RenewalForcing forcing = RenewalForcing::Ordinary);

    double operator()(double t) const;
    bool closed_form() const { return true; }  // all supported variants
    const RenewalClosedForm& coefficients() const { return cf_; }

    // Generic fallback: trapezoidal discretization of the integral equation
    // on [0, t_max] with `steps` intervals. Returns m at the grid points.
    static std::vector<double> solve_grid(const RenewalSpec& spec, RenewalForcing forcing,
                                          double t_max, std::size_t steps);

    // Grid value at t, Richardson-extrapolated from step doubling until the
    // extrapolation correction meets rel_tol. Throws numeric_error if the
    // refinement cap is hit first.
    static double grid_value(const RenewalSpec& spec, RenewalForcing forcing, double t,
                             double rel_tol = 1e-6);

private:
    RenewalClosedForm cf_;
};

// m(t) for the given process (closed form).
double renewal_function(const RenewalSpec& spec, double t,
                        RenewalForcing forcing = RenewalForcing::Ordinary);

// r_n(t) = t^n + integral_0^t (t - x)^n dm(x), the accumulated n-th moments
// of the residuals of all requests landing in a window of length t opened by
// a request. Orders 1 and 2 are supported.
double residual_moment_sum(const RenewalSpec& spec, double t, int order,
                           RenewalForcing forcing = RenewalForcing::Ordinary);

// Same quantity evaluated on the discretized renewal function (the generic
// numerical path; used to cross-check the closed forms).
double residual_moment_sum_grid(const RenewalSpec& spec, double t, int order,
                                double rel_tol = 1e-9);

// E[R^n] = r_n(d) / (m(d) + 1): the n-th moment of the residual download
// time seen by an arbitrary request inside a download window of length d.
double residual_moment(const RenewalSpec& spec, double d, int order,
                       RenewalForcing forcing = RenewalForcing::Ordinary);
double residual_moment_grid(const RenewalSpec& spec, double d, int order,
                            double rel_tol = 1e-9);

enum class ResidualFamily { PointMassZero, Deterministic, Exponential, Hyper2, ErlangLike };

// Two-moment fit of the residual download time R.
struct ResidualFit {
    ResidualFamily family = ResidualFamily::PointMassZero;
    double m1 = 0.0;   // target E[R]
    double m2 = 0.0;   // target E[R^2]
    double scv = 0.0;  // m2/m1^2 - 1
    // hyper2 branches (family == Hyper2)
    double p1 = 0.0, p2 = 0.0, mu1 = 0.0, mu2 = 0.0;
    // Erlang parameters (family == ErlangLike)
    std::uint64_t phases = 0;
    double erlang_rate = 0.0;
    // Relative m2 mismatch for families that cannot match it exactly.
    double fit_residual = 0.0;

    double mean() const;
    double second_moment() const;
    double laplace(double s) const;   // E[exp(-s R)]
    double survival(double r) const;  // P(R > r)
    bool has_density() const;
    double density(double r) const;
    double atom_location() const;  // PointMassZero / Deterministic
};

// m1 = 0 -> point mass at zero; scv ~ 0 -> deterministic; scv ~ 1 ->
// exponential; scv > 1 -> balanced-means hyper-exponential (both moments
// exact); 0 < scv < 1 -> Erlang with the phase count nearest to 1/scv
// (mean exact, m2 as close as integer phases allow). Throws
// std::domain_error when m2 < m1^2 beyond tolerance.
ResidualFit fit_residual(double m1, double m2);

struct RhoPair {
    double rho = 0.0;        // integral of F(r + t_c) - F(r) against dR
    double rho_prime = 0.0;  // integral of F_hat(r + t_c) - F_hat(r) against dR
};

// Closed form: both integrals reduce to the Laplace transform of the fitted
// residual evaluated at the interarrival mixture rates.
RhoPair rho_integrals(const RenewalSpec& spec, const ResidualFit& fit, double t_c);

// Adaptive-quadrature route over the fitted density (atoms evaluated
// directly); cross-checks the closed form.
RhoPair rho_integrals_quadrature(const RenewalSpec& spec, const ResidualFit& fit, double t_c,
                                 double rel_tol = 1e-8);

}  // namespace cspit
