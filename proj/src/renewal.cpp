#include "cspit/renewal.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "cspit/errors.hpp"
#include "cspit/numeric.hpp"

namespace cspit {

namespace {

void require_nonnegative(double t, const char* what) {
    if (!(t >= 0.0)) {
        std::ostringstream msg;
        msg << what << ": argument must be >= 0, got " << t;
        throw std::domain_error(msg.str());
    }
}

}  // namespace

void RenewalSpec::finalize(double declared_mean_rate) {
    // Normalize branch order to mu_[0] >= mu_[1].
    if (branches_ == 2 && mu_[0] < mu_[1]) {
        std::swap(mu_[0], mu_[1]);
        std::swap(w_[0], w_[1]);
    }
    double mean = w_[0] / mu_[0];
    if (branches_ == 2) mean += w_[1] / mu_[1];
    double computed_rate = 1.0 / mean;
    if (std::abs(computed_rate - declared_mean_rate) > 1e-10 * declared_mean_rate) {
        std::ostringstream msg;
        msg << "RenewalSpec: mean-rate mismatch, declared " << declared_mean_rate
            << " but 1/E[X] = " << computed_rate;
        throw numeric_error(msg.str());
    }
    mean_rate_ = declared_mean_rate;
    eq_w1_ = mean_rate_ * w_[0] / mu_[0];
}

RenewalSpec RenewalSpec::poisson(double rate) {
    if (!(rate > 0.0)) throw std::domain_error("RenewalSpec::poisson: rate must be > 0");
    RenewalSpec s;
    s.kind_ = RenewalKind::Poisson;
    s.branches_ = 1;
    s.w_[0] = 1.0;
    s.w_[1] = 0.0;
    s.mu_[0] = rate;
    s.mu_[1] = rate;  // unused, kept positive
    s.finalize(rate);
    return s;
}

RenewalSpec RenewalSpec::hyper2(double p1, double mu1, double mu2) {
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::domain_error("RenewalSpec::hyper2: p1 outside [0,1]");
    if (!(mu1 > 0.0 && mu2 > 0.0)) throw std::domain_error("RenewalSpec::hyper2: rates must be > 0");
    RenewalSpec s;
    s.kind_ = RenewalKind::Hyper2;
    s.branches_ = 2;
    s.w_[0] = p1;
    s.w_[1] = 1.0 - p1;
    s.mu_[0] = mu1;
    s.mu_[1] = mu2;
    double mean = p1 / mu1 + (1.0 - p1) / mu2;
    s.finalize(1.0 / mean);
    return s;
}

RenewalSpec RenewalSpec::hyper_z(double mean_rate, double z) {
    if (!(mean_rate > 0.0)) throw std::domain_error("RenewalSpec::hyper_z: rate must be > 0");
    if (!(z > 0.0)) throw std::domain_error("RenewalSpec::hyper_z: z must be > 0");
    RenewalSpec s;
    s.kind_ = RenewalKind::HyperZ;
    s.branches_ = 2;
    s.w_[0] = z / (z + 1.0);
    s.w_[1] = 1.0 / (z + 1.0);
    s.mu_[0] = z * mean_rate;
    s.mu_[1] = mean_rate / z;
    // E[X] = (z/(z+1))/(z r) + (1/(z+1))(z/r) = 1/r exactly.
    s.finalize(mean_rate);
    return s;
}

RenewalSpec RenewalSpec::ipp(double on_rate, double t_on, double t_off) {
    if (!(on_rate > 0.0)) throw std::domain_error("RenewalSpec::ipp: on rate must be > 0");
    if (!(t_on > 0.0)) throw std::domain_error("RenewalSpec::ipp: t_on must be > 0");
    if (!(t_off > 0.0)) throw std::domain_error("RenewalSpec::ipp: t_off must be > 0");
    double omega_on = 1.0 / t_on;    // leave-on rate
    double omega_off = 1.0 / t_off;  // leave-off rate
    double b = on_rate + omega_on + omega_off;
    double p = on_rate * omega_off;
    double disc = b * b - 4.0 * p;  // = (nu - w_off)^2 + w_on(w_on + 2nu + 2w_off) > 0
    double mu1 = 0.5 * (b + std::sqrt(std::max(disc, 0.0)));
    double mu2 = p / mu1;
    double mean = (omega_on + omega_off) / (on_rate * omega_off);  // = (t_on+t_off)/(nu t_on)
    if (mu1 - mu2 <= 1e-12 * mu1) {
        // Coincident roots: the interarrival law collapses to an exponential.
        RenewalSpec s = poisson(1.0 / mean);
        s.kind_ = RenewalKind::Ipp;
        return s;
    }
    // Branch weights chosen to reproduce the mean exactly; this form avoids
    // the cancellation in (nu - mu2)/(mu1 - mu2) when nu >> omega rates.
    double inv_span = 1.0 / (1.0 / mu2 - 1.0 / mu1);
    double w1 = (1.0 / mu2 - mean) * inv_span;
    double w2 = (mean - 1.0 / mu1) * inv_span;
    RenewalSpec s;
    s.kind_ = RenewalKind::Ipp;
    s.branches_ = 2;
    s.w_[0] = w1;
    s.w_[1] = w2;
    s.mu_[0] = mu1;
    s.mu_[1] = mu2;
    s.finalize(1.0 / mean);
    return s;
}

double RenewalSpec::cdf(double t) const {
    require_nonnegative(t, "RenewalSpec::cdf");
    double v = w_[0] * one_minus_exp(mu_[0] * t);
    if (branches_ == 2) v += w_[1] * one_minus_exp(mu_[1] * t);
    return v;
}

double RenewalSpec::survival(double t) const {
    require_nonnegative(t, "RenewalSpec::survival");
    double v = w_[0] * std::exp(-mu_[0] * t);
    if (branches_ == 2) v += w_[1] * std::exp(-mu_[1] * t);
    return v;
}

double RenewalSpec::density(double t) const {
    require_nonnegative(t, "RenewalSpec::density");
    double v = w_[0] * mu_[0] * std::exp(-mu_[0] * t);
    if (branches_ == 2) v += w_[1] * mu_[1] * std::exp(-mu_[1] * t);
    return v;
}

double RenewalSpec::age_cdf(double a) const {
    require_nonnegative(a, "RenewalSpec::age_cdf");
    double v = w_[0] / mu_[0] * one_minus_exp(mu_[0] * a);
    if (branches_ == 2) v += w_[1] / mu_[1] * one_minus_exp(mu_[1] * a);
    return mean_rate_ * v;
}

double RenewalSpec::age_survival(double a) const {
    require_nonnegative(a, "RenewalSpec::age_survival");
    double v = w_[0] / mu_[0] * std::exp(-mu_[0] * a);
    if (branches_ == 2) v += w_[1] / mu_[1] * std::exp(-mu_[1] * a);
    return mean_rate_ * v;
}

double RenewalSpec::interarrival_moment2() const {
    double v = w_[0] / (mu_[0] * mu_[0]);
    if (branches_ == 2) v += w_[1] / (mu_[1] * mu_[1]);
    return 2.0 * v;
}

double RenewalSpec::sample_interarrival(Xoshiro256& rng) const {
    if (branches_ == 1) return rng.exponential(mu_[0]);
    double u = rng.uniform01();
    return rng.exponential(u < w_[0] ? mu_[0] : mu_[1]);
}

double RenewalSpec::sample_first_arrival(Xoshiro256& rng) const {
    // The equilibrium residual of an exponential mixture is again a mixture
    // of the same exponentials with weights mean_rate * w_i / mu_i.
    if (branches_ == 1) return rng.exponential(mu_[0]);
    double u = rng.uniform01();
    return rng.exponential(u < eq_w1_ ? mu_[0] : mu_[1]);
}

}  // namespace cspit
