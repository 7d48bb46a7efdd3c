#pragma once

#include <cstdint>

#include "cspit/rng.hpp"

namespace cspit {

enum class RenewalKind { Poisson, Hyper2, HyperZ, Ipp };

// A stationary renewal request process. Every supported variant has an
// interarrival law that is a mixture of at most two exponentials, so the
// CDF F, the age CDF F-hat and all derived renewal quantities stay in
// closed form:
//
//   poisson(rate)        single exponential (the IRM per-content process)
//   hyper2(p1,mu1,mu2)   two-branch hyper-exponential
//   hyper_z(rate,z)      hyper2 with branch prob z/(z+1) at rate z*rate and
//                        branch prob 1/(z+1) at rate rate/z; mean rate is
//                        exactly `rate` for every z > 0, z = 1 degenerates
//                        to poisson(rate)
//   ipp(nu,t_on,t_off)   interrupted Poisson process: on-periods of mean
//                        t_on with arrival rate nu, off-periods of mean
//                        t_off; converted to its equivalent hyper2 whose
//                        rates are the roots of
//                            s^2 - (nu + 1/t_on + 1/t_off) s + nu/t_off = 0
//                        with the branch probability chosen to match the
//                        mean rate nu*t_on/(t_on+t_off)
//
// Instances are immutable and safe to share across threads; samplers draw
// from a caller-owned stream.
class RenewalSpec {
public:
    static RenewalSpec poisson(double rate);
    static RenewalSpec hyper2(double p1, double mu1, double mu2);
    static RenewalSpec hyper_z(double mean_rate, double z);
    static RenewalSpec ipp(double on_rate, double t_on, double t_off);

    RenewalKind kind() const { return kind_; }
    double mean_rate() const { return mean_rate_; }

    int branch_count() const { return branches_; }
    double branch_weight(int i) const { return w_[i]; }
    double branch_rate(int i) const { return mu_[i]; }

    // Interarrival CDF F(t); F(0) = 0. Throws std::domain_error for t < 0.
    double cdf(double t) const;
    // 1 - F(t), accurate deep in the tail.
    double survival(double t) const;
    // Interarrival density f(t).
    double density(double t) const;
    // Age CDF: F_hat(a) = mean_rate * integral_0^a (1 - F(x)) dx. This is
    // also the stationary residual-life distribution.
    double age_cdf(double a) const;
    // 1 - F_hat(a).
    double age_survival(double a) const;

    double interarrival_moment2() const;  // E[X^2]

    // One draw from F.
    double sample_interarrival(Xoshiro256& rng) const;
    // One draw from F_hat; used to start each content's request stream so
    // the process is stationary from time zero.
    double sample_first_arrival(Xoshiro256& rng) const;

private:
    RenewalSpec() = default;
    void finalize(double declared_mean_rate);

    RenewalKind kind_ = RenewalKind::Poisson;
    int branches_ = 1;
    double w_[2] = {1.0, 0.0};
    double mu_[2] = {1.0, 1.0};
    double mean_rate_ = 1.0;
    double eq_w1_ = 1.0;  // equilibrium mixture weight of branch 0
};

}  // namespace cspit
