#pragma once

// Independent reference implementations used as test oracles. Everything
// here draws from std::mt19937_64 and hand-rolled quadrature so the checks
// do not share code with the paths under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Composite-Simpson with panel doubling until two successive estimates agree.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-12, int start_panels = 64) {
    auto simpson = [&](int n) {
        double h = (b - a) / n;
        double acc = f(a) + f(b);
        for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return acc * h / 3.0;
    };
    double prev = simpson(start_panels);
    for (int n = start_panels * 2; n <= (1 << 22); n *= 2) {
        double cur = simpson(n);
        if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
        prev = cur;
    }
    return prev;
}

// Two-branch hyper-exponential sampler (std engine, independent of the
// library generator).
class Hyper2Sampler {
public:
    Hyper2Sampler(double p1, double mu1, double mu2, std::uint64_t seed)
        : engine_(seed), unit_(0.0, 1.0), p1_(p1), mu1_(mu1), mu2_(mu2) {}

    double operator()() {
        double rate = unit_(engine_) < p1_ ? mu1_ : mu2_;
        return -std::log1p(-unit_(engine_)) / rate;
    }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_;
    double p1_, mu1_, mu2_;
};

// Interarrival sampler for an interrupted Poisson process, simulated from
// the two-state chain itself (arrivals only happen in the on state; the
// clock starts just after an arrival, i.e. in the on state).
class IppSampler {
public:
    IppSampler(double nu, double t_on, double t_off, std::uint64_t seed)
        : engine_(seed), unit_(0.0, 1.0), nu_(nu), w_on_(1.0 / t_on), w_off_(1.0 / t_off) {}

    double operator()() {
        double elapsed = 0.0;
        bool on = true;
        while (true) {
            if (on) {
                double to_arrival = exp_draw(nu_);
                double to_switch = exp_draw(w_on_);
                if (to_arrival < to_switch) return elapsed + to_arrival;
                elapsed += to_switch;
                on = false;
            } else {
                elapsed += exp_draw(w_off_);
                on = true;
            }
        }
    }

private:
    double exp_draw(double rate) { return -std::log1p(-unit_(engine_)) / rate; }
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_;
    double nu_, w_on_, w_off_;
};

// One-sample Kolmogorov-Smirnov statistic against an analytic CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        worst = std::max(worst, std::abs(f - static_cast<double>(i) / n));
        worst = std::max(worst, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return worst;
}

// KS acceptance threshold at the 1% level.
inline double ks_threshold_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

struct MeanVar {
    double mean = 0.0;
    double std_error = 0.0;
};

inline MeanVar mean_and_se(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double var = ss / static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace oracle
