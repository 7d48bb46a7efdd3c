#include "cspit/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cspit/errors.hpp"
#include "cspit/numeric.hpp"

namespace cspit {

RenewalSpec TrafficModel::spec_for_rate(double mean_rate) const {
    switch (kind) {
        case Kind::Irm: return RenewalSpec::poisson(mean_rate);
        case Kind::HyperZ: return RenewalSpec::hyper_z(mean_rate, z);
        case Kind::Ipp: {
            double t_off = t_off_ratio * t_on;
            double nu = mean_rate * (t_on + t_off) / t_on;
            return RenewalSpec::ipp(nu, t_on, t_off);
        }
    }
    throw std::logic_error("TrafficModel: unknown kind");
}

std::string TrafficModel::label() const {
    switch (kind) {
        case Kind::Irm: return "irm";
        case Kind::HyperZ: return "hyperz";
        case Kind::Ipp: return "ipp";
    }
    return "?";
}

void SystemConfig::validate() const {
    if (cache_capacity < 1) throw std::domain_error("SystemConfig: cache capacity must be >= 1");
    if (!(download_delay >= 0.0)) throw std::domain_error("SystemConfig: download delay must be >= 0");
    if (policy == Policy::TwoLru && filter_size < 1) {
        throw std::domain_error("SystemConfig: filter size must be >= 1 for the 2-LRU policy");
    }
}

const char* policy_name(Policy policy) {
    switch (policy) {
        case Policy::ZddLru: return "zdd-lru";
        case Policy::Lru: return "lru";
        case Policy::TwoLru: return "2lru";
    }
    return "?";
}

std::vector<ContentBand> content_bands(const ZipfCatalog& catalog, const SolverOptions& opts) {
    if (opts.exact_limit < 1) throw std::domain_error("SolverOptions: exact_limit must be >= 1");
    if (opts.buckets_per_decade < 1) {
        throw std::domain_error("SolverOptions: buckets_per_decade must be >= 1");
    }
    std::uint64_t total = catalog.contents();
    std::uint64_t exact = std::min(total, opts.exact_limit);
    std::vector<ContentBand> bands;
    bands.reserve(exact + 256);
    for (std::uint64_t k = 1; k <= exact; ++k) {
        bands.push_back({k, k, k, 1.0, catalog.popularity(k), catalog.rate(k)});
    }
    if (total > exact) {
        double ratio = std::pow(10.0, 1.0 / static_cast<double>(opts.buckets_per_decade));
        std::uint64_t lo = exact + 1;
        while (lo <= total) {
            auto next = static_cast<std::uint64_t>(std::ceil(static_cast<double>(lo) * ratio));
            std::uint64_t hi = std::min(total, next > lo ? next - 1 : lo);
            auto rep = static_cast<std::uint64_t>(
                std::floor(std::sqrt(static_cast<double>(lo) * static_cast<double>(hi))));
            rep = std::min(std::max(rep, lo), hi);
            bands.push_back({lo, hi, rep, static_cast<double>(hi - lo + 1),
                             catalog.popularity_mass(lo, hi), catalog.rate(rep)});
            lo = hi + 1;
        }
    }
    return bands;
}

namespace {

// Flattened per-band state consumed by the fixed-point iteration.
struct BandWork {
    double w1 = 1.0, mu1 = 1.0, w2 = 0.0, mu2 = 1.0;
    double lam = 0.0;
    double count = 0.0, mass = 0.0;
    double l1 = 1.0, l2 = 1.0;   // Laplace transform of the fitted residual at mu1/mu2
    double inv_m_d1 = 1.0;       // 1 / (m(D) + 1)
    double m_d = 0.0;            // m(D)
    double q = 1.0;              // admission probability
    std::uint64_t representative = 0;
};

// 1 - ex where ex = exp(-x); series below the cancellation threshold.
inline double complement(double x, double ex) {
    if (x < 1e-3) return x * (1.0 - 0.5 * x + x * x / 6.0 - x * x * x / 24.0);
    return 1.0 - ex;
}

struct BandPoint {
    double f = 0.0, sf = 1.0, fhat = 0.0, rho = 0.0, rho_prime = 0.0;
};

inline BandPoint band_point(const BandWork& b, double t) {
    BandPoint p;
    double x1 = b.mu1 * t;
    double ex1 = std::exp(-x1);
    double e1 = complement(x1, ex1);
    double e2 = 0.0, ex2 = 0.0;
    if (b.w2 != 0.0) {
        double x2 = b.mu2 * t;
        ex2 = std::exp(-x2);
        e2 = complement(x2, ex2);
    }
    p.f = b.w1 * e1 + b.w2 * e2;
    p.sf = b.w1 * ex1 + b.w2 * ex2;
    p.fhat = b.lam * (b.w1 * e1 / b.mu1 + b.w2 * e2 / b.mu2);
    p.rho = b.w1 * e1 * b.l1 + b.w2 * e2 * b.l2;
    p.rho_prime = b.lam * (b.w1 * e1 * b.l1 / b.mu1 + b.w2 * e2 * b.l2 / b.mu2);
    return p;
}

inline double occupancy(const BandWork& b, const BandPoint& p) {
    if (b.q == 0.0) return 0.0;
    double denom = p.sf + p.rho * b.q;
    if (denom == 0.0) return 1.0;  // both survival and rho underflowed: pinned content
    return b.q * (p.rho * p.fhat + p.rho_prime * p.sf) / denom;
}

inline double hit_probability(const BandWork& b, const BandPoint& p) {
    if (b.q == 0.0) return 0.0;
    double denom = p.sf + p.rho * b.q;
    if (denom == 0.0) return 1.0;
    return p.rho * b.q / denom;
}

std::vector<BandWork> build_works(const SystemConfig& config, const std::vector<ContentBand>& bands,
                                  const SolverOptions& opts, bool with_delay) {
    std::vector<BandWork> works(bands.size());
    double d = config.download_delay;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& band = bands[i];
        BandWork w;
        RenewalSpec spec = config.traffic.spec_for_rate(band.rate);
        w.w1 = spec.branch_weight(0);
        w.mu1 = spec.branch_rate(0);
        if (spec.branch_count() == 2) {
            w.w2 = spec.branch_weight(1);
            w.mu2 = spec.branch_rate(1);
        }
        w.lam = spec.mean_rate();
        w.count = band.count;
        w.mass = band.mass;
        w.representative = band.representative;
        if (with_delay && d > 0.0) {
            RenewalFunction rf(spec, opts.forcing);
            w.m_d = rf(d);
            w.inv_m_d1 = 1.0 / (1.0 + w.m_d);
            double er1 = residual_moment_sum(spec, d, 1, opts.forcing) / (w.m_d + 1.0);
            double er2 = residual_moment_sum(spec, d, 2, opts.forcing) / (w.m_d + 1.0);
            ResidualFit fit = fit_residual(er1, er2);
            w.l1 = fit.laplace(w.mu1);
            w.l2 = fit.laplace(w.mu2);
        }
        works[i] = w;
    }
    return works;
}

template <typename Objective>
double bisect_characteristic_time(Objective obj, double target, double start_hi, double rel_tol,
                                  const char* what) {
    double lo = 1e-12;
    if (obj(lo) > target) {
        std::ostringstream msg;
        msg << what << ": occupancy already exceeds " << target << " at t = " << lo;
        throw numeric_error(msg.str());
    }
    double hi = std::max(start_hi, 2e-12);
    int guard = 0;
    while (obj(hi) < target) {
        hi *= 2.0;
        if (++guard > 400) {
            std::ostringstream msg;
            msg << what << ": no upper bracket below t = " << hi;
            throw numeric_error(msg.str());
        }
    }
    while ((hi - lo) > rel_tol * hi) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (obj(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double zdd_objective(const std::vector<BandWork>& works, double t) {
    CompensatedSum acc;
    for (const auto& w : works) acc.add(w.count * band_point(w, t).fhat);
    return acc.value();
}

double occupancy_objective(const std::vector<BandWork>& works, double t) {
    CompensatedSum acc;
    for (const auto& w : works) acc.add(w.count * occupancy(w, band_point(w, t)));
    return acc.value();
}

void check_capacity(const SystemConfig& config, std::uint64_t capacity, const char* what) {
    if (capacity >= config.catalog.contents()) {
        std::ostringstream msg;
        msg << what << ": capacity " << capacity << " must be smaller than the catalogue size "
            << config.catalog.contents();
        throw std::domain_error(msg.str());
    }
}

struct PerBand {
    double p_in, p_hit, p_pit, p_fwd;
};

SolveResult assemble(const SystemConfig& config, const SolverOptions& opts,
                     const std::vector<BandWork>& works, Policy policy, double t_c, double t_m,
                     bool zdd) {
    SolveResult res;
    res.policy = policy;
    res.t_c = t_c;
    res.t_m = t_m;
    CompensatedSum mass_acc, in_acc, hit_acc, pit_acc, fwd_acc;
    if (opts.keep_per_content) res.per_content.reserve(works.size());
    for (const auto& w : works) {
        BandPoint p = band_point(w, t_c);
        PerBand m{};
        if (zdd) {
            m.p_in = p.fhat;
            m.p_hit = p.f;
            m.p_fwd = 1.0 - m.p_hit;
            m.p_pit = 0.0;
        } else {
            m.p_in = occupancy(w, p);
            m.p_hit = hit_probability(w, p);
            m.p_fwd = (1.0 - m.p_hit) * w.inv_m_d1;
            m.p_pit = 1.0 - m.p_hit - m.p_fwd;
        }
        double identity = m.p_hit + m.p_pit + m.p_fwd;
        if (std::abs(identity - 1.0) > 1e-9 || m.p_in < -1e-9 || m.p_in > 1.0 + 1e-9 ||
            m.p_hit < -1e-9 || m.p_hit > 1.0 + 1e-9 || m.p_fwd < -1e-9 || m.p_pit < -1e-9) {
            std::ostringstream msg;
            msg << "solver: probability contract violated for content " << w.representative
                << " (hit " << m.p_hit << ", pit " << m.p_pit << ", fwd " << m.p_fwd << ")";
            throw numeric_error(msg.str());
        }
        m.p_pit = std::max(m.p_pit, 0.0);
        mass_acc.add(w.mass);
        in_acc.add(w.count * m.p_in);
        hit_acc.add(w.mass * m.p_hit);
        pit_acc.add(w.mass * m.p_pit);
        fwd_acc.add(w.mass * m.p_fwd);
        if (opts.keep_per_content) {
            res.per_content.push_back(
                {w.representative, w.count, w.mass, m.p_in, m.p_hit, m.p_pit, m.p_fwd, w.q});
        }
    }
    double mass = mass_acc.value();
    res.p_hit_cs = hit_acc.value() / mass;
    res.p_hit_pit = pit_acc.value() / mass;
    res.p_fwd = fwd_acc.value() / mass;
    double target = static_cast<double>(config.cache_capacity);
    res.fixed_point_residual = std::abs(in_acc.value() - target) / target;
    return res;
}

}  // namespace

SolveResult solve_zdd_lru(const SystemConfig& config, const SolverOptions& opts) {
    config.validate();
    check_capacity(config, config.cache_capacity, "solve_zdd_lru");
    auto bands = content_bands(config.catalog, opts);
    auto works = build_works(config, bands, opts, /*with_delay=*/false);
    double target = static_cast<double>(config.cache_capacity);
    double t_c = bisect_characteristic_time([&](double t) { return zdd_objective(works, t); },
                                            target, 1.0 / config.catalog.total_rate(),
                                            opts.bisect_rel_tol, "solve_zdd_lru");
    return assemble(config, opts, works, Policy::ZddLru, t_c,
                    std::numeric_limits<double>::quiet_NaN(), /*zdd=*/true);
}

SolveResult solve_nonzdd_lru(const SystemConfig& config, const SolverOptions& opts) {
    config.validate();
    check_capacity(config, config.cache_capacity, "solve_nonzdd_lru");
    auto bands = content_bands(config.catalog, opts);
    auto works = build_works(config, bands, opts, /*with_delay=*/true);
    double target = static_cast<double>(config.cache_capacity);
    double t_c = bisect_characteristic_time([&](double t) { return occupancy_objective(works, t); },
                                            target, 1.0 / config.catalog.total_rate(),
                                            opts.bisect_rel_tol, "solve_nonzdd_lru");
    return assemble(config, opts, works, Policy::Lru, t_c,
                    std::numeric_limits<double>::quiet_NaN(), /*zdd=*/false);
}

double solve_filter(const SystemConfig& config, const SolverOptions& opts) {
    config.validate();
    check_capacity(config, config.filter_size, "solve_filter");
    auto bands = content_bands(config.catalog, opts);
    auto works = build_works(config, bands, opts, /*with_delay=*/false);
    double target = static_cast<double>(config.filter_size);
    return bisect_characteristic_time([&](double t) { return zdd_objective(works, t); }, target,
                                      1.0 / config.catalog.total_rate(), opts.bisect_rel_tol,
                                      "solve_filter");
}

double insertion_probability(const SystemConfig& config, std::uint64_t content, double t_m,
                             double d) {
    if (!(t_m >= 0.0)) throw std::domain_error("insertion_probability: t_m must be >= 0");
    if (!(d >= 0.0)) throw std::domain_error("insertion_probability: d must be >= 0");
    RenewalSpec spec = config.traffic.spec_for_rate(config.catalog.rate(content));
    double m_d = d > 0.0 ? renewal_function(spec, d) : 0.0;
    double filter_miss = spec.survival(t_m);
    if (filter_miss == 0.0) return 1.0;
    // 1 - (1 - F(t_m))^(m(d) + 1) with a real-valued exponent
    return -std::expm1((m_d + 1.0) * std::log(filter_miss));
}

SolveResult solve_nonzdd_2lru(const SystemConfig& config, const SolverOptions& opts) {
    config.validate();
    check_capacity(config, config.cache_capacity, "solve_nonzdd_2lru");
    check_capacity(config, config.filter_size, "solve_nonzdd_2lru (filter)");
    auto bands = content_bands(config.catalog, opts);
    auto works = build_works(config, bands, opts, /*with_delay=*/true);

    double filter_target = static_cast<double>(config.filter_size);
    double t_m = bisect_characteristic_time([&](double t) { return zdd_objective(works, t); },
                                            filter_target, 1.0 / config.catalog.total_rate(),
                                            opts.bisect_rel_tol, "solve_nonzdd_2lru (filter)");
    double filter_residual = std::abs(zdd_objective(works, t_m) - filter_target) / filter_target;

    // The filter and CS-PIT states are treated as independent: each band's
    // admission probability is fixed by t_m before the cache fixed point.
    for (auto& w : works) {
        if (!std::isnan(opts.force_admission)) {
            w.q = opts.force_admission;
            continue;
        }
        double x1 = w.mu1 * t_m;
        double miss = w.w1 * std::exp(-x1) + (w.w2 != 0.0 ? w.w2 * std::exp(-w.mu2 * t_m) : 0.0);
        w.q = miss == 0.0 ? 1.0 : -std::expm1((w.m_d + 1.0) * std::log(miss));
    }

    double target = static_cast<double>(config.cache_capacity);
    double t_c = bisect_characteristic_time([&](double t) { return occupancy_objective(works, t); },
                                            target, 1.0 / config.catalog.total_rate(),
                                            opts.bisect_rel_tol, "solve_nonzdd_2lru");
    SolveResult res = assemble(config, opts, works, Policy::TwoLru, t_c, t_m, /*zdd=*/false);
    res.filter_residual = filter_residual;
    return res;
}

SolveResult solve(const SystemConfig& config, const SolverOptions& opts) {
    switch (config.policy) {
        case Policy::ZddLru: return solve_zdd_lru(config, opts);
        case Policy::Lru: return solve_nonzdd_lru(config, opts);
        case Policy::TwoLru: return solve_nonzdd_2lru(config, opts);
    }
    throw std::logic_error("solve: unknown policy");
}

double occupancy_sum(const SystemConfig& config, double t, const SolverOptions& opts) {
    config.validate();
    if (!(t >= 0.0)) throw std::domain_error("occupancy_sum: t must be >= 0");
    auto bands = content_bands(config.catalog, opts);
    if (config.policy == Policy::ZddLru) {
        auto works = build_works(config, bands, opts, /*with_delay=*/false);
        return zdd_objective(works, t);
    }
    auto works = build_works(config, bands, opts, /*with_delay=*/true);
    if (config.policy == Policy::TwoLru) {
        check_capacity(config, config.filter_size, "occupancy_sum (filter)");
        double t_m = bisect_characteristic_time(
            [&](double x) { return zdd_objective(works, x); },
            static_cast<double>(config.filter_size), 1.0 / config.catalog.total_rate(),
            opts.bisect_rel_tol, "occupancy_sum (filter)");
        for (auto& w : works) {
            if (!std::isnan(opts.force_admission)) {
                w.q = opts.force_admission;
                continue;
            }
            double miss = w.w1 * std::exp(-w.mu1 * t_m) +
                          (w.w2 != 0.0 ? w.w2 * std::exp(-w.mu2 * t_m) : 0.0);
            w.q = miss == 0.0 ? 1.0 : -std::expm1((w.m_d + 1.0) * std::log(miss));
        }
    }
    return occupancy_objective(works, t);
}

AggregateMetrics aggregate_metrics(const std::vector<ContentMetrics>& rows) {
    CompensatedSum mass_acc, hit_acc, pit_acc, fwd_acc;
    for (const auto& r : rows) {
        mass_acc.add(r.mass);
        hit_acc.add(r.mass * r.p_hit_cs);
        pit_acc.add(r.mass * r.p_hit_pit);
        fwd_acc.add(r.mass * r.p_fwd);
    }
    double mass = mass_acc.value();
    if (mass <= 0.0) throw std::domain_error("aggregate_metrics: no popularity mass");
    return {hit_acc.value() / mass, pit_acc.value() / mass, fwd_acc.value() / mass};
}

}  // namespace cspit
