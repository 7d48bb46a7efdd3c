#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cspit/renewal.hpp"
#include "cspit/renewal_math.hpp"
#include "cspit/zipf.hpp"

namespace cspit {

enum class Policy { ZddLru, Lru, TwoLru };

// Per-content request-process family. The catalogue assigns each content its
// mean rate; this descriptor turns a mean rate into the concrete process.
struct TrafficModel {
    enum class Kind { Irm, HyperZ, Ipp };
    Kind kind = Kind::Irm;
    double z = 10.0;            // hyper-z locality factor
    double t_on = 86400.0;      // ipp mean on-period (s)
    double t_off_ratio = 9.0;   // ipp t_off = ratio * t_on

    RenewalSpec spec_for_rate(double mean_rate) const;
    std::string label() const;
};

struct SystemConfig {
    ZipfCatalog catalog;
    TrafficModel traffic;
    std::uint64_t cache_capacity = 0;  // C
    std::uint64_t filter_size = 0;     // M (TwoLru)
    double download_delay = 0.0;       // D seconds
    Policy policy = Policy::Lru;

    void validate() const;  // C >= 1, D >= 0, M >= 1 for TwoLru
};

struct SolverOptions {
    // Contents up to this index are solved individually; beyond it the tail
    // is grouped into geometric popularity buckets.
    std::uint64_t exact_limit = 1'000'000;
    unsigned buckets_per_decade = 32;
    double bisect_rel_tol = 1e-10;
    bool keep_per_content = true;
    RenewalForcing forcing = RenewalForcing::Ordinary;
    // Diagnostic override: when set, the 2-LRU solver uses this admission
    // probability for every content instead of the filter-derived one
    // (NaN = off). Forcing 1 reduces 2-LRU to plain LRU.
    double force_admission = std::numeric_limits<double>::quiet_NaN();
};

// One exact content (count == 1) or one bucket of the tail.
struct ContentBand {
    std::uint64_t first = 0, last = 0, representative = 0;
    double count = 0.0;  // contents represented
    double mass = 0.0;   // popularity mass
    double rate = 0.0;   // representative request rate
};

struct ContentMetrics {
    std::uint64_t representative = 0;
    double count = 0.0, mass = 0.0;
    double p_in_cs = 0.0, p_hit_cs = 0.0, p_hit_pit = 0.0, p_fwd = 0.0;
    double q = 1.0;  // admission probability (TwoLru)
};

struct SolveResult {
    Policy policy = Policy::Lru;
    double t_c = 0.0;
    double t_m = 0.0;  // NaN unless TwoLru
    double p_hit_cs = 0.0, p_hit_pit = 0.0, p_fwd = 0.0;  // request-weighted
    double fixed_point_residual = 0.0;  // |sum_k p_in - C| / C at the solved t_c
    double filter_residual = 0.0;       // same for the filter equation (TwoLru)
    std::vector<ContentMetrics> per_content;
};

std::vector<ContentBand> content_bands(const ZipfCatalog& catalog, const SolverOptions& opts = {});

// Zero-download-delay LRU: bisects sum_k age_cdf_k(t) = C; per-content hit
// probability F_k(T_C), occupancy age_cdf_k(T_C), no PIT hits.
SolveResult solve_zdd_lru(const SystemConfig& config, const SolverOptions& opts = {});

// Non-zero delay LRU: fits the residual download time per content, then
// bisects the occupancy fixed point built from the rho integrals.
SolveResult solve_nonzdd_lru(const SystemConfig& config, const SolverOptions& opts = {});

// Characteristic time of the name filter: sum_k age_cdf_k(t) = M.
double solve_filter(const SystemConfig& config, const SolverOptions& opts = {});

// Admission probability for one content under a filter with characteristic
// time t_m and download delay d: 1 - (1 - F_k(t_m))^(m_k(d) + 1).
double insertion_probability(const SystemConfig& config, std::uint64_t content, double t_m,
                             double d);

// Non-zero delay LRU cache behind an LRU name filter.
SolveResult solve_nonzdd_2lru(const SystemConfig& config, const SolverOptions& opts = {});

// Dispatch on config.policy.
SolveResult solve(const SystemConfig& config, const SolverOptions& opts = {});

// The bisection objective sum_k p_in(k; t) for the configured policy at an
// arbitrary candidate characteristic time t (for TwoLru the filter time is
// solved first). Exposed for monotonicity diagnostics.
double occupancy_sum(const SystemConfig& config, double t, const SolverOptions& opts = {});

// Request-weighted aggregation of per-content metrics.
struct AggregateMetrics {
    double p_hit_cs = 0.0, p_hit_pit = 0.0, p_fwd = 0.0;
};
AggregateMetrics aggregate_metrics(const std::vector<ContentMetrics>& rows);

const char* policy_name(Policy policy);

}  // namespace cspit
