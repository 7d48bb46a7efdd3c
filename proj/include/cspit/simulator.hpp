#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cspit/solver.hpp"

namespace cspit {

// Event-driven CS-PIT simulation of a single run. A run processes request
// arrivals in time order until `total_requests` counted (post-warmup)
// requests have been measured. Warmup discards the first `warmup_requests`
// arrivals and everything before `warmup_time` seconds, whichever lasts
// longer. Each content's first arrival is drawn from the stationary age
// distribution so the request processes are stationary from time zero.
struct SimConfig {
    SystemConfig system;
    std::uint64_t total_requests = 1'000'000;  // counted, post-warmup
    // UINT64_MAX -> total_requests / 10
    std::uint64_t warmup_requests = UINT64_MAX;
    // < 0 -> five characteristic times of the zero-delay model
    double warmup_time = -1.0;
    std::uint64_t seed = 1;
    bool per_content_stats = false;
    // Pre-populates the name filter with every content; with a filter at
    // least as large as the catalogue this forces every admission test to
    // pass (the LRU-degeneracy configuration).
    bool prefill_filter = false;
};

struct PerContentCount {
    std::uint64_t requests = 0, cs_hits = 0, pit_hits = 0, forwards = 0;
};

struct SimReport {
    // counted (post-warmup) totals; cs_hits + pit_hits + forwards == counted_requests
    std::uint64_t counted_requests = 0;
    std::uint64_t cs_hits = 0, pit_hits = 0, forwards = 0;
    // whole-run totals including warmup
    std::uint64_t raw_requests = 0, raw_forwards = 0;
    std::uint64_t completed_downloads = 0, inflight_downloads = 0;
    double p_hit_cs = 0.0, p_hit_pit = 0.0, p_fwd = 0.0;
    // 95% batch-means half-widths (10 batches)
    double hw_hit_cs = 0.0, hw_hit_pit = 0.0, hw_fwd = 0.0;
    std::uint64_t warmup_requests = 0;
    double warmup_time = 0.0;
    double sim_end_time = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    std::vector<PerContentCount> per_content;
};

SimReport run_simulation(const SimConfig& config);

// n independent replications. Replication 0 runs the base seed unchanged;
// replication r > 0 uses derive_stream(seed, r).
std::vector<SimReport> replicate(const SimConfig& config, unsigned runs);

struct ReplicateSummary {
    double p_hit_cs = 0.0, p_hit_pit = 0.0, p_fwd = 0.0;
    double hw_hit_cs = 0.0, hw_hit_pit = 0.0, hw_fwd = 0.0;
    double wall_seconds = 0.0;
};

ReplicateSummary summarize(std::span<const SimReport> reports);

// Per-content counter dump (content,requests,cs_hits,pit_hits,forwards).
void write_per_content_csv(const SimReport& report, const std::string& path);

}  // namespace cspit
