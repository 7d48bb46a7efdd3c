#include "cspit/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "cspit/errors.hpp"
#include "cspit/numeric.hpp"
#include "cspit/rng.hpp"

namespace cspit {

namespace {

constexpr std::uint32_t kNull = 0xFFFFFFFFu;

// Fixed-capacity LRU over dense keys [0, n), intrusive links in flat arrays.
class DenseLru {
public:
    DenseLru(std::uint32_t keys, std::uint64_t capacity)
        : prev_(keys, kNull), next_(keys, kNull), in_(keys, 0),
          capacity_(std::min<std::uint64_t>(capacity, keys)) {}

    bool contains(std::uint32_t k) const { return in_[k] != 0; }
    std::size_t size() const { return size_; }

    void touch(std::uint32_t k) {
        if (head_ == k) return;
        unlink(k);
        push_front(k);
    }

    // Inserts k at the front, evicting the tail when full. Returns the
    // evicted key or kNull.
    std::uint32_t insert_front(std::uint32_t k) {
        std::uint32_t evicted = kNull;
        if (size_ == capacity_) {
            evicted = tail_;
            unlink(evicted);
            in_[evicted] = 0;
            --size_;
        }
        push_front(k);
        in_[k] = 1;
        ++size_;
        return evicted;
    }

private:
    void unlink(std::uint32_t k) {
        std::uint32_t p = prev_[k], n = next_[k];
        if (p != kNull) next_[p] = n; else head_ = n;
        if (n != kNull) prev_[n] = p; else tail_ = p;
        prev_[k] = next_[k] = kNull;
    }

    void push_front(std::uint32_t k) {
        prev_[k] = kNull;
        next_[k] = head_;
        if (head_ != kNull) prev_[head_] = k;
        head_ = k;
        if (tail_ == kNull) tail_ = k;
    }

    std::vector<std::uint32_t> prev_, next_;
    std::vector<std::uint8_t> in_;
    std::uint32_t head_ = kNull, tail_ = kNull;
    std::size_t size_ = 0;
    std::uint64_t capacity_;
};

struct Event {
    double time;
    std::uint64_t seq;
    std::uint32_t content;
    std::uint8_t kind;  // 0 arrival, 1 download completion
};

// Min-heap order: time, then arrivals before completions, then issue order.
struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

// Flat per-content sampling parameters for the interarrival mixture.
struct Sampler {
    double w1, mu1, mu2, eq_w1;
};

double default_warmup_time(const SystemConfig& system) {
    // Five characteristic times of the zero-delay model; when the cache
    // covers the whole catalogue, five mean inter-eviction-free fill times.
    if (system.cache_capacity < system.catalog.contents()) {
        SolverOptions opts;
        opts.keep_per_content = false;
        return 5.0 * solve_zdd_lru(system, opts).t_c;
    }
    return 5.0 * static_cast<double>(system.catalog.contents()) / system.catalog.total_rate();
}

void batch_half_widths(const std::uint64_t (&batch)[10][3], const std::uint64_t (&batch_n)[10],
                       SimReport& report) {
    unsigned used = 0;
    double mean[3] = {0, 0, 0};
    double ratios[10][3];
    for (unsigned b = 0; b < 10; ++b) {
        if (batch_n[b] == 0) continue;
        for (int j = 0; j < 3; ++j) {
            ratios[used][j] = static_cast<double>(batch[b][j]) / static_cast<double>(batch_n[b]);
            mean[j] += ratios[used][j];
        }
        ++used;
    }
    if (used < 2) return;
    for (double& m : mean) m /= used;
    double factor = student_t_975(used - 1) / std::sqrt(static_cast<double>(used));
    double* out[3] = {&report.hw_hit_cs, &report.hw_hit_pit, &report.hw_fwd};
    for (int j = 0; j < 3; ++j) {
        double ss = 0;
        for (unsigned b = 0; b < used; ++b) {
            double d = ratios[b][j] - mean[j];
            ss += d * d;
        }
        *out[j] = factor * std::sqrt(ss / (used - 1));
    }
}

}  // namespace

SimReport run_simulation(const SimConfig& config) {
    const auto wall_start = std::chrono::steady_clock::now();
    const SystemConfig& sys = config.system;
    sys.validate();
    if (config.total_requests < 1) {
        throw std::domain_error("SimConfig: total_requests must be >= 1");
    }
    if (sys.catalog.contents() > (1ull << 31)) {
        throw std::domain_error("SimConfig: catalogue too large to simulate");
    }
    const auto contents = static_cast<std::uint32_t>(sys.catalog.contents());
    const bool two_lru = sys.policy == Policy::TwoLru;
    const double delay = sys.policy == Policy::ZddLru ? 0.0 : sys.download_delay;

    const std::uint64_t warmup_requests = config.warmup_requests == UINT64_MAX
                                              ? config.total_requests / 10
                                              : config.warmup_requests;
    const double warmup_time =
        config.warmup_time >= 0.0 ? config.warmup_time : default_warmup_time(sys);

    std::vector<Sampler> samplers(contents);
    std::vector<Xoshiro256> rng(contents, Xoshiro256(0));
    for (std::uint32_t k = 0; k < contents; ++k) {
        RenewalSpec spec = sys.traffic.spec_for_rate(sys.catalog.rate(k + 1));
        double w1 = spec.branch_weight(0);
        double mu1 = spec.branch_rate(0);
        double mu2 = spec.branch_count() == 2 ? spec.branch_rate(1) : mu1;
        double eq_w1 = spec.branch_count() == 2 ? spec.mean_rate() * w1 / mu1 : 1.0;
        samplers[k] = {spec.branch_count() == 2 ? w1 : 1.0, mu1, mu2, eq_w1};
        rng[k] = Xoshiro256(derive_stream(config.seed, k));
    }

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    std::uint64_t seq = 0;
    for (std::uint32_t k = 0; k < contents; ++k) {
        auto& s = samplers[k];
        double first = rng[k].exponential(rng[k].uniform01() < s.eq_w1 ? s.mu1 : s.mu2);
        queue.push({first, seq++, k, 0});
    }

    DenseLru cs(contents, sys.cache_capacity);
    DenseLru filter(contents, two_lru ? sys.filter_size : 1);
    if (two_lru && config.prefill_filter) {
        for (std::uint32_t k = contents; k-- > 0;) filter.insert_front(k);
    }
    std::vector<std::uint32_t> pit_count(contents, 0);
    std::vector<std::uint8_t> pit_flag(contents, 0);

    SimReport report;
    report.seed = config.seed;
    report.warmup_requests = warmup_requests;
    report.warmup_time = warmup_time;
    if (config.per_content_stats) report.per_content.resize(contents);

    std::uint64_t batch[10][3] = {};
    std::uint64_t batch_n[10] = {};
    const std::uint64_t batch_len = std::max<std::uint64_t>(1, config.total_requests / 10);

    double clock = 0.0;
    while (report.counted_requests < config.total_requests) {
        Event ev = queue.top();
        queue.pop();
        clock = ev.time;
        const std::uint32_t k = ev.content;
        if (ev.kind == 0) {
            auto& s = samplers[k];
            double gap =
                rng[k].exponential(rng[k].uniform01() < s.w1 ? s.mu1 : s.mu2);
            queue.push({clock + gap, seq++, k, 0});

            const bool counted = report.raw_requests >= warmup_requests && clock >= warmup_time;
            ++report.raw_requests;
            bool filter_hit_pre = false;
            if (two_lru) {
                // Membership is tested before this request refreshes the
                // filter; every request refreshes it.
                filter_hit_pre = filter.contains(k);
                if (filter_hit_pre) {
                    filter.touch(k);
                } else {
                    filter.insert_front(k);
                }
            }
            int outcome;  // 0 cs hit, 1 pit hit, 2 forward
            if (cs.contains(k)) {
                assert(pit_count[k] == 0);
                cs.touch(k);
                outcome = 0;
            } else if (pit_count[k] != 0) {
                ++pit_count[k];
                pit_flag[k] |= static_cast<std::uint8_t>(filter_hit_pre);
                outcome = 1;
            } else {
                pit_count[k] = 1;
                pit_flag[k] = static_cast<std::uint8_t>(filter_hit_pre);
                ++report.raw_forwards;
                queue.push({clock + delay, seq++, k, 1});
                outcome = 2;
            }
            if (counted) {
                std::uint64_t b = std::min<std::uint64_t>(report.counted_requests / batch_len, 9);
                ++batch[b][outcome];
                ++batch_n[b];
                ++report.counted_requests;
                switch (outcome) {
                    case 0: ++report.cs_hits; break;
                    case 1: ++report.pit_hits; break;
                    default: ++report.forwards; break;
                }
                if (config.per_content_stats) {
                    auto& pc = report.per_content[k];
                    ++pc.requests;
                    if (outcome == 0) ++pc.cs_hits;
                    else if (outcome == 1) ++pc.pit_hits;
                    else ++pc.forwards;
                }
            }
        } else {
            ++report.completed_downloads;
            const bool admit = !two_lru || pit_flag[k] != 0;
            pit_count[k] = 0;
            pit_flag[k] = 0;
            if (admit) {
                assert(!cs.contains(k));
                cs.insert_front(k);
            }
        }
    }

    report.inflight_downloads = report.raw_forwards - report.completed_downloads;
    report.sim_end_time = clock;
    auto total = static_cast<double>(report.counted_requests);
    report.p_hit_cs = static_cast<double>(report.cs_hits) / total;
    report.p_hit_pit = static_cast<double>(report.pit_hits) / total;
    report.p_fwd = static_cast<double>(report.forwards) / total;
    batch_half_widths(batch, batch_n, report);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return report;
}

std::vector<SimReport> replicate(const SimConfig& config, unsigned runs) {
    if (runs < 1) throw std::domain_error("replicate: need at least one run");
    SimConfig base = config;
    if (base.warmup_time < 0.0) base.warmup_time = default_warmup_time(base.system);
    std::vector<SimReport> reports;
    reports.reserve(runs);
    for (unsigned r = 0; r < runs; ++r) {
        SimConfig cfg = base;
        cfg.seed = r == 0 ? config.seed : derive_stream(config.seed, r);
        reports.push_back(run_simulation(cfg));
    }
    return reports;
}

ReplicateSummary summarize(std::span<const SimReport> reports) {
    if (reports.empty()) throw std::domain_error("summarize: no reports");
    ReplicateSummary s;
    const auto n = static_cast<double>(reports.size());
    for (const auto& r : reports) {
        s.p_hit_cs += r.p_hit_cs;
        s.p_hit_pit += r.p_hit_pit;
        s.p_fwd += r.p_fwd;
        s.wall_seconds += r.wall_seconds;
    }
    s.p_hit_cs /= n;
    s.p_hit_pit /= n;
    s.p_fwd /= n;
    if (reports.size() == 1) {
        s.hw_hit_cs = reports[0].hw_hit_cs;
        s.hw_hit_pit = reports[0].hw_hit_pit;
        s.hw_fwd = reports[0].hw_fwd;
        return s;
    }
    double ss[3] = {0, 0, 0};
    for (const auto& r : reports) {
        double d0 = r.p_hit_cs - s.p_hit_cs;
        double d1 = r.p_hit_pit - s.p_hit_pit;
        double d2 = r.p_fwd - s.p_fwd;
        ss[0] += d0 * d0;
        ss[1] += d1 * d1;
        ss[2] += d2 * d2;
    }
    double factor = student_t_975(static_cast<unsigned>(reports.size() - 1)) / std::sqrt(n);
    s.hw_hit_cs = factor * std::sqrt(ss[0] / (n - 1.0));
    s.hw_hit_pit = factor * std::sqrt(ss[1] / (n - 1.0));
    s.hw_fwd = factor * std::sqrt(ss[2] / (n - 1.0));
    return s;
}

void write_per_content_csv(const SimReport& report, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("write_per_content_csv: cannot open " + path);
    std::fputs("content,requests,cs_hits,pit_hits,forwards\n", f);
    for (std::size_t k = 0; k < report.per_content.size(); ++k) {
        const auto& pc = report.per_content[k];
        std::fprintf(f, "%zu,%llu,%llu,%llu,%llu\n", k + 1,
                     static_cast<unsigned long long>(pc.requests),
                     static_cast<unsigned long long>(pc.cs_hits),
                     static_cast<unsigned long long>(pc.pit_hits),
                     static_cast<unsigned long long>(pc.forwards));
    }
    std::fclose(f);
}

}  // namespace cspit
