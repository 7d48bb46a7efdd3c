#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cspit/solver.hpp"

namespace cspit {

enum class RunMode { Analysis, Simulation, Both };
enum class SweptParameter {
    None,
    DownloadDelay,
    CacheCapacity,
    RequestRate,
    CatalogueSize,
    RequestDensity,
    OnDuration
};
enum class CapacityUnits { Absolute, Fraction };

struct TrafficSelection {
    TrafficModel model;
    std::string label;
    // Lifetime presets tie the catalogue (and base capacity) to the
    // on-period; zero means "use the scenario base value".
    std::uint64_t catalogue_override = 0;
    std::uint64_t capacity_override = 0;
};

struct PolicySelection {
    Policy policy = Policy::Lru;
    bool zero_delay = false;  // D forced to 0 (the classic-model baseline rows)
    std::string label;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t catalogue_size = 1'000'000;
    double alpha = 0.8;
    std::uint64_t cache_capacity = 1000;
    std::uint64_t filter_size = 0;  // 0 -> same as cache capacity
    double download_delay = 0.1;
    double request_rate = 1e5;
    double z = 10.0;
    double gamma_per_day = 5e4;  // content arrival rate for density sweeps
    double ipp_t_on = 86400.0;
    double ipp_t_off_ratio = 9.0;

    SweptParameter swept = SweptParameter::None;
    std::vector<double> sweep_values;
    std::vector<TrafficSelection> traffic;
    std::vector<PolicySelection> policies;
    RunMode mode = RunMode::Analysis;
    CapacityUnits capacity_units = CapacityUnits::Absolute;

    // Simulation cells run a shrunken copy of the system (catalogue,
    // capacity and request rate all scaled by sim_scale) so that the
    // dimensionless ratios C/K and per-content lambda*D are preserved while
    // runs stay desk-sized. The evaluation presets set 0.01; plain configs
    // simulate exactly what they specify.
    double sim_scale = 1.0;
    std::uint64_t sim_requests = 10'000'000;
    std::uint64_t seed = 1;
    unsigned replications = 1;

    bool forbid_simulation = false;
    std::string forbid_reason;
};

struct ResultRow {
    std::string scenario, policy, traffic, param_name;
    double param_value = 0.0;
    std::string source;  // "analysis" | "simulation"
    double p_hit_cs = 0.0, p_hit_pit = 0.0, p_fwd = 0.0;
    double half_width = 0.0;  // NaN when not applicable
    double t_c = 0.0, t_m = 0.0;
    double wall_time_s = 0.0;
};

struct RunOutcome {
    std::vector<ResultRow> rows;
    std::vector<std::string> errors;  // one entry per failed cell
    std::vector<std::string> log;
};

// Parses and validates a JSON scenario file; unset fields take the default
// system configuration above. Throws config_error with the offending field
// or parse location.
Scenario load_config(const std::string& path);
Scenario load_config_text(const std::string& text);

// Built-in sweeps: fig3 (download delay), fig4 (cache capacity), fig5
// (request rate), fig6 (catalogue size, includes zero-delay baselines),
// fig7 (request density under finite lifetimes), fig8 (capacity under
// finite lifetimes at fixed density). fig7/fig8 are analysis-only.
Scenario preset(const std::string& name);

// Builds the per-cell system configuration (sweep value applied, desk
// scaling when `desk_scale` is set). Exposed for tests.
SystemConfig cell_system(const Scenario& s, const TrafficSelection& traffic,
                         const PolicySelection& policy, double value, bool desk_scale);

// Executes every (traffic x policy x sweep value x source) cell on a small
// worker pool. Failed cells are reported in `errors`; the remaining rows are
// sorted by (scenario, policy, traffic, param_value, source).
RunOutcome run_scenario(const Scenario& s, unsigned parallelism);

// Fixed-format CSV: 12 significant digits, '.' decimal separator, LF line
// endings, empty fields for missing values. Byte-stable for identical rows.
std::string csv_text(const std::vector<ResultRow>& rows);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

const char* swept_parameter_name(SweptParameter p);

}  // namespace cspit
