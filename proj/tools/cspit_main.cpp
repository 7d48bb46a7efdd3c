#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "cspit/errors.hpp"
#include "cspit/scenario.hpp"
#include "cspit/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

unsigned default_parallelism() {
    if (const char* env = std::getenv("CSPIT_PARALLEL")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

int run_and_emit(const cspit::Scenario& scenario, unsigned parallelism, const std::string& out) {
    cspit::RunOutcome outcome = cspit::run_scenario(scenario, parallelism);
    for (const auto& note : outcome.log) std::fprintf(stderr, "%s\n", note.c_str());
    for (const auto& err : outcome.errors) std::fprintf(stderr, "ERROR %s\n", err.c_str());
    if (outcome.rows.empty()) {
        std::fprintf(stderr, "no cells completed\n");
        return kExitRuntime;
    }
    cspit::emit_csv(outcome.rows, out);
    std::fprintf(stderr, "wrote %zu rows to %s\n", outcome.rows.size(), out.c_str());
    return outcome.errors.empty() ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"characteristic-time analysis and event simulation of an LRU/2-LRU "
                 "content store with request aggregation during download delays"};
    app.require_subcommand(1);

    std::string config_path, out_path, preset_name, mode = "analysis";
    std::uint64_t requests = 0, seed = 0;
    bool have_seed = false;
    unsigned parallelism = default_parallelism();
    unsigned replications = 0;
    std::string per_content_out;

    auto* analyze = app.add_subcommand("analyze", "run the analytical model over a scenario config");
    analyze->add_option("--config", config_path, "scenario JSON file")->required();
    analyze->add_option("--out", out_path, "output CSV path")->required();
    analyze->add_option("--parallel", parallelism, "worker threads");

    auto* simulate = app.add_subcommand("simulate", "run the event-driven simulator over a config");
    simulate->add_option("--config", config_path, "scenario JSON file")->required();
    simulate->add_option("--out", out_path, "output CSV path")->required();
    simulate->add_option("--requests", requests, "counted requests per run (post-warmup)");
    simulate->add_option("--seed", seed, "base RNG seed")->each([&](const std::string&) {
        have_seed = true;
    });
    simulate->add_option("--replications", replications, "independent replications per cell");
    simulate->add_option("--parallel", parallelism, "worker threads");
    simulate->add_option("--per-content-out", per_content_out,
                         "also dump per-content counters (single-cell scenarios only)");

    auto* sweep = app.add_subcommand("sweep", "run a built-in evaluation preset");
    sweep->add_option("--preset", preset_name, "fig3|fig4|fig5|fig6|fig7|fig8")
        ->required()
        ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig6", "fig7", "fig8"}));
    sweep->add_option("--mode", mode, "analysis|simulation|both")
        ->check(CLI::IsMember({"analysis", "simulation", "both"}));
    sweep->add_option("--out", out_path, "output CSV path")->required();
    sweep->add_option("--parallel", parallelism, "worker threads");

    auto* validate = app.add_subcommand("validate", "schema-check a scenario config");
    validate->add_option("--config", config_path, "scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(validate)) {
            cspit::load_config(config_path);
            std::fprintf(stderr, "%s: ok\n", config_path.c_str());
            return kExitOk;
        }
        if (app.got_subcommand(analyze)) {
            cspit::Scenario scenario = cspit::load_config(config_path);
            scenario.mode = cspit::RunMode::Analysis;
            return run_and_emit(scenario, parallelism, out_path);
        }
        if (app.got_subcommand(simulate)) {
            cspit::Scenario scenario = cspit::load_config(config_path);
            if (scenario.forbid_simulation) throw cspit::config_error(scenario.forbid_reason);
            scenario.mode = cspit::RunMode::Simulation;
            if (requests) scenario.sim_requests = requests;
            if (have_seed) scenario.seed = seed;
            if (replications) scenario.replications = replications;
            if (!per_content_out.empty()) {
                if (scenario.traffic.size() != 1 || scenario.policies.size() != 1 ||
                    scenario.sweep_values.size() > 1) {
                    throw cspit::config_error(
                        "--per-content-out: needs a single-cell scenario (one traffic, one "
                        "policy, no multi-value sweep)");
                }
                cspit::SimConfig sim;
                double value = scenario.sweep_values.empty() ? 0.0 : scenario.sweep_values[0];
                sim.system = cspit::cell_system(scenario, scenario.traffic[0],
                                                scenario.policies[0], value, true);
                sim.total_requests = scenario.sim_requests;
                sim.seed = scenario.seed;
                sim.per_content_stats = true;
                cspit::write_per_content_csv(cspit::run_simulation(sim), per_content_out);
                std::fprintf(stderr, "wrote per-content counters to %s\n", per_content_out.c_str());
            }
            return run_and_emit(scenario, parallelism, out_path);
        }
        // sweep
        cspit::Scenario scenario = cspit::preset(preset_name);
        if (mode == "simulation") scenario.mode = cspit::RunMode::Simulation;
        else if (mode == "both") scenario.mode = cspit::RunMode::Both;
        else scenario.mode = cspit::RunMode::Analysis;
        if (scenario.forbid_simulation && scenario.mode != cspit::RunMode::Analysis) {
            throw cspit::config_error(scenario.forbid_reason);
        }
        return run_and_emit(scenario, parallelism, out_path);
    } catch (const cspit::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
