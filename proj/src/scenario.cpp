#include "cspit/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cspit/errors.hpp"
#include "cspit/simulator.hpp"

namespace cspit {

namespace {

using nlohmann::json;

constexpr double kSecondsPerDay = 86400.0;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

Scenario base_defaults() {
    Scenario s;
    s.traffic = {{TrafficModel{TrafficModel::Kind::Irm, 10.0, 86400.0, 9.0}, "irm", 0, 0},
                 {TrafficModel{TrafficModel::Kind::HyperZ, 10.0, 86400.0, 9.0}, "hyperz", 0, 0}};
    s.policies = {{Policy::Lru, false, "lru"}, {Policy::TwoLru, false, "2lru"}};
    return s;
}

PolicySelection policy_from_label(const std::string& label) {
    if (label == "lru") return {Policy::Lru, false, label};
    if (label == "2lru") return {Policy::TwoLru, false, label};
    if (label == "zdd-lru") return {Policy::ZddLru, true, label};
    if (label == "zdd-2lru") return {Policy::TwoLru, true, label};
    throw config_error("policies: unknown policy '" + label + "'");
}

double parse_duration(const json& v, const std::string& field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string text = v.get<std::string>();
        std::size_t pos = 0;
        double value;
        try {
            value = std::stod(text, &pos);
        } catch (const std::exception&) {
            throw config_error(field + ": cannot parse duration '" + text + "'");
        }
        std::string suffix = text.substr(pos);
        suffix.erase(0, suffix.find_first_not_of(" \t"));
        if (suffix.empty() || suffix == "s") return value;
        if (suffix == "ms") return value * 1e-3;
        if (suffix == "day" || suffix == "days") return value * kSecondsPerDay;
        throw config_error(field + ": unknown duration unit '" + suffix + "' (use ms, s or day)");
    }
    throw config_error(field + ": expected a number or a duration string");
}

void require_positive(double v, const std::string& field) {
    if (!(v > 0.0)) throw config_error(field + ": must be > 0");
}

void validate_scenario(const Scenario& s) {
    if (s.catalogue_size < 2) throw config_error("catalogue_size: must be >= 2");
    if (s.alpha < 0.0) throw config_error("alpha: must be >= 0");
    if (s.cache_capacity < 1) throw config_error("cache_capacity: must be >= 1");
    if (!(s.download_delay >= 0.0)) throw config_error("download_delay: must be >= 0");
    require_positive(s.request_rate, "request_rate");
    require_positive(s.z, "z");
    require_positive(s.gamma_per_day, "gamma_per_day");
    require_positive(s.ipp_t_on, "ipp.t_on");
    require_positive(s.ipp_t_off_ratio, "ipp.t_off_ratio");
    if (!(s.sim_scale > 0.0 && s.sim_scale <= 1.0)) throw config_error("simulation.scale: must be in (0, 1]");
    if (s.sim_requests < 1) throw config_error("simulation.requests: must be >= 1");
    if (s.replications < 1) throw config_error("simulation.replications: must be >= 1");
    if (s.traffic.empty()) throw config_error("traffic: at least one traffic model required");
    if (s.policies.empty()) throw config_error("policies: at least one policy required");
    if (s.swept != SweptParameter::None && s.sweep_values.empty()) {
        throw config_error("sweep.values: empty sweep");
    }
    for (std::size_t i = 0; i < s.sweep_values.size(); ++i) {
        double v = s.sweep_values[i];
        bool delay_sweep = s.swept == SweptParameter::DownloadDelay;
        if (!(delay_sweep ? v >= 0.0 : v > 0.0)) {
            throw config_error("sweep.values: values must be positive");
        }
        if (i > 0 && !(s.sweep_values[i - 1] < v)) {
            throw config_error("sweep.values: values must be sorted ascending");
        }
    }
    if (s.forbid_simulation && s.mode != RunMode::Analysis) {
        throw config_error("mode: " + s.forbid_reason);
    }
}

}  // namespace

const char* swept_parameter_name(SweptParameter p) {
    switch (p) {
        case SweptParameter::None: return "none";
        case SweptParameter::DownloadDelay: return "download_delay";
        case SweptParameter::CacheCapacity: return "cache_capacity";
        case SweptParameter::RequestRate: return "request_rate";
        case SweptParameter::CatalogueSize: return "catalogue_size";
        case SweptParameter::RequestDensity: return "request_density";
        case SweptParameter::OnDuration: return "on_duration";
    }
    return "?";
}

namespace {

SweptParameter swept_from_name(const std::string& name) {
    for (SweptParameter p :
         {SweptParameter::None, SweptParameter::DownloadDelay, SweptParameter::CacheCapacity,
          SweptParameter::RequestRate, SweptParameter::CatalogueSize,
          SweptParameter::RequestDensity, SweptParameter::OnDuration}) {
        if (name == swept_parameter_name(p)) return p;
    }
    throw config_error("sweep.parameter: unknown parameter '" + name + "'");
}

void check_known_keys(const json& obj, std::initializer_list<const char*> known,
                      const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw config_error(where + ": unknown field '" + it.key() + "'");
    }
}

}  // namespace

Scenario load_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') ++line;
        }
        std::ostringstream msg;
        msg << "parse error at line " << line << ": " << e.what();
        throw config_error(msg.str());
    }
    if (!doc.is_object()) throw config_error("config root must be a JSON object");
    check_known_keys(doc,
                     {"name", "catalogue_size", "alpha", "cache_capacity", "cache_fraction",
                      "filter_size", "download_delay", "request_rate", "z", "gamma_per_day", "ipp",
                      "sweep", "traffic", "policies", "mode", "capacity_units", "simulation"},
                     "config");

    Scenario s = base_defaults();
    if (doc.contains("name")) s.name = doc["name"].get<std::string>();
    if (doc.contains("catalogue_size")) {
        double k = doc["catalogue_size"].get<double>();
        if (!(k >= 2)) throw config_error("catalogue_size: must be >= 2");
        s.catalogue_size = static_cast<std::uint64_t>(std::llround(k));
    }
    if (doc.contains("alpha")) s.alpha = doc["alpha"].get<double>();
    if (doc.contains("cache_capacity") && doc.contains("cache_fraction")) {
        throw config_error("cache_capacity: give either cache_capacity or cache_fraction, not both");
    }
    if (doc.contains("cache_capacity")) {
        double c = doc["cache_capacity"].get<double>();
        if (!(c >= 1)) throw config_error("cache_capacity: must be >= 1");
        s.cache_capacity = static_cast<std::uint64_t>(std::llround(c));
    } else if (doc.contains("cache_fraction")) {
        double frac = doc["cache_fraction"].get<double>();
        require_positive(frac, "cache_fraction");
        s.cache_capacity = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(frac * static_cast<double>(s.catalogue_size))));
    }
    if (doc.contains("filter_size")) {
        double m = doc["filter_size"].get<double>();
        if (!(m >= 0)) throw config_error("filter_size: must be >= 0 (0 means same as cache)");
        s.filter_size = static_cast<std::uint64_t>(std::llround(m));
    }
    if (doc.contains("download_delay")) {
        s.download_delay = parse_duration(doc["download_delay"], "download_delay");
        if (!(s.download_delay >= 0.0)) throw config_error("download_delay: must be >= 0");
    }
    if (doc.contains("request_rate")) s.request_rate = doc["request_rate"].get<double>();
    if (doc.contains("z")) s.z = doc["z"].get<double>();
    if (doc.contains("gamma_per_day")) s.gamma_per_day = doc["gamma_per_day"].get<double>();
    if (doc.contains("ipp")) {
        const json& ipp = doc["ipp"];
        check_known_keys(ipp, {"t_on", "t_off_ratio"}, "ipp");
        if (ipp.contains("t_on")) s.ipp_t_on = parse_duration(ipp["t_on"], "ipp.t_on");
        if (ipp.contains("t_off_ratio")) s.ipp_t_off_ratio = ipp["t_off_ratio"].get<double>();
    }
    if (doc.contains("sweep")) {
        const json& sweep = doc["sweep"];
        check_known_keys(sweep, {"parameter", "values"}, "sweep");
        if (!sweep.contains("parameter") || !sweep.contains("values")) {
            throw config_error("sweep: needs both 'parameter' and 'values'");
        }
        s.swept = swept_from_name(sweep["parameter"].get<std::string>());
        for (const auto& v : sweep["values"]) {
            bool time_valued = s.swept == SweptParameter::DownloadDelay ||
                               s.swept == SweptParameter::OnDuration;
            s.sweep_values.push_back(time_valued ? parse_duration(v, "sweep.values")
                                                 : v.get<double>());
        }
    }
    if (doc.contains("traffic")) {
        s.traffic.clear();
        for (const auto& t : doc["traffic"]) {
            std::string label = t.get<std::string>();
            TrafficSelection sel;
            sel.label = label;
            sel.model.z = s.z;
            sel.model.t_on = s.ipp_t_on;
            sel.model.t_off_ratio = s.ipp_t_off_ratio;
            if (label == "irm") {
                sel.model.kind = TrafficModel::Kind::Irm;
            } else if (label == "hyperz") {
                sel.model.kind = TrafficModel::Kind::HyperZ;
            } else if (label == "ipp") {
                sel.model.kind = TrafficModel::Kind::Ipp;
            } else {
                throw config_error("traffic: unknown traffic model '" + label + "'");
            }
            s.traffic.push_back(sel);
        }
    } else {
        for (auto& sel : s.traffic) {
            sel.model.z = s.z;
            sel.model.t_on = s.ipp_t_on;
            sel.model.t_off_ratio = s.ipp_t_off_ratio;
        }
    }
    if (doc.contains("policies")) {
        s.policies.clear();
        for (const auto& p : doc["policies"]) s.policies.push_back(policy_from_label(p.get<std::string>()));
    }
    if (doc.contains("mode")) {
        std::string m = doc["mode"].get<std::string>();
        if (m == "analysis") s.mode = RunMode::Analysis;
        else if (m == "simulation") s.mode = RunMode::Simulation;
        else if (m == "both") s.mode = RunMode::Both;
        else throw config_error("mode: expected analysis, simulation or both");
    }
    if (doc.contains("capacity_units")) {
        std::string u = doc["capacity_units"].get<std::string>();
        if (u == "absolute") s.capacity_units = CapacityUnits::Absolute;
        else if (u == "fraction") s.capacity_units = CapacityUnits::Fraction;
        else throw config_error("capacity_units: expected absolute or fraction");
    }
    if (doc.contains("simulation")) {
        const json& sim = doc["simulation"];
        check_known_keys(sim, {"requests", "seed", "replications", "scale"}, "simulation");
        if (sim.contains("requests")) {
            s.sim_requests = static_cast<std::uint64_t>(std::llround(sim["requests"].get<double>()));
        }
        if (sim.contains("seed")) s.seed = sim["seed"].get<std::uint64_t>();
        if (sim.contains("replications")) s.replications = sim["replications"].get<unsigned>();
        if (sim.contains("scale")) s.sim_scale = sim["scale"].get<double>();
    }
    validate_scenario(s);
    return s;
}

Scenario load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_config_text(buffer.str());
}

Scenario preset(const std::string& name) {
    Scenario s = base_defaults();
    s.name = name;
    s.sim_scale = 0.01;  // simulation cells run the documented desk-scale copy
    auto ipp_selection = [&](double days) {
        TrafficSelection sel;
        sel.model.kind = TrafficModel::Kind::Ipp;
        sel.model.t_on = days * kSecondsPerDay;
        sel.model.t_off_ratio = s.ipp_t_off_ratio;
        std::ostringstream label;
        label << "ipp-ton" << static_cast<int>(days) << "d";
        sel.label = label.str();
        // Catalogue tied to the lifetime so the active population stays
        // fixed: K = 10 * gamma * t_on, base capacity C = 0.01 K.
        auto k = static_cast<std::uint64_t>(std::llround(10.0 * s.gamma_per_day * days));
        sel.catalogue_override = k;
        sel.capacity_override = std::max<std::uint64_t>(1, k / 100);
        return sel;
    };
    const std::vector<double> fraction_grid = {1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3,
                                               1e-2, 2e-2, 5e-2, 0.1,  0.2,  0.5};
    if (name == "fig3") {
        s.swept = SweptParameter::DownloadDelay;
        s.sweep_values = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    } else if (name == "fig4") {
        s.swept = SweptParameter::CacheCapacity;
        s.capacity_units = CapacityUnits::Fraction;
        s.sweep_values = fraction_grid;
    } else if (name == "fig5") {
        s.swept = SweptParameter::RequestRate;
        s.sweep_values = {10, 30, 100, 300, 1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6};
    } else if (name == "fig6") {
        s.swept = SweptParameter::CatalogueSize;
        s.sweep_values = {1e5, 3e5, 1e6, 3e6, 1e7, 3e7, 1e8, 3e8, 1e9};
        s.policies = {{Policy::Lru, false, "lru"},
                      {Policy::TwoLru, false, "2lru"},
                      {Policy::ZddLru, true, "zdd-lru"},
                      {Policy::TwoLru, true, "zdd-2lru"}};
    } else if (name == "fig7") {
        s.swept = SweptParameter::RequestDensity;
        s.sweep_values = {1, 3, 10, 30, 100, 300, 1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6};
        s.traffic = {ipp_selection(1.0), ipp_selection(7.0)};
        s.policies = {{Policy::Lru, false, "lru"},
                      {Policy::TwoLru, false, "2lru"},
                      {Policy::ZddLru, true, "zdd-lru"},
                      {Policy::TwoLru, true, "zdd-2lru"}};
        s.forbid_simulation = true;
        s.forbid_reason =
            "this preset models day-scale content lifetimes against sub-second download delays; "
            "the timescale gap makes event-driven simulation infeasible, run it in analysis mode";
    } else if (name == "fig8") {
        s.swept = SweptParameter::CacheCapacity;
        s.capacity_units = CapacityUnits::Fraction;
        s.sweep_values = fraction_grid;
        s.traffic = {ipp_selection(1.0), ipp_selection(7.0), ipp_selection(30.0)};
        for (auto& sel : s.traffic) sel.capacity_override = 0;  // capacity comes from the sweep
        s.request_rate = 1e6 * s.gamma_per_day / kSecondsPerDay;  // density 1e6
        s.policies = {{Policy::Lru, false, "lru"}, {Policy::TwoLru, false, "2lru"}};
        s.forbid_simulation = true;
        s.forbid_reason =
            "this preset models day-scale content lifetimes against sub-second download delays; "
            "the timescale gap makes event-driven simulation infeasible, run it in analysis mode";
    } else {
        throw config_error("preset: unknown preset '" + name +
                           "' (expected fig3, fig4, fig5, fig6, fig7 or fig8)");
    }
    validate_scenario(s);
    return s;
}

SystemConfig cell_system(const Scenario& s, const TrafficSelection& traffic,
                         const PolicySelection& policy, double value, bool desk_scale) {
    std::uint64_t k = traffic.catalogue_override ? traffic.catalogue_override : s.catalogue_size;
    std::uint64_t c = traffic.capacity_override ? traffic.capacity_override : s.cache_capacity;
    double rate = s.request_rate;
    double delay = s.download_delay;
    TrafficModel model = traffic.model;
    double capacity_ratio = static_cast<double>(c) / static_cast<double>(k);

    switch (s.swept) {
        case SweptParameter::None: break;
        case SweptParameter::DownloadDelay: delay = value; break;
        case SweptParameter::CacheCapacity:
            if (s.capacity_units == CapacityUnits::Fraction) {
                c = std::max<std::uint64_t>(
                    1, static_cast<std::uint64_t>(std::llround(value * static_cast<double>(k))));
            } else {
                c = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(value)));
            }
            break;
        case SweptParameter::RequestRate: rate = value; break;
        case SweptParameter::CatalogueSize:
            k = static_cast<std::uint64_t>(std::llround(value));
            c = std::max<std::uint64_t>(
                1, static_cast<std::uint64_t>(std::llround(capacity_ratio * static_cast<double>(k))));
            break;
        case SweptParameter::RequestDensity: rate = value * s.gamma_per_day / kSecondsPerDay; break;
        case SweptParameter::OnDuration: model.t_on = value; break;
    }
    std::uint64_t m = s.filter_size ? s.filter_size : c;
    if (policy.zero_delay) delay = 0.0;
    if (desk_scale && s.sim_scale < 1.0) {
        auto scale = [&](std::uint64_t v) {
            return std::max<std::uint64_t>(
                1, static_cast<std::uint64_t>(std::llround(static_cast<double>(v) * s.sim_scale)));
        };
        std::uint64_t k_scaled = std::max<std::uint64_t>(2, scale(k));
        c = scale(c);
        m = scale(m);
        rate *= s.sim_scale;
        k = k_scaled;
    }
    return SystemConfig{ZipfCatalog(k, s.alpha, rate), model, c, m, delay, policy.policy};
}

namespace {

struct Cell {
    const TrafficSelection* traffic;
    const PolicySelection* policy;
    double value;
    bool simulate;
};

std::string cell_label(const Scenario& s, const Cell& cell) {
    std::ostringstream out;
    out << s.name << "/" << cell.policy->label << "/" << cell.traffic->label << "/"
        << swept_parameter_name(s.swept) << "=" << cell.value << "/"
        << (cell.simulate ? "simulation" : "analysis");
    return out.str();
}

ResultRow run_cell(const Scenario& s, const Cell& cell, std::vector<std::string>& log,
                   std::mutex& log_mutex) {
    ResultRow row;
    row.scenario = s.name;
    row.policy = cell.policy->label;
    row.traffic = cell.traffic->label;
    row.param_name = swept_parameter_name(s.swept);
    row.param_value = cell.value;
    row.t_c = kNaN;
    row.t_m = kNaN;
    row.half_width = kNaN;
    row.wall_time_s = kNaN;
    auto start = std::chrono::steady_clock::now();
    if (!cell.simulate) {
        SolverOptions opts;
        opts.keep_per_content = false;
        SystemConfig config = cell_system(s, *cell.traffic, *cell.policy, cell.value, false);
        SolveResult res = solve(config, opts);
        row.source = "analysis";
        row.p_hit_cs = res.p_hit_cs;
        row.p_hit_pit = res.p_hit_pit;
        row.p_fwd = res.p_fwd;
        row.t_c = res.t_c;
        row.t_m = config.policy == Policy::TwoLru ? res.t_m : kNaN;
        row.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return row;
    }
    SimConfig sim;
    sim.system = cell_system(s, *cell.traffic, *cell.policy, cell.value, true);
    sim.total_requests = s.sim_requests;
    sim.seed = s.seed;
    auto reports = replicate(sim, s.replications);
    ReplicateSummary summary = summarize(reports);
    row.source = "simulation";
    row.p_hit_cs = summary.p_hit_cs;
    row.p_hit_pit = summary.p_hit_pit;
    row.p_fwd = summary.p_fwd;
    row.half_width = std::max({summary.hw_hit_cs, summary.hw_hit_pit, summary.hw_fwd});
    // Wall time is deliberately left out of simulation rows so reruns of the
    // same seed emit byte-identical files; timing goes to the run log.
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream note;
    note << cell_label(s, cell) << ": " << s.replications << " x " << s.sim_requests
         << " requests in " << wall << " s";
    std::lock_guard<std::mutex> lock(log_mutex);
    log.push_back(note.str());
    return row;
}

}  // namespace

RunOutcome run_scenario(const Scenario& s, unsigned parallelism) {
    validate_scenario(s);
    std::vector<Cell> cells;
    std::vector<double> values = s.sweep_values.empty() ? std::vector<double>{0.0} : s.sweep_values;
    bool want_analysis = s.mode != RunMode::Simulation;
    bool want_simulation = s.mode != RunMode::Analysis;
    for (const auto& traffic : s.traffic) {
        for (const auto& policy : s.policies) {
            for (double v : values) {
                if (want_analysis) cells.push_back({&traffic, &policy, v, false});
                if (want_simulation) cells.push_back({&traffic, &policy, v, true});
            }
        }
    }

    RunOutcome outcome;
    std::vector<ResultRow> rows(cells.size());
    std::vector<std::uint8_t> ok(cells.size(), 0);
    std::vector<std::string> errors(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    unsigned workers = std::max(1u, std::min<unsigned>(parallelism, cells.size()));
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                rows[i] = run_cell(s, cells[i], outcome.log, log_mutex);
                ok[i] = 1;
            } catch (const std::exception& e) {
                errors[i] = cell_label(s, cells[i]) + ": " + e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (ok[i]) outcome.rows.push_back(std::move(rows[i]));
        else outcome.errors.push_back(errors[i]);
    }
    std::sort(outcome.rows.begin(), outcome.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.scenario, a.policy, a.traffic, a.param_value, a.source) <
               std::tie(b.scenario, b.policy, b.traffic, b.param_value, b.source);
    });
    return outcome;
}

namespace {

void append_number(std::string& out, double v) {
    if (std::isnan(v)) return;  // missing value -> empty field
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out += buf;
}

}  // namespace

std::string csv_text(const std::vector<ResultRow>& rows) {
    std::string out =
        "scenario,policy,traffic,param_name,param_value,source,"
        "p_hit_cs,p_hit_pit,p_fwd,half_width,t_c,t_m,wall_time_s\n";
    for (const auto& r : rows) {
        out += r.scenario;
        out += ',';
        out += r.policy;
        out += ',';
        out += r.traffic;
        out += ',';
        out += r.param_name;
        out += ',';
        append_number(out, r.param_value);
        out += ',';
        out += r.source;
        out += ',';
        append_number(out, r.p_hit_cs);
        out += ',';
        append_number(out, r.p_hit_pit);
        out += ',';
        append_number(out, r.p_fwd);
        out += ',';
        append_number(out, r.half_width);
        out += ',';
        append_number(out, r.t_c);
        out += ',';
        append_number(out, r.t_m);
        out += ',';
        append_number(out, r.wall_time_s);
        out += '\n';
    }
    return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::domain_error("emit_csv: no rows to write");
    std::string text = csv_text(rows);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    if (std::fwrite(text.data(), 1, text.size(), f) != text.size()) {
        std::fclose(f);
        throw std::runtime_error("emit_csv: short write to " + path);
    }
    std::fclose(f);
}

}  // namespace cspit
