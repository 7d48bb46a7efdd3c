#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cspit/errors.hpp"
#include "cspit/scenario.hpp"

using namespace cspit;

namespace {

// Minimal CSV reader used as the round-trip oracle for the writer.
std::vector<ResultRow> parse_csv_text(const std::string& text) {
    std::vector<ResultRow> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    auto num = [](const std::string& field) {
        return field.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(field);
    };
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string cur;
        std::istringstream ls(line);
        while (std::getline(ls, cur, ',')) fields.push_back(cur);
        while (fields.size() < 13) fields.emplace_back();
        ResultRow r;
        r.scenario = fields[0];
        r.policy = fields[1];
        r.traffic = fields[2];
        r.param_name = fields[3];
        r.param_value = num(fields[4]);
        r.source = fields[5];
        r.p_hit_cs = num(fields[6]);
        r.p_hit_pit = num(fields[7]);
        r.p_fwd = num(fields[8]);
        r.half_width = num(fields[9]);
        r.t_c = num(fields[10]);
        r.t_m = num(fields[11]);
        r.wall_time_s = num(fields[12]);
        rows.push_back(r);
    }
    return rows;
}

bool same_number(double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return true;
    if (std::isnan(a) || std::isnan(b)) return false;
    return a == b || std::abs(a - b) <= 5e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("empty config gives the default parameter set") {
    Scenario s = load_config_text("{}");
    CHECK(s.catalogue_size == 1'000'000);
    CHECK(s.alpha == 0.8);
    CHECK(s.cache_capacity == 1000);
    CHECK(s.filter_size == 0);  // follows the cache capacity
    CHECK(s.download_delay == doctest::Approx(0.1));
    CHECK(s.request_rate == doctest::Approx(1e5));
    CHECK(s.z == 10.0);
    CHECK(s.traffic.size() == 2);
    CHECK(s.policies.size() == 2);
    CHECK(s.mode == RunMode::Analysis);
}

TEST_CASE("config validation errors name the field") {
    CHECK_THROWS_WITH_AS(load_config_text(R"({"download_delay": -0.1})"),
                         doctest::Contains("download_delay"), config_error);
    CHECK_THROWS_WITH_AS(load_config_text(R"({"alpha": -1})"), doctest::Contains("alpha"),
                         config_error);
    CHECK_THROWS_WITH_AS(load_config_text(R"({"frobnicate": 1})"), doctest::Contains("frobnicate"),
                         config_error);
    CHECK_THROWS_WITH_AS(load_config_text("{ nope"), doctest::Contains("parse error"),
                         config_error);
    CHECK_THROWS_WITH_AS(load_config_text(R"({"policies": ["mru"]})"), doctest::Contains("mru"),
                         config_error);
    CHECK_THROWS_WITH_AS(
        load_config_text(R"({"sweep": {"parameter": "request_rate", "values": [2, 1]}})"),
        doctest::Contains("sorted"), config_error);
}

TEST_CASE("durations accept ms, s and day suffixes") {
    Scenario ms = load_config_text(R"({"download_delay": "250ms"})");
    CHECK(ms.download_delay == doctest::Approx(0.25));
    Scenario s = load_config_text(R"({"download_delay": "2s"})");
    CHECK(s.download_delay == doctest::Approx(2.0));
    Scenario day = load_config_text(R"({"ipp": {"t_on": "1day"}})");
    CHECK(day.ipp_t_on == doctest::Approx(86400.0));
    CHECK_THROWS_AS(load_config_text(R"({"download_delay": "10fortnights"})"), config_error);
}

TEST_CASE("presets cover the published parameter grids") {
    Scenario fig3 = preset("fig3");
    CHECK(fig3.swept == SweptParameter::DownloadDelay);
    CHECK(fig3.sweep_values.front() == 0.0);
    CHECK(fig3.sweep_values.back() == doctest::Approx(0.3));
    CHECK(fig3.sweep_values.size() == 7);

    Scenario fig4 = preset("fig4");
    CHECK(fig4.swept == SweptParameter::CacheCapacity);
    CHECK(fig4.capacity_units == CapacityUnits::Fraction);
    CHECK(fig4.sweep_values.front() == doctest::Approx(1e-4));
    CHECK(fig4.sweep_values.back() == doctest::Approx(0.5));

    Scenario fig5 = preset("fig5");
    CHECK(fig5.sweep_values.front() == doctest::Approx(10.0));
    CHECK(fig5.sweep_values.back() == doctest::Approx(1e6));

    Scenario fig6 = preset("fig6");
    CHECK(fig6.sweep_values.front() == doctest::Approx(1e5));
    CHECK(fig6.sweep_values.back() == doctest::Approx(1e9));
    CHECK(fig6.policies.size() == 4);  // delay-aware plus zero-delay baselines

    Scenario fig7 = preset("fig7");
    CHECK(fig7.forbid_simulation);
    REQUIRE(fig7.traffic.size() == 2);
    for (const auto& t : fig7.traffic) {
        double days = t.model.t_on / 86400.0;
        CHECK(t.catalogue_override ==
              static_cast<std::uint64_t>(std::llround(10.0 * 5e4 * days)));
        CHECK(t.capacity_override == t.catalogue_override / 100);
        CHECK(t.model.t_off_ratio == doctest::Approx(9.0));
    }

    Scenario fig8 = preset("fig8");
    CHECK(fig8.traffic.size() == 3);
    CHECK(fig8.request_rate == doctest::Approx(1e6 * 5e4 / 86400.0));
    CHECK(fig8.forbid_simulation);
    CHECK_THROWS_AS(preset("fig9"), config_error);
}

TEST_CASE("lifetime presets refuse simulation mode") {
    Scenario fig7 = preset("fig7");
    fig7.mode = RunMode::Simulation;
    CHECK_THROWS_AS(run_scenario(fig7, 1), config_error);
}

TEST_CASE("cell building applies sweeps, baselines and desk scaling") {
    Scenario s = preset("fig3");
    auto cfg = cell_system(s, s.traffic[0], s.policies[0], 0.2, false);
    CHECK(cfg.download_delay == doctest::Approx(0.2));
    CHECK(cfg.catalog.contents() == 1'000'000);
    CHECK(cfg.cache_capacity == 1000);
    CHECK(cfg.filter_size == 1000);

    auto desk = cell_system(s, s.traffic[0], s.policies[0], 0.2, true);
    CHECK(desk.catalog.contents() == 10'000);
    CHECK(desk.cache_capacity == 10);
    CHECK(desk.catalog.total_rate() == doctest::Approx(1e3));
    CHECK(desk.download_delay == doctest::Approx(0.2));  // delay is never scaled

    Scenario fig6 = preset("fig6");
    auto zdd = cell_system(fig6, fig6.traffic[0], fig6.policies[2], 1e7, false);
    CHECK(zdd.download_delay == 0.0);
    CHECK(zdd.catalog.contents() == 10'000'000);
    CHECK(zdd.cache_capacity == 10'000);  // capacity tracks the swept catalogue

    Scenario fig8 = preset("fig8");
    auto frac = cell_system(fig8, fig8.traffic[0], fig8.policies[0], 1e-3, false);
    CHECK(frac.catalog.contents() == 500'000);
    CHECK(frac.cache_capacity == 500);
}

TEST_CASE("csv output") {
    ResultRow row;
    row.scenario = "unit";
    row.policy = "lru";
    row.traffic = "irm";
    row.param_name = "download_delay";
    row.param_value = 0.1;
    row.source = "analysis";
    row.p_hit_cs = 0.25;
    row.p_hit_pit = 0.125;
    row.p_fwd = 0.625;
    row.half_width = std::numeric_limits<double>::quiet_NaN();
    row.t_c = 0.0123456789012;
    row.t_m = std::numeric_limits<double>::quiet_NaN();
    row.wall_time_s = 1.5;

    SUBCASE("single row has a header and one line") {
        std::string text = csv_text({row});
        CHECK(text == "scenario,policy,traffic,param_name,param_value,source,"
                      "p_hit_cs,p_hit_pit,p_fwd,half_width,t_c,t_m,wall_time_s\n"
                      "unit,lru,irm,download_delay,0.1,analysis,"
                      "0.25,0.125,0.625,,0.0123456789012,,1.5\n");
    }
    SUBCASE("identical rows make byte-identical files") {
        CHECK(csv_text({row, row}) == csv_text({row, row}));
    }
    SUBCASE("rows round-trip through the text form") {
        ResultRow other = row;
        other.policy = "2lru";
        other.t_m = 0.05;
        other.half_width = 0.001;
        std::string text = csv_text({row, other});
        auto parsed = parse_csv_text(text);
        REQUIRE(parsed.size() == 2);
        const ResultRow* originals[2] = {&row, &other};
        for (int i = 0; i < 2; ++i) {
            CHECK(parsed[i].scenario == originals[i]->scenario);
            CHECK(parsed[i].policy == originals[i]->policy);
            CHECK(parsed[i].traffic == originals[i]->traffic);
            CHECK(parsed[i].param_name == originals[i]->param_name);
            CHECK(same_number(parsed[i].param_value, originals[i]->param_value));
            CHECK(parsed[i].source == originals[i]->source);
            CHECK(same_number(parsed[i].p_hit_cs, originals[i]->p_hit_cs));
            CHECK(same_number(parsed[i].p_hit_pit, originals[i]->p_hit_pit));
            CHECK(same_number(parsed[i].p_fwd, originals[i]->p_fwd));
            CHECK(same_number(parsed[i].half_width, originals[i]->half_width));
            CHECK(same_number(parsed[i].t_c, originals[i]->t_c));
            CHECK(same_number(parsed[i].t_m, originals[i]->t_m));
            CHECK(same_number(parsed[i].wall_time_s, originals[i]->wall_time_s));
        }
    }
}

TEST_CASE("run_scenario executes every cell and keeps going past failures") {
    Scenario s = load_config_text(R"({
        "name": "mini",
        "catalogue_size": 400,
        "cache_capacity": 8,
        "request_rate": 200,
        "download_delay": "50ms",
        "traffic": ["irm", "hyperz"],
        "policies": ["lru", "2lru"],
        "mode": "both",
        "simulation": {"requests": 100000, "seed": 3}
    })");
    auto outcome = run_scenario(s, 2);
    CHECK(outcome.errors.empty());
    CHECK(outcome.rows.size() == 8);  // 2 traffic x 2 policies x {analysis, simulation}
    for (const auto& row : outcome.rows) {
        CHECK(std::abs(row.p_hit_cs + row.p_hit_pit + row.p_fwd - 1.0) <= 1e-9);
        if (row.source == "analysis") {
            CHECK(std::isnan(row.half_width));
            CHECK(row.wall_time_s >= 0.0);
        } else {
            CHECK(std::isnan(row.t_c));
            CHECK(std::isnan(row.wall_time_s));
        }
    }
    // analysis rows for matched cells should track the simulation closely
    for (std::size_t i = 0; i + 1 < outcome.rows.size(); i += 2) {
        const auto& a = outcome.rows[i];
        const auto& b = outcome.rows[i + 1];
        REQUIRE(a.policy == b.policy);
        REQUIRE(a.traffic == b.traffic);
        CHECK(std::abs(a.p_hit_cs - b.p_hit_cs) < 0.05);
    }

    SUBCASE("failed cells are reported, good cells survive") {
        Scenario bad = s;
        bad.filter_size = 400;  // filter as large as the catalogue: 2-lru solves must reject
        bad.mode = RunMode::Analysis;
        auto partial = run_scenario(bad, 2);
        CHECK(partial.rows.size() == 2);    // the plain-lru cells still complete
        CHECK(partial.errors.size() == 2);  // one error per 2-lru cell
    }
}

TEST_CASE("emit_csv writes the file it promised") {
    Scenario s = load_config_text(R"({
        "name": "tiny",
        "catalogue_size": 100,
        "cache_capacity": 5,
        "request_rate": 100,
        "policies": ["lru"],
        "traffic": ["irm"]
    })");
    auto outcome = run_scenario(s, 1);
    REQUIRE(outcome.rows.size() == 1);
    std::string path = "unit_emit_test.csv";
    emit_csv(outcome.rows, path);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == csv_text(outcome.rows));
    std::remove(path.c_str());
}
