#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cspit/simulator.hpp"
#include "cspit/solver.hpp"

using namespace cspit;

namespace {

SystemConfig make_config(std::uint64_t k, double alpha, double rate, std::uint64_t c,
                         std::uint64_t m, double d, Policy policy, TrafficModel::Kind kind) {
    TrafficModel traffic;
    traffic.kind = kind;
    return SystemConfig{ZipfCatalog(k, alpha, rate), traffic, c, m, d, policy};
}

}  // namespace

TEST_CASE("zdd solver closed form under uniform popularity") {
    auto config = make_config(1000, 0.0, 50.0, 100, 0, 0.0, Policy::ZddLru, TrafficModel::Kind::Irm);
    auto res = solve_zdd_lru(config);
    double expected_tc = -std::log(1.0 - 0.1) * 1000.0 / 50.0;
    CHECK(res.t_c == doctest::Approx(expected_tc).epsilon(1e-9));
    double sum_in = 0.0;
    for (const auto& row : res.per_content) {
        CHECK(row.p_in_cs == doctest::Approx(0.1).epsilon(1e-9));
        sum_in += row.p_in_cs * row.count;
    }
    CHECK(sum_in == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(res.fixed_point_residual <= 1e-6);
}

TEST_CASE("zdd solver boundary capacity") {
    auto config =
        make_config(50, 0.8, 10.0, 49, 0, 0.0, Policy::ZddLru, TrafficModel::Kind::Irm);
    auto res = solve_zdd_lru(config);
    CHECK(std::isfinite(res.t_c));
    CHECK(res.per_content.back().p_in_cs < 1.0);
    auto bad = make_config(50, 0.8, 10.0, 50, 0, 0.0, Policy::ZddLru, TrafficModel::Kind::Irm);
    CHECK_THROWS_AS(solve_zdd_lru(bad), std::domain_error);
}

TEST_CASE("table-style defaults satisfy the fixed point") {
    auto config =
        make_config(1'000'000, 0.8, 1e5, 1000, 0, 0.0, Policy::ZddLru, TrafficModel::Kind::Irm);
    SolverOptions opts;
    opts.keep_per_content = false;
    auto res = solve_zdd_lru(config, opts);
    CHECK(res.fixed_point_residual <= 1e-6);
}

TEST_CASE("zero delay reduces the delay-aware solver to the zdd solver") {
    for (auto kind : {TrafficModel::Kind::Irm, TrafficModel::Kind::HyperZ}) {
        auto config = make_config(1000, 0.8, 100.0, 10, 0, 0.0, Policy::Lru, kind);
        auto full = solve_nonzdd_lru(config);
        config.policy = Policy::ZddLru;
        auto zdd = solve_zdd_lru(config);
        CHECK(std::abs(full.t_c - zdd.t_c) / zdd.t_c < 1e-9);
        REQUIRE(full.per_content.size() == zdd.per_content.size());
        for (std::size_t i = 0; i < full.per_content.size(); ++i) {
            CHECK(std::abs(full.per_content[i].p_hit_cs - zdd.per_content[i].p_hit_cs) <= 1e-10);
            CHECK(std::abs(full.per_content[i].p_in_cs - zdd.per_content[i].p_in_cs) <= 1e-10);
            CHECK(std::abs(full.per_content[i].p_fwd - zdd.per_content[i].p_fwd) <= 1e-10);
            CHECK(std::abs(full.per_content[i].p_hit_pit) <= 1e-10);
        }
    }
}

TEST_CASE("per-content probability identity and pit sign") {
    auto config =
        make_config(10'000, 0.8, 1e3, 10, 0, 0.1, Policy::Lru, TrafficModel::Kind::HyperZ);
    auto res = solve_nonzdd_lru(config);
    CHECK(res.fixed_point_residual <= 1e-6);
    for (const auto& row : res.per_content) {
        CHECK(std::abs(row.p_hit_cs + row.p_hit_pit + row.p_fwd - 1.0) <= 1e-9);
        CHECK(row.p_hit_pit >= 0.0);
        CHECK(row.p_in_cs >= 0.0);
        CHECK(row.p_in_cs <= 1.0);
    }
}

TEST_CASE("filter characteristic time") {
    SUBCASE("uniform closed form with the filter size as capacity") {
        auto config =
            make_config(1000, 0.0, 50.0, 10, 100, 0.05, Policy::TwoLru, TrafficModel::Kind::Irm);
        double t_m = solve_filter(config);
        CHECK(t_m == doctest::Approx(-std::log(0.9) * 1000.0 / 50.0).epsilon(1e-9));
    }
    SUBCASE("a filter nearly as large as the catalogue passes everything popular") {
        auto config =
            make_config(200, 0.8, 50.0, 10, 199, 0.05, Policy::TwoLru, TrafficModel::Kind::Irm);
        double t_m = solve_filter(config);
        RenewalSpec top = config.traffic.spec_for_rate(config.catalog.rate(1));
        CHECK(top.cdf(t_m) > 0.999);
    }
}

TEST_CASE("admission probability formula") {
    auto config =
        make_config(100, 0.8, 10.0, 5, 5, 0.1, Policy::TwoLru, TrafficModel::Kind::Irm);
    SUBCASE("never a filter hit") {
        CHECK(insertion_probability(config, 1, 0.0, 0.1) == doctest::Approx(0.0));
    }
    SUBCASE("zero delay keeps only the trigger request") {
        RenewalSpec spec = config.traffic.spec_for_rate(config.catalog.rate(3));
        CHECK(insertion_probability(config, 3, 0.2, 0.0) ==
              doctest::Approx(spec.cdf(0.2)).epsilon(1e-12));
    }
    SUBCASE("certain filter hit") {
        CHECK(insertion_probability(config, 1, 1e9, 0.1) == doctest::Approx(1.0));
    }
}

TEST_CASE("forced full admission reduces 2-lru to lru") {
    auto config =
        make_config(2000, 0.8, 200.0, 20, 20, 0.1, Policy::TwoLru, TrafficModel::Kind::HyperZ);
    SolverOptions opts;
    opts.force_admission = 1.0;
    auto two = solve_nonzdd_2lru(config, opts);
    config.policy = Policy::Lru;
    auto lru = solve_nonzdd_lru(config);
    CHECK(std::abs(two.t_c - lru.t_c) / lru.t_c < 1e-10);
    REQUIRE(two.per_content.size() == lru.per_content.size());
    for (std::size_t i = 0; i < two.per_content.size(); ++i) {
        CHECK(std::abs(two.per_content[i].p_hit_cs - lru.per_content[i].p_hit_cs) <= 1e-10);
        CHECK(std::abs(two.per_content[i].p_fwd - lru.per_content[i].p_fwd) <= 1e-10);
    }
}

TEST_CASE("a near-pass-through filter behaves like plain lru") {
    auto config = make_config(1'000'000, 0.8, 1e5, 1000, 999'999, 0.1, Policy::TwoLru,
                              TrafficModel::Kind::Irm);
    SolverOptions opts;
    opts.keep_per_content = false;
    auto two = solve_nonzdd_2lru(config, opts);
    config.policy = Policy::Lru;
    auto lru = solve_nonzdd_lru(config, opts);
    CHECK(std::abs(two.p_hit_cs - lru.p_hit_cs) < 0.01);
}

TEST_CASE("aggregation helper") {
    SUBCASE("single content") {
        std::vector<ContentMetrics> rows = {{1, 1.0, 1.0, 0.5, 0.4, 0.1, 0.5, 1.0}};
        auto agg = aggregate_metrics(rows);
        CHECK(agg.p_hit_cs == doctest::Approx(0.4));
        CHECK(agg.p_hit_pit == doctest::Approx(0.1));
        CHECK(agg.p_fwd == doctest::Approx(0.5));
    }
    SUBCASE("uniform popularity averages plainly") {
        std::vector<ContentMetrics> rows = {{1, 1.0, 0.5, 0.0, 0.2, 0.0, 0.8, 1.0},
                                            {2, 1.0, 0.5, 0.0, 0.6, 0.0, 0.4, 1.0}};
        auto agg = aggregate_metrics(rows);
        CHECK(agg.p_hit_cs == doctest::Approx(0.4));
        CHECK(agg.p_fwd == doctest::Approx(0.6));
    }
}

TEST_CASE("bucketed tail aggregation matches the exact sum at moderate scale") {
    auto config =
        make_config(2'000'000, 0.8, 1e5, 2000, 0, 0.1, Policy::Lru, TrafficModel::Kind::HyperZ);
    SolverOptions bucketed;
    bucketed.exact_limit = 1'000'000;
    bucketed.keep_per_content = false;
    SolverOptions exact;
    exact.exact_limit = 2'000'000;
    exact.keep_per_content = false;
    auto approx = solve_nonzdd_lru(config, bucketed);
    auto full = solve_nonzdd_lru(config, exact);
    CHECK(std::abs(approx.p_hit_cs - full.p_hit_cs) / full.p_hit_cs < 1e-4);
    CHECK(std::abs(approx.p_fwd - full.p_fwd) / full.p_fwd < 1e-4);
    CHECK(std::abs(approx.p_hit_pit - full.p_hit_pit) / std::max(full.p_hit_pit, 1e-6) < 1e-4);
}

TEST_CASE("occupancy sum is monotone in the candidate time") {
    for (auto policy : {Policy::ZddLru, Policy::Lru, Policy::TwoLru}) {
        auto config =
            make_config(500, 0.8, 100.0, 25, 25, 0.05, policy, TrafficModel::Kind::HyperZ);
        double prev = -1.0;
        for (int i = 0; i <= 20; ++i) {
            double t = 1e-4 * std::pow(10.0, 0.25 * i);  // spans ~1e-4 .. 1e1
            double v = occupancy_sum(config, t, {});
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }
}

TEST_CASE("characteristic time grows with capacity") {
    for (auto policy : {Policy::ZddLru, Policy::Lru, Policy::TwoLru}) {
        double prev = 0.0;
        for (std::uint64_t c : {5u, 10u, 20u, 40u, 80u}) {
            auto config =
                make_config(500, 0.8, 100.0, c, c, 0.05, policy, TrafficModel::Kind::HyperZ);
            auto res = solve(config);
            CHECK(res.t_c > prev);
            prev = res.t_c;
        }
    }
}

TEST_CASE("analysis matches simulation at desk scale") {
    // light version of the cross-validation gate: fewer requests, one seed
    for (auto policy : {Policy::Lru, Policy::TwoLru}) {
        for (auto kind : {TrafficModel::Kind::Irm, TrafficModel::Kind::HyperZ}) {
            auto config = make_config(10'000, 0.8, 1e3, 10, 10, 0.1, policy, kind);
            SolverOptions opts;
            opts.keep_per_content = false;
            auto analytic = solve(config, opts);
            SimConfig sim;
            sim.system = config;
            sim.total_requests = 2'000'000;
            sim.seed = 20240601;
            auto measured = run_simulation(sim);
            CHECK(std::abs(analytic.p_hit_cs - measured.p_hit_cs) <= 0.02);
            CHECK(std::abs(analytic.p_hit_pit - measured.p_hit_pit) <= 0.02);
            CHECK(std::abs(analytic.p_fwd - measured.p_fwd) <= 0.02);
        }
    }
}
