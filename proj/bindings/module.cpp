#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cspit/errors.hpp"
#include "cspit/renewal.hpp"
#include "cspit/renewal_math.hpp"
#include "cspit/rng.hpp"
#include "cspit/scenario.hpp"
#include "cspit/simulator.hpp"
#include "cspit/solver.hpp"
#include "cspit/zipf.hpp"

namespace py = pybind11;
using namespace cspit;

namespace {

std::vector<double> draw(const RenewalSpec& spec, std::size_t n, std::uint64_t seed, bool first) {
    Xoshiro256 rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = first ? spec.sample_first_arrival(rng) : spec.sample_interarrival(rng);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Characteristic-time cache models and CS-PIT event simulation";

    py::register_exception<numeric_error>(m, "NumericError");
    py::register_exception<config_error>(m, "ConfigError");

    py::class_<ZipfCatalog>(m, "ZipfCatalog")
        .def(py::init<std::uint64_t, double, double, std::uint64_t>(), py::arg("contents"),
             py::arg("alpha"), py::arg("total_rate"), py::arg("exact_prefix") = 10'000'000)
        .def_property_readonly("contents", &ZipfCatalog::contents)
        .def_property_readonly("alpha", &ZipfCatalog::alpha)
        .def_property_readonly("total_rate", &ZipfCatalog::total_rate)
        .def_property_readonly("normalization", &ZipfCatalog::normalization)
        .def("popularity", &ZipfCatalog::popularity, py::arg("k"))
        .def("rate", &ZipfCatalog::rate, py::arg("k"))
        .def("popularity_mass", &ZipfCatalog::popularity_mass, py::arg("first"), py::arg("last"));

    py::enum_<RenewalKind>(m, "RenewalKind")
        .value("Poisson", RenewalKind::Poisson)
        .value("Hyper2", RenewalKind::Hyper2)
        .value("HyperZ", RenewalKind::HyperZ)
        .value("Ipp", RenewalKind::Ipp);

    py::class_<RenewalSpec>(m, "RenewalSpec")
        .def_static("poisson", &RenewalSpec::poisson, py::arg("rate"))
        .def_static("hyper2", &RenewalSpec::hyper2, py::arg("p1"), py::arg("mu1"), py::arg("mu2"))
        .def_static("hyper_z", &RenewalSpec::hyper_z, py::arg("mean_rate"), py::arg("z"))
        .def_static("ipp", &RenewalSpec::ipp, py::arg("on_rate"), py::arg("t_on"), py::arg("t_off"))
        .def_property_readonly("kind", &RenewalSpec::kind)
        .def_property_readonly("mean_rate", &RenewalSpec::mean_rate)
        .def_property_readonly("branch_count", &RenewalSpec::branch_count)
        .def("branch_weight", &RenewalSpec::branch_weight, py::arg("i"))
        .def("branch_rate", &RenewalSpec::branch_rate, py::arg("i"))
        .def("cdf", &RenewalSpec::cdf, py::arg("t"))
        .def("survival", &RenewalSpec::survival, py::arg("t"))
        .def("density", &RenewalSpec::density, py::arg("t"))
        .def("age_cdf", &RenewalSpec::age_cdf, py::arg("a"))
        .def("interarrival_moment2", &RenewalSpec::interarrival_moment2)
        .def("sample_interarrivals",
             [](const RenewalSpec& s, std::size_t n, std::uint64_t seed) {
                 return draw(s, n, seed, false);
             },
             py::arg("n"), py::arg("seed"))
        .def("sample_first_arrivals",
             [](const RenewalSpec& s, std::size_t n, std::uint64_t seed) {
                 return draw(s, n, seed, true);
             },
             py::arg("n"), py::arg("seed"));

    py::enum_<RenewalForcing>(m, "RenewalForcing")
        .value("Ordinary", RenewalForcing::Ordinary)
        .value("Equilibrium", RenewalForcing::Equilibrium);

    m.def("renewal_function", &renewal_function, py::arg("spec"), py::arg("t"),
          py::arg("forcing") = RenewalForcing::Ordinary);
    m.def("renewal_function_grid", &RenewalFunction::grid_value, py::arg("spec"),
          py::arg("forcing"), py::arg("t"), py::arg("rel_tol") = 1e-6);
    m.def("residual_moment_sum", &residual_moment_sum, py::arg("spec"), py::arg("t"),
          py::arg("order"), py::arg("forcing") = RenewalForcing::Ordinary);
    m.def("residual_moment", &residual_moment, py::arg("spec"), py::arg("d"), py::arg("order"),
          py::arg("forcing") = RenewalForcing::Ordinary);

    py::enum_<ResidualFamily>(m, "ResidualFamily")
        .value("PointMassZero", ResidualFamily::PointMassZero)
        .value("Deterministic", ResidualFamily::Deterministic)
        .value("Exponential", ResidualFamily::Exponential)
        .value("Hyper2", ResidualFamily::Hyper2)
        .value("ErlangLike", ResidualFamily::ErlangLike);

    py::class_<ResidualFit>(m, "ResidualFit")
        .def_readonly("family", &ResidualFit::family)
        .def_readonly("m1", &ResidualFit::m1)
        .def_readonly("m2", &ResidualFit::m2)
        .def_readonly("scv", &ResidualFit::scv)
        .def_readonly("p1", &ResidualFit::p1)
        .def_readonly("p2", &ResidualFit::p2)
        .def_readonly("mu1", &ResidualFit::mu1)
        .def_readonly("mu2", &ResidualFit::mu2)
        .def_readonly("phases", &ResidualFit::phases)
        .def_readonly("erlang_rate", &ResidualFit::erlang_rate)
        .def_readonly("fit_residual", &ResidualFit::fit_residual)
        .def("mean", &ResidualFit::mean)
        .def("second_moment", &ResidualFit::second_moment)
        .def("laplace", &ResidualFit::laplace, py::arg("s"));

    m.def("fit_residual", &fit_residual, py::arg("m1"), py::arg("m2"));
    m.def("rho_integrals",
          [](const RenewalSpec& spec, const ResidualFit& fit, double t_c) {
              RhoPair p = rho_integrals(spec, fit, t_c);
              return std::make_pair(p.rho, p.rho_prime);
          },
          py::arg("spec"), py::arg("fit"), py::arg("t_c"));

    py::enum_<Policy>(m, "Policy")
        .value("ZddLru", Policy::ZddLru)
        .value("Lru", Policy::Lru)
        .value("TwoLru", Policy::TwoLru);

    py::class_<TrafficModel> traffic(m, "TrafficModel");
    py::enum_<TrafficModel::Kind>(traffic, "Kind")
        .value("Irm", TrafficModel::Kind::Irm)
        .value("HyperZ", TrafficModel::Kind::HyperZ)
        .value("Ipp", TrafficModel::Kind::Ipp);
    traffic
        .def(py::init([](TrafficModel::Kind kind, double z, double t_on, double t_off_ratio) {
                 return TrafficModel{kind, z, t_on, t_off_ratio};
             }),
             py::arg("kind") = TrafficModel::Kind::Irm, py::arg("z") = 10.0,
             py::arg("t_on") = 86400.0, py::arg("t_off_ratio") = 9.0)
        .def_readwrite("kind", &TrafficModel::kind)
        .def_readwrite("z", &TrafficModel::z)
        .def_readwrite("t_on", &TrafficModel::t_on)
        .def_readwrite("t_off_ratio", &TrafficModel::t_off_ratio)
        .def("spec_for_rate", &TrafficModel::spec_for_rate, py::arg("mean_rate"))
        .def("label", &TrafficModel::label);

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init([](const ZipfCatalog& catalog, const TrafficModel& model,
                         std::uint64_t cache_capacity, std::uint64_t filter_size,
                         double download_delay, Policy policy) {
                 return SystemConfig{catalog, model, cache_capacity, filter_size, download_delay,
                                     policy};
             }),
             py::arg("catalog"), py::arg("traffic"), py::arg("cache_capacity"),
             py::arg("filter_size"), py::arg("download_delay"), py::arg("policy"))
        .def_readwrite("cache_capacity", &SystemConfig::cache_capacity)
        .def_readwrite("filter_size", &SystemConfig::filter_size)
        .def_readwrite("download_delay", &SystemConfig::download_delay)
        .def_readwrite("policy", &SystemConfig::policy);

    py::class_<SolverOptions>(m, "SolverOptions")
        .def(py::init<>())
        .def_readwrite("exact_limit", &SolverOptions::exact_limit)
        .def_readwrite("buckets_per_decade", &SolverOptions::buckets_per_decade)
        .def_readwrite("bisect_rel_tol", &SolverOptions::bisect_rel_tol)
        .def_readwrite("keep_per_content", &SolverOptions::keep_per_content)
        .def_readwrite("forcing", &SolverOptions::forcing);

    py::class_<ContentMetrics>(m, "ContentMetrics")
        .def_readonly("representative", &ContentMetrics::representative)
        .def_readonly("count", &ContentMetrics::count)
        .def_readonly("mass", &ContentMetrics::mass)
        .def_readonly("p_in_cs", &ContentMetrics::p_in_cs)
        .def_readonly("p_hit_cs", &ContentMetrics::p_hit_cs)
        .def_readonly("p_hit_pit", &ContentMetrics::p_hit_pit)
        .def_readonly("p_fwd", &ContentMetrics::p_fwd)
        .def_readonly("q", &ContentMetrics::q);

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("policy", &SolveResult::policy)
        .def_readonly("t_c", &SolveResult::t_c)
        .def_readonly("t_m", &SolveResult::t_m)
        .def_readonly("p_hit_cs", &SolveResult::p_hit_cs)
        .def_readonly("p_hit_pit", &SolveResult::p_hit_pit)
        .def_readonly("p_fwd", &SolveResult::p_fwd)
        .def_readonly("fixed_point_residual", &SolveResult::fixed_point_residual)
        .def_readonly("filter_residual", &SolveResult::filter_residual)
        .def_readonly("per_content", &SolveResult::per_content);

    m.def("solve_zdd_lru", &solve_zdd_lru, py::arg("config"), py::arg("options") = SolverOptions{});
    m.def("solve_nonzdd_lru", &solve_nonzdd_lru, py::arg("config"),
          py::arg("options") = SolverOptions{});
    m.def("solve_nonzdd_2lru", &solve_nonzdd_2lru, py::arg("config"),
          py::arg("options") = SolverOptions{});
    m.def("solve_filter", &solve_filter, py::arg("config"), py::arg("options") = SolverOptions{});
    m.def("insertion_probability", &insertion_probability, py::arg("config"), py::arg("content"),
          py::arg("t_m"), py::arg("d"));
    m.def("solve", &solve, py::arg("config"), py::arg("options") = SolverOptions{});

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init([](const SystemConfig& system, std::uint64_t total_requests,
                         std::uint64_t seed) {
                 SimConfig c;
                 c.system = system;
                 c.total_requests = total_requests;
                 c.seed = seed;
                 return c;
             }),
             py::arg("system"), py::arg("total_requests"), py::arg("seed") = 1)
        .def_readwrite("total_requests", &SimConfig::total_requests)
        .def_readwrite("warmup_requests", &SimConfig::warmup_requests)
        .def_readwrite("warmup_time", &SimConfig::warmup_time)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("per_content_stats", &SimConfig::per_content_stats)
        .def_readwrite("prefill_filter", &SimConfig::prefill_filter);

    py::class_<SimReport>(m, "SimReport")
        .def_readonly("counted_requests", &SimReport::counted_requests)
        .def_readonly("cs_hits", &SimReport::cs_hits)
        .def_readonly("pit_hits", &SimReport::pit_hits)
        .def_readonly("forwards", &SimReport::forwards)
        .def_readonly("raw_requests", &SimReport::raw_requests)
        .def_readonly("raw_forwards", &SimReport::raw_forwards)
        .def_readonly("completed_downloads", &SimReport::completed_downloads)
        .def_readonly("inflight_downloads", &SimReport::inflight_downloads)
        .def_readonly("p_hit_cs", &SimReport::p_hit_cs)
        .def_readonly("p_hit_pit", &SimReport::p_hit_pit)
        .def_readonly("p_fwd", &SimReport::p_fwd)
        .def_readonly("hw_hit_cs", &SimReport::hw_hit_cs)
        .def_readonly("hw_hit_pit", &SimReport::hw_hit_pit)
        .def_readonly("hw_fwd", &SimReport::hw_fwd)
        .def_readonly("warmup_requests", &SimReport::warmup_requests)
        .def_readonly("warmup_time", &SimReport::warmup_time)
        .def_readonly("sim_end_time", &SimReport::sim_end_time)
        .def_readonly("wall_seconds", &SimReport::wall_seconds)
        .def_readonly("seed", &SimReport::seed);

    m.def("run_simulation", &run_simulation, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("replicate", &replicate, py::arg("config"), py::arg("runs"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<ReplicateSummary>(m, "ReplicateSummary")
        .def_readonly("p_hit_cs", &ReplicateSummary::p_hit_cs)
        .def_readonly("p_hit_pit", &ReplicateSummary::p_hit_pit)
        .def_readonly("p_fwd", &ReplicateSummary::p_fwd)
        .def_readonly("hw_hit_cs", &ReplicateSummary::hw_hit_cs)
        .def_readonly("hw_hit_pit", &ReplicateSummary::hw_hit_pit)
        .def_readonly("hw_fwd", &ReplicateSummary::hw_fwd);

    m.def("summarize", [](const std::vector<SimReport>& reports) {
        return summarize(std::span<const SimReport>(reports.data(), reports.size()));
    });

    py::enum_<RunMode>(m, "RunMode")
        .value("Analysis", RunMode::Analysis)
        .value("Simulation", RunMode::Simulation)
        .value("Both", RunMode::Both);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_readwrite("mode", &Scenario::mode)
        .def_readwrite("sim_requests", &Scenario::sim_requests)
        .def_readwrite("seed", &Scenario::seed)
        .def_readwrite("replications", &Scenario::replications)
        .def_readonly("forbid_simulation", &Scenario::forbid_simulation);

    py::class_<ResultRow>(m, "ResultRow")
        .def_readonly("scenario", &ResultRow::scenario)
        .def_readonly("policy", &ResultRow::policy)
        .def_readonly("traffic", &ResultRow::traffic)
        .def_readonly("param_name", &ResultRow::param_name)
        .def_readonly("param_value", &ResultRow::param_value)
        .def_readonly("source", &ResultRow::source)
        .def_readonly("p_hit_cs", &ResultRow::p_hit_cs)
        .def_readonly("p_hit_pit", &ResultRow::p_hit_pit)
        .def_readonly("p_fwd", &ResultRow::p_fwd)
        .def_readonly("half_width", &ResultRow::half_width)
        .def_readonly("t_c", &ResultRow::t_c)
        .def_readonly("t_m", &ResultRow::t_m)
        .def_readonly("wall_time_s", &ResultRow::wall_time_s);

    py::class_<RunOutcome>(m, "RunOutcome")
        .def_readonly("rows", &RunOutcome::rows)
        .def_readonly("errors", &RunOutcome::errors)
        .def_readonly("log", &RunOutcome::log);

    m.def("load_config", &load_config, py::arg("path"));
    m.def("load_config_text", &load_config_text, py::arg("text"));
    m.def("preset", &preset, py::arg("name"));
    m.def("run_scenario", &run_scenario, py::arg("scenario"), py::arg("parallelism") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("csv_text", &csv_text, py::arg("rows"));
    m.def("emit_csv", &emit_csv, py::arg("rows"), py::arg("path"));
}
