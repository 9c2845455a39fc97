#include <doctest.h>

#include <cmath>

#include "ddsr/bench.hpp"
#include "ddsr/io.hpp"
#include "helpers.hpp"

using namespace ddsr;

TEST_CASE("scenario presets") {
    const auto s1 = ScenarioSpec::preset("scenario1");
    const auto s2 = ScenarioSpec::preset("scenario2");
    CHECK(s1.total_paths() == 9);
    CHECK(s2.total_paths() == 84);
    CHECK(build_scenario(s1, 0).size() == 9);
    CHECK(build_scenario(s2, 0).size() == 84);
    CHECK(s1.config.N == 64);
    CHECK(s1.config.M == 16);
    CHECK(s1.config.T_bar == doctest::Approx(3e-4));
    CHECK(s1.config.f_c == 2e9);

    const auto r = ScenarioSpec::preset("rmse");
    CHECK(r.config.N == 16);
    CHECK(r.trials == 20);
    CHECK(range_gate_m(r.config) == doctest::Approx(299792458.0 / (4.0 * 16 * 5e3)).epsilon(1e-14));
    CHECK(range_gate_m(r.config) == doctest::Approx(937.0).epsilon(1e-3));
    CHECK(velocity_gate_mps(r.config) == doctest::Approx(299792458.0 / (4.0 * 16 * 3e-4 * 2e9)).epsilon(1e-14));
    CHECK(velocity_gate_mps(r.config) == doctest::Approx(7.8).epsilon(1e-2));
    CHECK_THROWS_AS(ScenarioSpec::preset("nope"), ConfigError);
}

TEST_CASE("scene draws") {
    auto spec = ScenarioSpec::preset("rmse");
    const Scene a = build_scenario(spec, 3), b = build_scenario(spec, 3), c = build_scenario(spec, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.targets.size(); ++k) {
        CHECK(a.targets[k].alpha == b.targets[k].alpha);
        CHECK(a.targets[k].phi == b.targets[k].phi);
    }
    CHECK(a.targets[0].phi != c.targets[0].phi);
    for (const auto& t : a.targets) {
        const auto p = normalized_to_physical(t.phi, t.psi, spec.config);
        CHECK(p.range_m >= 1000.0 - 1e-6);
        CHECK(p.range_m <= 30000.0 + 1e-6);
        CHECK(std::abs(p.velocity_mps) <= 156.0 + 1e-6);
        CHECK(std::abs(t.alpha) == doctest::Approx(0.01));
    }
    const auto& direct = a.clutter.back();
    CHECK(direct.phi == 0.0);
    CHECK(std::abs(direct.alpha) == doctest::Approx(std::pow(10.0, -0.5)));

    spec.trials = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = ScenarioSpec::preset("rmse");
    spec.range_bounds_m = {5.0, 1.0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("gate identification") {
    const auto cfg = ScenarioSpec::preset("rmse").config;
    std::vector<Path> targets;
    const auto t0 = physical_to_normalized(10000.0, 50.0, cfg);
    const auto t1 = physical_to_normalized(20000.0, -80.0, cfg);
    targets.push_back({0.01, t0.phi, t0.psi});
    targets.push_back({0.01, t1.phi, t1.psi});

    Estimate exact;
    for (const auto& t : targets) exact.paths.push_back({t.phi, t.psi, 0.01, 0.0});
    auto m = gate_identification(exact, targets, cfg);
    REQUIRE(m.size() == 2);
    for (const auto& x : m) {
        CHECK(std::abs(x.range_error_m) < 1e-6);
        CHECK(std::abs(x.velocity_error_mps) < 1e-9);
    }

    Estimate off;
    const auto far = physical_to_normalized(10000.0 + 1.2 * range_gate_m(cfg), 50.0, cfg);
    off.paths.push_back({far.phi, far.psi, 0.01, 0.0});
    CHECK(gate_identification(off, targets, cfg).empty());

    Estimate pair;
    const auto near1 = physical_to_normalized(10100.0, 50.0, cfg);
    const auto near2 = physical_to_normalized(10400.0, 51.0, cfg);
    pair.paths.push_back({near2.phi, near2.psi, 0.01, 0.0});
    pair.paths.push_back({near1.phi, near1.psi, 0.01, 0.0});
    m = gate_identification(pair, targets, cfg);
    REQUIRE(m.size() == 1);
    CHECK(m[0].target == 0);
    CHECK(m[0].estimate == 1);

    Estimate slow;
    const auto clutter_like = physical_to_normalized(10000.0, 2.0, cfg);
    std::vector<Path> slow_target{{0.01, clutter_like.phi, clutter_like.psi}};
    slow.paths.push_back({clutter_like.phi, clutter_like.psi, 0.01, 0.0});
    CHECK(gate_identification(slow, slow_target, cfg).empty());
}

TEST_CASE("number formatting round trips") {
    for (double x : {0.1, 1.0 / 3.0, 937.0, 1e-300, -2.5e10}) CHECK(std::stod(format_double(x)) == x);
    CHECK(format_double(0.02) == "0.02");
    CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("benchmark smoke run and determinism") {
    ScenarioSpec spec;
    spec.name = "smoke";
    spec.config = testing::config(8, 8, testing::kNoiseless);
    spec.n_targets = 1;
    spec.n_clutter = 0;
    spec.direct_path = false;
    spec.target_powers_db = {0.0};
    spec.range_bounds_m = {5000.0, 20000.0};
    spec.target_velocity_bounds_mps = {40.0, 150.0};
    spec.trials = 1;
    spec.seed = 3;
    spec.config.noise_power_db = -60.0;
    BenchOptions opt;
    opt.max_iters = 500;
    const auto r = run_benchmark(spec, opt);
    REQUIRE(r.rows.size() == 4);
    for (const auto& row : r.rows) {
        CAPTURE(row.algorithm);
        CHECK(row.trials_used == 1);
        CHECK(row.identification_rate == 1.0);
        CHECK(row.range_rmse_m < range_gate_m(spec.config));
        CHECK(row.velocity_rmse_mps < velocity_gate_mps(spec.config));
    }
    CHECK(report_csv(r).rfind("ber,algorithm,range_rmse_m,velocity_rmse_mps,identification_rate,trials_used\n", 0) == 0);
    CHECK(report_csv(run_benchmark(spec, opt)) == report_csv(r));
    CHECK(raw_csv(run_benchmark(spec, opt)) == raw_csv(r));

    opt.threads = 3;
    opt.bers = {0.0, 0.01};
    spec.trials = 3;
    opt.algorithms = {Algorithm::Music, Algorithm::CsL1};
    const auto a = run_benchmark(spec, opt);
    opt.threads = 1;
    const auto b = run_benchmark(spec, opt);
    CHECK(raw_csv(a) == raw_csv(b));
    REQUIRE(a.raw.size() == 12);
    CHECK(a.raw[0].algorithm == "2D-MUSIC");
    CHECK(a.raw[3].algorithm == "CS-L1");
    CHECK(a.raw[6].ber == 0.01);
    CHECK(a.raw[7].trial == 1);
}

TEST_CASE("algorithm names") {
    CHECK(algorithm_from_name("anl1") == Algorithm::CsAnl1);
    CHECK(algorithm_from_name("CS-AN") == Algorithm::CsAn);
    CHECK(algorithm_name(Algorithm::Music) == "2D-MUSIC");
    CHECK_THROWS_AS(algorithm_from_name("fft"), ConfigError);
}

TEST_CASE("JSON round trips") {
    Scene s;
    s.targets.push_back({{0.3, -0.1}, 0.25, 0.5});
    const auto m = simulate(s, testing::config(4, 4, -20), Constellation::qpsk(), 0.1, 9);
    const auto text = io::to_json(m).dump();
    const auto back = io::measurement_from_json(io::parse(text));
    CHECK(back.r_bar == m.r_bar);
    CHECK(back.S_hat == m.S_hat);
    CHECK(back.error_mask == m.error_mask);
    CHECK(back.sigma2 == m.sigma2);
    REQUIRE(back.truth.has_value());
    CHECK(back.truth->targets[0].alpha == s.targets[0].alpha);
    CHECK(back.metadata->seed == 9);

    const auto spec = ScenarioSpec::preset("scenario2");
    const auto spec2 = io::scenario_from_json(io::to_json(spec));
    CHECK(io::to_json(spec2) == io::to_json(spec));

    const auto quiet = testing::config(4, 4, testing::kNoiseless);
    CHECK(io::config_from_json(io::to_json(quiet)).sigma2() == 0.0);

    const auto phys = io::scene_from_json(
        io::parse(R"({"targets": [{"power_db": -20, "range_m": 9000, "velocity_mps": -30}]})"), testing::config(8, 8));
    const auto p = normalized_to_physical(phys.targets[0].phi, phys.targets[0].psi, testing::config(8, 8));
    CHECK(p.range_m == doctest::Approx(9000.0));
    CHECK(p.velocity_mps == doctest::Approx(-30.0));
    CHECK(std::abs(phys.targets[0].alpha) == doctest::Approx(0.1));

    CHECK_THROWS_AS(io::parse("{not json"), ConfigError);
    CHECK_THROWS_AS(io::measurement_from_json(io::parse(R"({"config": {"M": 4}})")), ConfigError);
}
