#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddsr/extract.hpp"
#include "ddsr/scene.hpp"

namespace ddsr {

struct Bounds {
    double lo = 0.0;
    double hi = 0.0;
};

/// Randomised scene description plus the Monte Carlo controls.
struct ScenarioSpec {
    std::string name;
    RadarConfig config;
    int n_targets = 3;
    int n_clutter = 5;
    std::vector<double> target_powers_db; // one per target, or one value for all
    double clutter_power_db = -10.0;
    double direct_path_power_db = 0.0;
    bool direct_path = true;
    double direct_path_range_m = 0.0;
    Bounds range_bounds_m{1000.0, 30000.0};
    Bounds clutter_velocity_bounds_mps{-3.0, 3.0};
    Bounds target_velocity_bounds_mps{-156.0, 156.0};
    double ber = 0.0;
    std::uint64_t seed = 1;
    int trials = 1;
    std::string constellation = "QPSK";

    void validate() const;
    [[nodiscard]] int total_paths() const { return n_targets + n_clutter + (direct_path ? 1 : 0); }
    [[nodiscard]] double target_power_db(int k) const;

    /// scenario1, scenario2 (N = 64) and rmse, rmse2 (N = 16, 20 trials).
    static ScenarioSpec preset(const std::string& name);
    static std::vector<std::string> preset_names();
};

/// Trial `trial` draws its scene from seed + trial.
Scene build_scenario(const ScenarioSpec& spec, int trial);

/// Identification gates: c / (4 N delta_f) and c / (4 M T_bar f_c).
double range_gate_m(const RadarConfig& config);
double velocity_gate_mps(const RadarConfig& config);

struct Match {
    int target = 0;
    int estimate = 0;
    double range_error_m = 0.0;
    double velocity_error_mps = 0.0;
};

/// Greedy nearest assignment in gate-normalised (range, velocity) space.
/// Estimates with |velocity| <= clutter_velocity_mps never match.
std::vector<Match> gate_identification(const Estimate& estimate, const std::vector<Path>& targets,
                                       const RadarConfig& config, double clutter_velocity_mps = 3.0);

enum class Algorithm { CsAnl1, CsAn, CsL1, Music };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name); // accepts anl1/an/csl1/music too

struct BenchOptions {
    std::vector<Algorithm> algorithms{Algorithm::CsAnl1, Algorithm::CsAn, Algorithm::CsL1, Algorithm::Music};
    std::vector<double> bers{0.0};
    int max_iters = 2000; // ADMM iteration cap
    double tol = 1e-4;    // ADMM primal and dual tolerance
    int threads = 0;      // 0 = hardware concurrency
    bool quiet = true;
};

struct TrialRecord {
    double ber = 0.0;
    std::string algorithm;
    int trial = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    int n_estimates = 0;
    int n_matched = 0;
    double range_sq_sum = 0.0;
    double velocity_sq_sum = 0.0;
    double seconds = 0.0;
};

struct RmseRow {
    double ber = 0.0;
    std::string algorithm;
    double range_rmse_m = 0.0;    // NaN when nothing matched
    double velocity_rmse_mps = 0.0;
    double identification_rate = 0.0;
    int trials_used = 0;
};

struct RmseReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<RmseRow> rows;     // ordered by (ber, algorithm)
    std::vector<TrialRecord> raw;  // ordered by (ber, algorithm, trial)

    [[nodiscard]] const RmseRow* find(double ber, const std::string& algorithm) const;
};

RmseReport run_benchmark(const ScenarioSpec& spec, const BenchOptions& options);

/// Shortest decimal that round-trips; "nan" for NaN.
std::string format_double(double x);

std::string report_csv(const RmseReport& report);
std::string raw_csv(const RmseReport& report);

} // namespace ddsr
