#include "ddsr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "ddsr/admm.hpp"
#include "ddsr/baselines.hpp"

namespace ddsr {

namespace {

void check_bounds(const Bounds& b, const char* what) {
    if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
        throw ConfigError(std::string("scenario: ") + what + " bounds must be finite and ordered");
    }
}

RadarConfig standard_config(int M, int N, double noise_db) {
    const double T = 200e-6;
    return RadarConfig::create(M, N, 1.0 / T, T, T / 2.0, 2e9, noise_db);
}

} // namespace

void ScenarioSpec::validate() const {
    config.validate();
    if (n_targets < 0 || n_clutter < 0) throw ConfigError("scenario: path counts must be >= 0");
    if (total_paths() < 1) throw ConfigError("scenario: at least one path required");
    if (!target_powers_db.empty() && target_powers_db.size() != 1 &&
        static_cast<int>(target_powers_db.size()) != n_targets) {
        throw ConfigError("scenario: target_powers_db must have one entry or one per target");
    }
    if (n_targets > 0 && target_powers_db.empty()) throw ConfigError("scenario: target_powers_db missing");
    check_bounds(range_bounds_m, "range");
    check_bounds(clutter_velocity_bounds_mps, "clutter velocity");
    check_bounds(target_velocity_bounds_mps, "target velocity");
    if (range_bounds_m.lo < 0.0 || direct_path_range_m < 0.0) throw ConfigError("scenario: ranges must be >= 0");
    if (!(ber >= 0.0 && ber <= 0.5)) throw ConfigError("scenario: ber must lie in [0, 0.5]");
    if (trials < 1) throw ConfigError("scenario: trials must be >= 1");
    Constellation::from_name(constellation);
}

double ScenarioSpec::target_power_db(int k) const {
    return target_powers_db.size() == 1 ? target_powers_db.front() : target_powers_db.at(static_cast<std::size_t>(k));
}

ScenarioSpec ScenarioSpec::preset(const std::string& name) {
    ScenarioSpec s;
    s.name = name;
    if (name == "scenario1" || name == "scenario2") {
        s.config = standard_config(16, 64, -40.0);
        s.n_clutter = name == "scenario1" ? 5 : 80;
        s.target_powers_db = {-40.0, -50.0, -50.0};
        s.clutter_power_db = -10.0;
        s.direct_path_power_db = 0.0;
    } else if (name == "rmse" || name == "rmse2") {
        s.config = standard_config(16, 16, -40.0);
        s.n_clutter = name == "rmse" ? 5 : 80;
        s.target_powers_db = {-40.0};
        s.clutter_power_db = -10.0;
        s.direct_path_power_db = -10.0;
        s.trials = 20;
    } else {
        throw ConfigError("unknown scenario preset '" + name + "'");
    }
    return s;
}

std::vector<std::string> ScenarioSpec::preset_names() { return {"scenario1", "scenario2", "rmse", "rmse2"}; }

Scene build_scenario(const ScenarioSpec& spec, int trial) {
    spec.validate();
    Rng rng(derive_seed(spec.seed + static_cast<std::uint64_t>(trial), 10));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto uniform = [&](const Bounds& b) { return b.lo + (b.hi - b.lo) * unit(rng); };
    const RadarConfig& cfg = spec.config;

    Scene scene;
    for (int k = 0; k < spec.n_targets; ++k) {
        const double range = uniform(spec.range_bounds_m);
        const double vel = uniform(spec.target_velocity_bounds_mps);
        const auto f = physical_to_normalized(range, vel, cfg);
        const double mag = std::pow(10.0, spec.target_power_db(k) / 20.0);
        scene.targets.push_back({std::polar(mag, kTwoPi * unit(rng)), f.phi, f.psi});
    }
    const double clutter_sd = std::sqrt(std::pow(10.0, spec.clutter_power_db / 10.0) / 2.0);
    for (int k = 0; k < spec.n_clutter; ++k) {
        const double range = uniform(spec.range_bounds_m);
        const double vel = uniform(spec.clutter_velocity_bounds_mps);
        const auto f = physical_to_normalized(range, vel, cfg);
        const double re = gauss(rng) * clutter_sd;
        const double im = gauss(rng) * clutter_sd;
        scene.clutter.push_back({cplx(re, im), f.phi, f.psi});
    }
    if (spec.direct_path) {
        const auto f = physical_to_normalized(spec.direct_path_range_m, 0.0, cfg);
        const double mag = std::pow(10.0, spec.direct_path_power_db / 20.0);
        scene.clutter.push_back({std::polar(mag, kTwoPi * unit(rng)), 0.0, f.psi});
    }
    return scene;
}

double range_gate_m(const RadarConfig& config) { return kSpeedOfLight / (4.0 * config.N * config.delta_f); }

double velocity_gate_mps(const RadarConfig& config) {
    return kSpeedOfLight / (4.0 * config.M * config.T_bar * config.f_c);
}

std::vector<Match> gate_identification(const Estimate& estimate, const std::vector<Path>& targets,
                                       const RadarConfig& config, double clutter_velocity_mps) {
    const double rg = range_gate_m(config);
    const double vg = velocity_gate_mps(config);
    struct Candidate {
        double dist;
        Match m;
    };
    std::vector<Candidate> cands;
    std::vector<PhysicalCoord> est(estimate.paths.size());
    for (std::size_t j = 0; j < estimate.paths.size(); ++j) {
        est[j] = normalized_to_physical(estimate.paths[j].phi, estimate.paths[j].psi, config);
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto truth = normalized_to_physical(targets[t].phi, targets[t].psi, config);
        for (std::size_t j = 0; j < est.size(); ++j) {
            if (std::abs(est[j].velocity_mps) <= clutter_velocity_mps) continue;
            const double dr = est[j].range_m - truth.range_m;
            const double dv = est[j].velocity_mps - truth.velocity_mps;
            if (std::abs(dr) < rg && std::abs(dv) < vg) {
                cands.push_back({std::hypot(dr / rg, dv / vg), {static_cast<int>(t), static_cast<int>(j), dr, dv}});
            }
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });
    std::vector<char> target_used(targets.size(), 0), est_used(est.size(), 0);
    std::vector<Match> out;
    for (const auto& c : cands) {
        if (target_used[c.m.target] || est_used[c.m.estimate]) continue;
        target_used[c.m.target] = est_used[c.m.estimate] = 1;
        out.push_back(c.m);
    }
    std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) { return a.target < b.target; });
    return out;
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::CsAnl1: return "CS-ANL1";
    case Algorithm::CsAn: return "CS-AN";
    case Algorithm::CsL1: return "CS-L1";
    case Algorithm::Music: return "2D-MUSIC";
    }
    return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "CS-ANL1" || name == "anl1") return Algorithm::CsAnl1;
    if (name == "CS-AN" || name == "an") return Algorithm::CsAn;
    if (name == "CS-L1" || name == "csl1") return Algorithm::CsL1;
    if (name == "2D-MUSIC" || name == "music") return Algorithm::Music;
    throw ConfigError("unknown algorithm '" + name + "'");
}

const RmseRow* RmseReport::find(double ber, const std::string& algorithm) const {
    for (const auto& r : rows) {
        if (r.ber == ber && r.algorithm == algorithm) return &r;
    }
    return nullptr;
}

namespace {

Estimate run_algorithm(Algorithm a, const Measurement& meas, int total_paths, const BenchOptions& opt) {
    const int M = meas.config.M;
    const int N = meas.config.N;
    const double sigma = std::sqrt(meas.sigma2 > 0.0 ? meas.sigma2 : 0.0);
    switch (a) {
    case Algorithm::CsAnl1:
    case Algorithm::CsAn: {
        auto cfg = SolverConfig::defaults_for(M, N, sigma > 0.0 ? sigma : estimate_sigma(meas), a == Algorithm::CsAnl1);
        cfg.max_iters = opt.max_iters;
        cfg.tol_primal = cfg.tol_dual = opt.tol;
        cfg.record_history = false;
        return estimate_atomic(meas, cfg);
    }
    case Algorithm::CsL1:
        return csl1_estimate(meas, CsL1Config::defaults_for(M, N, sigma > 0.0 ? sigma : estimate_sigma(meas)));
    case Algorithm::Music: {
        auto cfg = MusicConfig::defaults_for(M, N, total_paths);
        cfg.K_signal = std::min(total_paths, cfg.M_sub * cfg.N_sub - 1);
        return music_estimate(meas, cfg);
    }
    }
    throw ConfigError("unhandled algorithm");
}

} // namespace

RmseReport run_benchmark(const ScenarioSpec& spec, const BenchOptions& options) {
    spec.validate();
    if (options.algorithms.empty()) throw ConfigError("bench: no algorithms selected");
    if (options.bers.empty()) throw ConfigError("bench: no BER values");
    for (double b : options.bers) {
        if (!(b >= 0.0 && b <= 0.5)) throw ConfigError("bench: ber must lie in [0, 0.5]");
    }
    if (options.max_iters < 1) throw ConfigError("bench: iteration cap must be >= 1");
    if (!(options.tol > 0.0)) throw ConfigError("bench: tolerance must be > 0");

    const std::size_t n_ber = options.bers.size();
    const std::size_t n_alg = options.algorithms.size();
    const std::size_t n_trial = static_cast<std::size_t>(spec.trials);
    std::vector<TrialRecord> raw(n_ber * n_alg * n_trial);
    const auto constellation = Constellation::from_name(spec.constellation);

    auto job = [&](std::size_t b, std::size_t t) {
        const int trial = static_cast<int>(t);
        const std::uint64_t seed = spec.seed + t;
        const Scene scene = build_scenario(spec, trial);
        const Measurement meas = simulate(scene, spec.config, constellation, options.bers[b], seed);
        for (std::size_t a = 0; a < n_alg; ++a) {
            TrialRecord& rec = raw[(b * n_alg + a) * n_trial + t];
            rec.ber = options.bers[b];
            rec.algorithm = algorithm_name(options.algorithms[a]);
            rec.trial = trial;
            rec.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const Estimate est = run_algorithm(options.algorithms[a], meas, spec.total_paths(), options);
                const auto matches = gate_identification(est, scene.targets, spec.config);
                rec.n_estimates = static_cast<int>(est.paths.size());
                rec.n_matched = static_cast<int>(matches.size());
                for (const auto& m : matches) {
                    rec.range_sq_sum += m.range_error_m * m.range_error_m;
                    rec.velocity_sq_sum += m.velocity_error_mps * m.velocity_error_mps;
                }
            } catch (const NumericError& e) {
                rec.ok = false;
                rec.error = e.what();
            } catch (const DegenerateInputError& e) {
                rec.ok = false;
                rec.error = e.what();
            }
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!options.quiet) {
                static std::mutex io_mutex;
                std::lock_guard<std::mutex> lock(io_mutex);
                std::cerr << "ber=" << rec.ber << " " << rec.algorithm << " trial " << trial << ": "
                          << (rec.ok ? std::to_string(rec.n_matched) + " matched" : rec.error) << " ("
                          << rec.seconds << " s)\n";
            }
        }
    };

    const std::size_t n_jobs = n_ber * n_trial;
    unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads) : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_jobs)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < n_jobs;) {
            try {
                job(j / n_trial, j % n_trial);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_jobs;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    RmseReport report;
    report.scenario = spec.name;
    report.seed = spec.seed;
    for (std::size_t b = 0; b < n_ber; ++b) {
        for (std::size_t a = 0; a < n_alg; ++a) {
            RmseRow row;
            row.ber = options.bers[b];
            row.algorithm = algorithm_name(options.algorithms[a]);
            double rs = 0.0, vs = 0.0;
            int matched = 0;
            for (std::size_t t = 0; t < n_trial; ++t) {
                const auto& rec = raw[(b * n_alg + a) * n_trial + t];
                if (!rec.ok) continue;
                ++row.trials_used;
                matched += rec.n_matched;
                rs += rec.range_sq_sum;
                vs += rec.velocity_sq_sum;
            }
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.range_rmse_m = matched > 0 ? std::sqrt(rs / matched) : nan;
            row.velocity_rmse_mps = matched > 0 ? std::sqrt(vs / matched) : nan;
            const int possible = row.trials_used * spec.n_targets;
            row.identification_rate = possible > 0 ? static_cast<double>(matched) / possible : 0.0;
            report.rows.push_back(row);
        }
    }
    report.raw = std::move(raw);
    return report;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string report_csv(const RmseReport& report) {
    std::ostringstream os;
    os << "ber,algorithm,range_rmse_m,velocity_rmse_mps,identification_rate,trials_used\n";
    for (const auto& r : report.rows) {
        os << format_double(r.ber) << ',' << r.algorithm << ',' << format_double(r.range_rmse_m) << ','
           << format_double(r.velocity_rmse_mps) << ',' << format_double(r.identification_rate) << ','
           << r.trials_used << '\n';
    }
    return os.str();
}

std::string raw_csv(const RmseReport& report) {
    std::ostringstream os;
    os << "ber,algorithm,trial,seed,ok,n_estimates,n_matched,range_sq_sum,velocity_sq_sum\n";
    for (const auto& r : report.raw) {
        os << format_double(r.ber) << ',' << r.algorithm << ',' << r.trial << ',' << r.seed << ',' << (r.ok ? 1 : 0)
           << ',' << r.n_estimates << ',' << r.n_matched << ',' << format_double(r.range_sq_sum) << ','
           << format_double(r.velocity_sq_sum) << '\n';
    }
    return os.str();
}

} // namespace ddsr
