#include "ddsr/ddsr.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "ddsr/baselines.hpp"
#include "ddsr/bench.hpp"
#include "ddsr/io.hpp"

using namespace ddsr;
using io::json;

struct ddsr_measurement {
    Measurement m;
};

struct ddsr_result {
    Estimate estimate;
    RadarConfig config;
    std::optional<Solution> solution;
    SolverConfig solver;
    PeakOptions peaks;
    std::optional<RMat> grid; // MUSIC spectrum or |alpha'| on the CS-L1 grid
};

namespace {

thread_local std::string g_last_error;

template <class F>
ddsr_status guarded(F&& f) {
    g_last_error.clear();
    try {
        f();
        return DDSR_OK;
    } catch (const ConfigError& e) {
        g_last_error = e.what();
        return DDSR_ERR_CONFIG;
    } catch (const NumericError& e) {
        g_last_error = e.what();
        return DDSR_ERR_NUMERIC;
    } catch (const DomainError& e) {
        g_last_error = e.what();
        return DDSR_ERR_DOMAIN;
    } catch (const DegenerateInputError& e) {
        g_last_error = e.what();
        return DDSR_ERR_DEGENERATE;
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return DDSR_ERR_CONFIG;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return DDSR_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DDSR_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown exception";
        return DDSR_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_optional(const char* text) {
    if (text == nullptr || *text == '\0') return json::object();
    json j = io::parse(text);
    if (!j.is_object()) throw ConfigError("options must be a JSON object");
    return j;
}

template <class T>
T opt(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("option '") + key + "' has the wrong type");
    }
}

double known_sigma(const Measurement& m) { return m.sigma2 > 0.0 ? std::sqrt(m.sigma2) : estimate_sigma(m); }

std::string dual_spectrum(const CVec& nu, int M, int N, int oversample) {
    if (oversample < 1) throw ConfigError("oversample must be >= 1");
    return io::grid_csv(dual_polynomial_grid(nu, M, N, oversample * M, oversample * N));
}

} // namespace

extern "C" {

const char* ddsr_version(void) { return "0.1.0"; }

const char* ddsr_last_error(void) { return g_last_error.c_str(); }

const char* ddsr_status_name(ddsr_status status) {
    switch (status) {
    case DDSR_OK: return "ok";
    case DDSR_ERR_ARGUMENT: return "argument error";
    case DDSR_ERR_CONFIG: return "config error";
    case DDSR_ERR_NUMERIC: return "numeric error";
    case DDSR_ERR_DOMAIN: return "domain error";
    case DDSR_ERR_DEGENERATE: return "degenerate input";
    case DDSR_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void ddsr_string_free(char* s) { std::free(s); }

ddsr_status ddsr_simulate(const char* scene_json, const char* options_json, ddsr_measurement** out) {
    if (scene_json == nullptr || out == nullptr) {
        g_last_error = "scene_json and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] {
        const json doc = io::parse(scene_json);
        const json o = parse_optional(options_json);
        Scene scene;
        RadarConfig config;
        std::uint64_t seed = opt<std::uint64_t>(o, "seed", 1);
        double ber = opt<double>(o, "ber", 0.0);
        std::string constellation = opt<std::string>(o, "constellation", "QPSK");
        if (doc.contains("n_targets") || doc.contains("preset")) {
            const ScenarioSpec spec = io::scenario_from_json(doc);
            const int trial = opt<int>(o, "trial", 0);
            if (trial < 0) throw ConfigError("trial must be >= 0");
            scene = build_scenario(spec, trial);
            config = spec.config;
            seed = spec.seed + static_cast<std::uint64_t>(trial);
            ber = opt<double>(o, "ber", spec.ber);
            constellation = opt<std::string>(o, "constellation", spec.constellation);
        } else {
            if (!doc.contains("config")) throw ConfigError("scene document needs a 'config' object");
            config = io::config_from_json(doc["config"]);
            scene = io::scene_from_json(doc, config);
            ber = opt<double>(o, "ber", opt<double>(doc, "ber", 0.0));
            constellation = opt<std::string>(o, "constellation", opt<std::string>(doc, "constellation", constellation));
        }
        auto h = std::make_unique<ddsr_measurement>();
        h->m = simulate(scene, config, Constellation::from_name(constellation), ber, seed);
        *out = h.release();
    });
}

ddsr_status ddsr_measurement_from_json(const char* text, ddsr_measurement** out) {
    if (text == nullptr || out == nullptr) {
        g_last_error = "json and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] {
        auto h = std::make_unique<ddsr_measurement>();
        h->m = io::measurement_from_json(io::parse(text));
        *out = h.release();
    });
}

ddsr_status ddsr_measurement_to_json(const ddsr_measurement* m, char** out) {
    if (m == nullptr || out == nullptr) {
        g_last_error = "measurement and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] { *out = dup_string(io::to_json(m->m).dump()); });
}

ddsr_status ddsr_measurement_dims(const ddsr_measurement* m, int* M, int* N) {
    if (m == nullptr || M == nullptr || N == nullptr) {
        g_last_error = "arguments must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *M = m->m.config.M;
    *N = m->m.config.N;
    g_last_error.clear();
    return DDSR_OK;
}

void ddsr_measurement_free(ddsr_measurement* m) { delete m; }

ddsr_status ddsr_solve(const ddsr_measurement* m, const char* algorithm, const char* options_json,
                       ddsr_result** out) {
    if (m == nullptr || algorithm == nullptr || out == nullptr) {
        g_last_error = "measurement, algorithm and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] {
        const Measurement& meas = m->m;
        const int M = meas.config.M;
        const int N = meas.config.N;
        const json o = parse_optional(options_json);
        auto r = std::make_unique<ddsr_result>();
        r->config = meas.config;
        switch (algorithm_from_name(algorithm)) {
        case Algorithm::CsAnl1:
        case Algorithm::CsAn: {
            const bool with_l1 = algorithm_from_name(algorithm) == Algorithm::CsAnl1;
            SolverConfig cfg = SolverConfig::defaults_for(M, N, known_sigma(meas), with_l1);
            cfg = io::solver_config_from_json(o, cfg);
            if (!with_l1 && cfg.mu != 0.0) throw ConfigError("CS-AN fixes mu = 0");
            r->peaks.oversample = opt<int>(o, "oversample", r->peaks.oversample);
            r->peaks.epsilon = opt<double>(o, "epsilon", r->peaks.epsilon);
            Solution sol;
            r->estimate = estimate_atomic(meas, cfg, r->peaks, &sol);
            r->solution = std::move(sol);
            r->solver = cfg;
            break;
        }
        case Algorithm::CsL1: {
            CsL1Config cfg = CsL1Config::defaults_for(M, N, known_sigma(meas));
            cfg.M_grid = opt<int>(o, "M_grid", cfg.M_grid);
            cfg.N_grid = opt<int>(o, "N_grid", cfg.N_grid);
            cfg.gamma = 2.0 * known_sigma(meas) * std::sqrt(2.0 * std::log(static_cast<double>(cfg.M_grid) * cfg.N_grid));
            cfg.gamma = opt<double>(o, "gamma", cfg.gamma);
            cfg.max_iters = opt<int>(o, "max_iters", cfg.max_iters);
            cfg.tol = opt<double>(o, "tol", cfg.tol);
            CsL1Result res = csl1_solve(meas, cfg);
            r->estimate = std::move(res.estimate);
            const Eigen::Map<const CMat> X(res.coefficients.data(), cfg.M_grid, cfg.N_grid);
            r->grid = X.cwiseAbs();
            break;
        }
        case Algorithm::Music: {
            const int known_k = meas.truth ? static_cast<int>(meas.truth->size()) : MusicConfig::kAutoSignalDim;
            MusicConfig cfg = MusicConfig::defaults_for(M, N, MusicConfig::kAutoSignalDim);
            cfg.M_sub = opt<int>(o, "M_sub", cfg.M_sub);
            cfg.N_sub = opt<int>(o, "N_sub", cfg.N_sub);
            cfg.K_signal = opt<int>(o, "K_signal", o.contains("known_k") && opt<bool>(o, "known_k", false)
                                                          ? known_k
                                                          : MusicConfig::kAutoSignalDim);
            cfg.grid_phi = opt<int>(o, "grid_phi", cfg.grid_phi);
            cfg.grid_psi = opt<int>(o, "grid_psi", cfg.grid_psi);
            cfg.validate(M, N);
            r->estimate = music_estimate(meas, cfg);
            r->grid = music_spectrum(spatial_smooth(meas, cfg), cfg);
            break;
        }
        }
        *out = r.release();
    });
}

ddsr_status ddsr_result_to_json(const ddsr_result* r, char** out) {
    if (r == nullptr || out == nullptr) {
        g_last_error = "result and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] {
        json j = io::to_json(r->estimate, r->config);
        j["config"] = io::to_json(r->config);
        if (r->solution) {
            const json s = io::to_json(*r->solution, r->solver);
            j["solver"] = s["config"];
            j["lambda"] = r->solver.lambda;
            j["mu"] = r->solver.mu;
            for (const char* key : {"nu_hat", "z_hat", "e_hat", "objective", "primal_residual", "dual_residual",
                                    "iterations", "converged", "seconds", "history_columns", "history"}) {
                j[key] = s[key];
            }
        }
        *out = dup_string(j.dump());
    });
}

ddsr_status ddsr_result_to_csv(const ddsr_result* r, char** out) {
    if (r == nullptr || out == nullptr) {
        g_last_error = "result and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] { *out = dup_string(io::estimate_csv(r->estimate, r->config)); });
}

ddsr_status ddsr_result_path_count(const ddsr_result* r, size_t* count) {
    if (r == nullptr || count == nullptr) {
        g_last_error = "result and count must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    g_last_error.clear();
    *count = r->estimate.paths.size();
    return DDSR_OK;
}

ddsr_status ddsr_result_path(const ddsr_result* r, size_t index, double* phi, double* psi, double* amp_re,
                             double* amp_im) {
    if (r == nullptr) {
        g_last_error = "result must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    if (index >= r->estimate.paths.size()) {
        g_last_error = "path index out of range";
        return DDSR_ERR_ARGUMENT;
    }
    g_last_error.clear();
    const auto& p = r->estimate.paths[index];
    if (phi) *phi = p.phi;
    if (psi) *psi = p.psi;
    if (amp_re) *amp_re = p.alpha.real();
    if (amp_im) *amp_im = p.alpha.imag();
    return DDSR_OK;
}

ddsr_status ddsr_result_spectrum_csv(const ddsr_result* r, int oversample, char** out) {
    if (r == nullptr || out == nullptr) {
        g_last_error = "result and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] {
        if (r->solution) {
            *out = dup_string(dual_spectrum(r->solution->nu_hat, r->config.M, r->config.N, oversample));
        } else if (r->grid) {
            *out = dup_string(io::grid_csv(*r->grid));
        } else {
            throw ConfigError("result carries no spectrum");
        }
    });
}

void ddsr_result_free(ddsr_result* r) { delete r; }

ddsr_status ddsr_dual_spectrum_csv(const char* result_json, int oversample, char** out) {
    if (result_json == nullptr || out == nullptr) {
        g_last_error = "result_json and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] {
        const json j = io::parse(result_json);
        if (!j.contains("config") || !j.contains("nu_hat")) {
            throw ConfigError("document needs 'config' and 'nu_hat' (an atomic-norm solve result)");
        }
        const RadarConfig cfg = io::config_from_json(j["config"]);
        const CVec nu = io::complex_from_json(j["nu_hat"], cfg.size());
        *out = dup_string(dual_spectrum(nu, cfg.M, cfg.N, oversample));
    });
}

ddsr_status ddsr_dual_peaks_csv(const char* result_json, char** out) {
    if (result_json == nullptr || out == nullptr) {
        g_last_error = "result_json and out must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] {
        const json j = io::parse(result_json);
        if (!j.contains("config") || !j.contains("nu_hat") || !j.contains("lambda")) {
            throw ConfigError("document needs 'config', 'nu_hat' and 'lambda' (an atomic-norm solve result)");
        }
        const RadarConfig cfg = io::config_from_json(j["config"]);
        const CVec nu = io::complex_from_json(j["nu_hat"], cfg.size());
        const auto peaks = locate_peaks(nu, j["lambda"].get<double>(), cfg.M, cfg.N);
        std::string csv = "phi,psi,range_m,velocity_mps,magnitude\n";
        for (const auto& p : peaks) {
            const auto phys = normalized_to_physical(p.phi, p.psi, cfg);
            csv += format_double(p.phi) + ',' + format_double(p.psi) + ',' + format_double(phys.range_m) + ',' +
                   format_double(phys.velocity_mps) + ',' + format_double(p.magnitude) + '\n';
        }
        *out = dup_string(csv);
    });
}

ddsr_status ddsr_scenario_preset(const char* name, char** spec_json) {
    if (name == nullptr || spec_json == nullptr) {
        g_last_error = "name and spec_json must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    *spec_json = nullptr;
    return guarded([&] { *spec_json = dup_string(io::to_json(ScenarioSpec::preset(name)).dump(2)); });
}

ddsr_status ddsr_bench(const char* spec_json, const char* options_json, char** report_csv_out, char** raw_csv_out,
                       char** report_json_out) {
    if (spec_json == nullptr) {
        g_last_error = "spec_json must not be NULL";
        return DDSR_ERR_ARGUMENT;
    }
    for (char** p : {report_csv_out, raw_csv_out, report_json_out}) {
        if (p) *p = nullptr;
    }
    return guarded([&] {
        ScenarioSpec spec = io::scenario_from_json(io::parse(spec_json));
        const json o = parse_optional(options_json);
        BenchOptions bo;
        if (o.contains("algorithms")) {
            bo.algorithms.clear();
            for (const auto& a : opt<std::vector<std::string>>(o, "algorithms", {})) {
                bo.algorithms.push_back(algorithm_from_name(a));
            }
        }
        bo.bers = opt<std::vector<double>>(o, "bers", {spec.ber});
        spec.trials = opt<int>(o, "trials", spec.trials);
        spec.seed = opt<std::uint64_t>(o, "seed", spec.seed);
        bo.max_iters = opt<int>(o, "max_iters", bo.max_iters);
        bo.tol = opt<double>(o, "tol", bo.tol);
        bo.threads = opt<int>(o, "threads", bo.threads);
        bo.quiet = !opt<bool>(o, "verbose", false);
        spec.validate();
        const RmseReport report = run_benchmark(spec, bo);
        std::string csv = report_csv(report), raw = raw_csv(report), js = io::to_json(report).dump(2);
        if (report_csv_out) *report_csv_out = dup_string(csv);
        if (raw_csv_out) *raw_csv_out = dup_string(raw);
        if (report_json_out) *report_json_out = dup_string(js);
    });
}

} // extern "C"
