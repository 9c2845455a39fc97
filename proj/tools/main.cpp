#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddsr/ddsr.h"

namespace {

using json = nlohmann::json;

struct Failure {
    ddsr_status status;
    std::string message;
};

int exit_code(ddsr_status s) {
    switch (s) {
    case DDSR_OK: return 0;
    case DDSR_ERR_NUMERIC:
    case DDSR_ERR_DEGENERATE: return 3;
    case DDSR_ERR_INTERNAL: return 1;
    default: return 2;
    }
}

void check(ddsr_status s) {
    if (s != DDSR_OK) throw Failure{s, ddsr_last_error()};
}

struct Owned {
    char* p = nullptr;
    ~Owned() { ddsr_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

using MeasurementPtr = std::unique_ptr<ddsr_measurement, decltype(&ddsr_measurement_free)>;
using ResultPtr = std::unique_ptr<ddsr_result, decltype(&ddsr_result_free)>;

std::string read_input(const std::string& path) {
    if (path == "-") {
        return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{DDSR_ERR_CONFIG, "cannot open '" + path + "'"};
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure{DDSR_ERR_CONFIG, "cannot write '" + path + "'"};
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        for (std::string tok; std::getline(ss, tok, ',');) {
            if (!tok.empty()) out.push_back(tok);
        }
    }
    return out;
}

struct Globals {
    std::uint64_t seed = 1;
    bool seed_set = false;
    std::string out;
    std::string format = "json";
    bool quiet = false;
};

void note(const Globals& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Super-resolution delay-Doppler estimation for OFDM passive radar"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(ddsr_version()));

    Globals g;
    app.add_option("--seed", g.seed, "Base random seed")->each([&](const std::string&) { g.seed_set = true; });
    app.add_option("--out,-o", g.out, "Output file (default stdout)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--quiet,-q", g.quiet, "Suppress progress messages");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Scene or scenario spec -> measurement JSON");
    std::string sim_scene;
    double sim_ber = -1.0;
    std::string sim_const;
    int sim_trial = 0;
    sim->add_option("scene", sim_scene, "Scene or scenario JSON file ('-' for stdin)")->required();
    sim->add_option("--ber", sim_ber, "Bit error rate in [0, 0.5]");
    sim->add_option("--constellation", sim_const, "BPSK or QPSK");
    sim->add_option("--trial", sim_trial, "Trial index when the input is a scenario spec");

    // solve
    auto* sol = app.add_subcommand("solve", "Measurement -> estimate");
    std::string sol_in, sol_algo = "anl1";
    double sol_lambda = -1, sol_mu = -1, sol_rho = -1, sol_tol = -1;
    int sol_iters = -1, sol_oversample = -1, sol_k = -1;
    std::string sol_spectrum;
    sol->add_option("measurement", sol_in, "Measurement JSON file ('-' for stdin)")->required();
    sol->add_option("--algo", sol_algo, "Receiver")->check(CLI::IsMember({"anl1", "an", "csl1", "music"}));
    sol->add_option("--lambda", sol_lambda, "Atomic-norm weight");
    sol->add_option("--mu", sol_mu, "l1 weight on demodulation errors");
    sol->add_option("--rho", sol_rho, "ADMM penalty");
    sol->add_option("--iters", sol_iters, "Iteration cap");
    sol->add_option("--tol", sol_tol, "ADMM primal and dual tolerance");
    sol->add_option("--oversample", sol_oversample, "Certificate grid oversampling");
    sol->add_option("--K", sol_k, "MUSIC signal dimension (default: eigen-gap rule)");
    sol->add_option("--spectrum-out", sol_spectrum, "Also write the plot grid as CSV");

    // spectrum
    auto* spec = app.add_subcommand("spectrum", "Solve result -> |Q| grid CSV or certificate peak list");
    std::string spec_in;
    int spec_oversample = 4;
    bool spec_peaks = false;
    spec->add_option("result", spec_in, "Result JSON from 'solve' ('-' for stdin)")->required();
    spec->add_option("--oversample", spec_oversample, "Grid points per unit of M and N");
    spec->add_flag("--peaks", spec_peaks, "Print the certificate peak list instead of the grid");

    // bench
    auto* bench = app.add_subcommand("bench", "Monte Carlo RMSE benchmark");
    std::string bench_preset, bench_spec, bench_raw;
    std::vector<std::string> bench_bers, bench_algos;
    int bench_trials = -1, bench_iters = -1, bench_threads = -1, bench_M = -1, bench_N = -1;
    double bench_tol = -1;
    auto* preset_opt = bench->add_option("--preset", bench_preset, "scenario1, scenario2, rmse or rmse2");
    bench->add_option("--spec", bench_spec, "Scenario spec JSON file")->excludes(preset_opt);
    bench->add_option("--ber", bench_bers, "BER values (repeatable or comma separated)");
    bench->add_option("--algo", bench_algos, "anl1, an, csl1, music (repeatable or comma separated)");
    bench->add_option("--trials", bench_trials, "Monte Carlo trials");
    bench->add_option("--iters", bench_iters, "ADMM iteration cap");
    bench->add_option("--tol", bench_tol, "ADMM tolerance");
    bench->add_option("--threads", bench_threads, "Worker threads (default: all cores)");
    bench->add_option("--M", bench_M, "Override block count");
    bench->add_option("--N", bench_N, "Override subcarrier count");
    bench->add_option("--raw", bench_raw, "Write per-trial CSV to this file");

    // scenario
    auto* scen = app.add_subcommand("scenario", "Emit a preset scenario spec");
    std::string scen_name = "rmse";
    scen->add_option("preset", scen_name, "scenario1, scenario2, rmse or rmse2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (sim->parsed()) {
            json o = {{"seed", g.seed}, {"trial", sim_trial}};
            if (sim_ber >= 0.0 || sim->count("--ber")) o["ber"] = sim_ber;
            if (!sim_const.empty()) o["constellation"] = sim_const;
            if (!g.seed_set) o.erase("seed");
            ddsr_measurement* raw = nullptr;
            const std::string text = read_input(sim_scene);
            const std::string opts = o.dump();
            check(ddsr_simulate(text.c_str(), opts.c_str(), &raw));
            MeasurementPtr m(raw, ddsr_measurement_free);
            Owned js;
            check(ddsr_measurement_to_json(m.get(), &js.p));
            write_output(g.out, js.str());
        } else if (sol->parsed()) {
            const std::string text = read_input(sol_in);
            ddsr_measurement* raw = nullptr;
            check(ddsr_measurement_from_json(text.c_str(), &raw));
            MeasurementPtr m(raw, ddsr_measurement_free);
            json o = json::object();
            if (sol->count("--lambda")) o["lambda"] = sol_lambda;
            if (sol->count("--mu")) o["mu"] = sol_mu;
            if (sol->count("--rho")) o["rho"] = sol_rho;
            if (sol->count("--iters")) o["max_iters"] = sol_iters;
            if (sol->count("--tol")) o["tol_primal"] = o["tol_dual"] = sol_tol;
            if (sol->count("--oversample")) o["oversample"] = sol_oversample;
            if (sol->count("--K")) o["K_signal"] = sol_k;
            const std::string opts = o.dump();
            note(g, "solving with " + sol_algo + "...");
            ddsr_result* rr = nullptr;
            check(ddsr_solve(m.get(), sol_algo.c_str(), opts.c_str(), &rr));
            ResultPtr r(rr, ddsr_result_free);
            Owned doc;
            if (g.format == "csv") {
                check(ddsr_result_to_csv(r.get(), &doc.p));
            } else {
                check(ddsr_result_to_json(r.get(), &doc.p));
            }
            write_output(g.out, doc.str());
            if (!sol_spectrum.empty()) {
                Owned grid;
                check(ddsr_result_spectrum_csv(r.get(), 4, &grid.p));
                write_output(sol_spectrum, grid.str());
            }
            std::size_t count = 0;
            check(ddsr_result_path_count(r.get(), &count));
            note(g, std::to_string(count) + " paths");
        } else if (spec->parsed()) {
            const std::string text = read_input(spec_in);
            Owned csv;
            if (spec_peaks) {
                check(ddsr_dual_peaks_csv(text.c_str(), &csv.p));
            } else {
                check(ddsr_dual_spectrum_csv(text.c_str(), spec_oversample, &csv.p));
            }
            write_output(g.out, csv.str());
        } else if (bench->parsed()) {
            json s;
            if (!bench_spec.empty()) {
                s = json::parse(read_input(bench_spec), nullptr, false);
                if (s.is_discarded()) throw Failure{DDSR_ERR_CONFIG, "malformed spec file '" + bench_spec + "'"};
            } else {
                Owned p;
                check(ddsr_scenario_preset(bench_preset.empty() ? "rmse" : bench_preset.c_str(), &p.p));
                s = json::parse(p.str());
            }
            if (bench_M > 0 || bench_N > 0) {
                if (!s.contains("config")) throw Failure{DDSR_ERR_CONFIG, "spec has no config to override"};
                if (bench_M > 0) s["config"]["M"] = bench_M;
                if (bench_N > 0) s["config"]["N"] = bench_N;
            }
            if (g.seed_set) s["seed"] = g.seed;
            json o = json::object();
            const auto bers = split_list(bench_bers);
            if (!bers.empty()) {
                json arr = json::array();
                for (const auto& b : bers) {
                    try {
                        std::size_t used = 0;
                        const double v = std::stod(b, &used);
                        if (used != b.size()) throw std::invalid_argument(b);
                        arr.push_back(v);
                    } catch (const std::exception&) {
                        throw Failure{DDSR_ERR_CONFIG, "bad --ber value '" + b + "'"};
                    }
                }
                o["bers"] = arr;
            }
            const auto algos = split_list(bench_algos);
            if (!algos.empty()) o["algorithms"] = algos;
            if (bench_trials > 0 || bench->count("--trials")) o["trials"] = bench_trials;
            if (bench->count("--iters")) o["max_iters"] = bench_iters;
            if (bench->count("--tol")) o["tol"] = bench_tol;
            if (bench->count("--threads")) o["threads"] = bench_threads;
            o["verbose"] = !g.quiet;
            const std::string spec_text = s.dump();
            const std::string opts = o.dump();
            Owned csv, raw, js;
            check(ddsr_bench(spec_text.c_str(), opts.c_str(), &csv.p, &raw.p, &js.p));
            write_output(g.out, g.format == "json" && app.get_option("--format")->count() ? js.str() : csv.str());
            if (!bench_raw.empty()) write_output(bench_raw, raw.str());
        } else if (scen->parsed()) {
            Owned p;
            check(ddsr_scenario_preset(scen_name.c_str(), &p.p));
            write_output(g.out, p.str());
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return exit_code(f.status);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
