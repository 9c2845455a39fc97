#include "ddsr/io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ddsr::io {

namespace {

template <class T>
T get(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) && !j.at(key).is_null() ? get<T>(j, key) : fallback;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json bounds(const Bounds& b) { return json::array({b.lo, b.hi}); }

Bounds bounds_from(const json& j, const char* key, Bounds fallback) {
    if (!j.contains(key)) return fallback;
    const auto v = get<std::vector<double>>(j, key);
    if (v.size() != 2) throw ConfigError(std::string("field '") + key + "' must be [lo, hi]");
    return {v[0], v[1]};
}

json path_json(const Path& p) { return {{"alpha_re", p.alpha.real()}, {"alpha_im", p.alpha.imag()}, {"phi", p.phi}, {"psi", p.psi}}; }

Path path_from(const json& j, const RadarConfig& config) {
    if (j.contains("power_db")) {
        const auto f = physical_to_normalized(get<double>(j, "range_m"), get<double>(j, "velocity_mps"), config);
        const double mag = std::pow(10.0, get<double>(j, "power_db") / 20.0);
        return {std::polar(mag, get_or<double>(j, "phase_rad", 0.0)), f.phi, f.psi};
    }
    Path p{cplx(get<double>(j, "alpha_re"), get_or<double>(j, "alpha_im", 0.0)), get<double>(j, "phi"),
           get<double>(j, "psi")};
    return p;
}

json index_list(const std::vector<Index>& v) {
    json a = json::array();
    for (Index i : v) a.push_back(static_cast<long long>(i));
    return a;
}

std::vector<Index> index_list_from(const json& j, const char* key) {
    std::vector<Index> out;
    for (long long i : get_or<std::vector<long long>>(j, key, {})) out.push_back(static_cast<Index>(i));
    return out;
}

} // namespace

json complex_array(const CVec& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i].real());
        a.push_back(v[i].imag());
    }
    return a;
}

CVec complex_from_json(const json& j, Index expected_size) {
    if (!j.is_array() || j.size() % 2 != 0) throw ConfigError("complex array must hold interleaved re/im pairs");
    const Index n = static_cast<Index>(j.size() / 2);
    if (expected_size >= 0 && n != expected_size) {
        throw ConfigError("complex array has " + std::to_string(n) + " entries, expected " +
                          std::to_string(expected_size));
    }
    CVec v(n);
    for (Index i = 0; i < n; ++i) {
        if (!j[2 * i].is_number() || !j[2 * i + 1].is_number()) throw ConfigError("complex array holds a non-number");
        v[i] = cplx(j[2 * i].get<double>(), j[2 * i + 1].get<double>());
    }
    return v;
}

json to_json(const RadarConfig& c) {
    return {{"M", c.M},         {"N", c.N},       {"delta_f_hz", c.delta_f},
            {"T_s", c.T},       {"T_cp_s", c.T_cp}, {"f_c_hz", c.f_c},
            {"noise_power_db", number(c.noise_power_db)}};
}

RadarConfig config_from_json(const json& j) {
    const double T = get_or<double>(j, "T_s", 0.0);
    double df = get_or<double>(j, "delta_f_hz", 0.0);
    if (df == 0.0 && T > 0.0) df = 1.0 / T;
    const double Tused = T > 0.0 ? T : (df > 0.0 ? 1.0 / df : 0.0);
    // null encodes a noiseless configuration
    const double noise_db = j.contains("noise_power_db") && j["noise_power_db"].is_null()
                                ? -std::numeric_limits<double>::infinity()
                                : get_or<double>(j, "noise_power_db", -40.0);
    return RadarConfig::create(get<int>(j, "M"), get<int>(j, "N"), df, Tused, get_or<double>(j, "T_cp_s", Tused / 2.0),
                               get<double>(j, "f_c_hz"), noise_db);
}

json to_json(const Scene& s) {
    json t = json::array(), c = json::array();
    for (const auto& p : s.targets) t.push_back(path_json(p));
    for (const auto& p : s.clutter) c.push_back(path_json(p));
    return {{"targets", t}, {"clutter", c}};
}

Scene scene_from_json(const json& j, const RadarConfig& config) {
    Scene s;
    for (const auto& p : get_or<json>(j, "targets", json::array())) s.targets.push_back(path_from(p, config));
    for (const auto& p : get_or<json>(j, "clutter", json::array())) s.clutter.push_back(path_from(p, config));
    s.validate();
    return s;
}

json to_json(const Measurement& m) {
    const CVec s = Eigen::Map<const CVec>(m.S_hat.data(), m.S_hat.size());
    json j = {{"config", to_json(m.config)},
              {"S_hat", complex_array(s)},
              {"r_bar", complex_array(m.r_bar)},
              {"sigma2", m.sigma2},
              {"error_mask", index_list(m.error_mask)}};
    if (m.z_bar_true) j["z_bar_true"] = complex_array(*m.z_bar_true);
    if (m.e_bar_true) j["e_bar_true"] = complex_array(*m.e_bar_true);
    if (m.v_bar_true) j["v_bar_true"] = complex_array(*m.v_bar_true);
    if (m.truth) j["truth"] = to_json(*m.truth);
    if (m.metadata) {
        j["metadata"] = {{"seed", m.metadata->seed}, {"ber", m.metadata->ber},
                         {"constellation", m.metadata->constellation}};
    }
    return j;
}

Measurement measurement_from_json(const json& j) {
    Measurement m;
    m.config = config_from_json(get<json>(j, "config"));
    const Index mn = m.config.size();
    const CVec s = complex_from_json(get<json>(j, "S_hat"), mn);
    m.S_hat = Eigen::Map<const CMat>(s.data(), m.config.M, m.config.N);
    m.r_bar = complex_from_json(get<json>(j, "r_bar"), mn);
    m.sigma2 = get_or<double>(j, "sigma2", m.config.sigma2());
    m.error_mask = index_list_from(j, "error_mask");
    if (j.contains("z_bar_true")) m.z_bar_true = complex_from_json(j["z_bar_true"], mn);
    if (j.contains("e_bar_true")) m.e_bar_true = complex_from_json(j["e_bar_true"], mn);
    if (j.contains("v_bar_true")) m.v_bar_true = complex_from_json(j["v_bar_true"], mn);
    if (j.contains("truth")) m.truth = scene_from_json(j["truth"], m.config);
    if (j.contains("metadata")) {
        const auto& md = j["metadata"];
        m.metadata = SimMetadata{get_or<std::uint64_t>(md, "seed", 0), get_or<double>(md, "ber", 0.0),
                                 get_or<std::string>(md, "constellation", "")};
    }
    m.validate();
    return m;
}

json to_json(const SolverConfig& c) {
    return {{"lambda", c.lambda},       {"mu", c.mu},           {"rho", c.rho},
            {"max_iters", c.max_iters}, {"tol_primal", c.tol_primal}, {"tol_dual", c.tol_dual}};
}

SolverConfig solver_config_from_json(const json& j, const SolverConfig& base) {
    SolverConfig c = base;
    c.lambda = get_or<double>(j, "lambda", c.lambda);
    c.mu = get_or<double>(j, "mu", c.mu);
    c.rho = get_or<double>(j, "rho", c.rho);
    c.max_iters = get_or<int>(j, "max_iters", c.max_iters);
    c.tol_primal = get_or<double>(j, "tol_primal", c.tol_primal);
    c.tol_dual = get_or<double>(j, "tol_dual", c.tol_dual);
    c.validate();
    return c;
}

json to_json(const Solution& s, const SolverConfig& config) {
    const auto& d = s.diagnostics;
    json hist = json::array();
    for (const auto& h : d.history) hist.push_back({number(h.primal_residual), number(h.dual_residual), number(h.objective)});
    return {{"config", to_json(config)},
            {"z_hat", complex_array(s.z_hat)},
            {"e_hat", complex_array(s.e_hat)},
            {"nu_hat", complex_array(s.nu_hat)},
            {"objective", number(d.final_objective)},
            {"primal_residual", number(d.final_primal_residual)},
            {"dual_residual", number(d.final_dual_residual)},
            {"iterations", d.iterations},
            {"converged", d.converged},
            {"seconds", d.seconds},
            {"history_columns", {"primal", "dual", "objective"}},
            {"history", hist}};
}

json to_json(const Estimate& e, const RadarConfig& config) {
    json paths = json::array();
    for (const auto& p : e.paths) {
        const auto phys = normalized_to_physical(p.phi, p.psi, config);
        paths.push_back({{"phi", p.phi},
                         {"psi", p.psi},
                         {"range_m", phys.range_m},
                         {"velocity_mps", phys.velocity_mps},
                         {"amp_re", p.alpha.real()},
                         {"amp_im", p.alpha.imag()},
                         {"dual_peak_mag", p.dual_peak}});
    }
    return {{"algorithm", e.algorithm},
            {"paths", paths},
            {"error_support_applicable", e.error_support_applicable},
            {"error_support", index_list(e.error_support)},
            {"dual_confirmed_errors", index_list(e.dual_confirmed_errors)}};
}

json to_json(const ScenarioSpec& s) {
    return {{"name", s.name},
            {"config", to_json(s.config)},
            {"n_targets", s.n_targets},
            {"n_clutter", s.n_clutter},
            {"target_powers_db", s.target_powers_db},
            {"clutter_power_db", s.clutter_power_db},
            {"direct_path", s.direct_path},
            {"direct_path_power_db", s.direct_path_power_db},
            {"direct_path_range_m", s.direct_path_range_m},
            {"range_bounds_m", bounds(s.range_bounds_m)},
            {"clutter_velocity_bounds_mps", bounds(s.clutter_velocity_bounds_mps)},
            {"target_velocity_bounds_mps", bounds(s.target_velocity_bounds_mps)},
            {"ber", s.ber},
            {"seed", s.seed},
            {"trials", s.trials},
            {"constellation", s.constellation}};
}

ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec s = j.contains("preset") ? ScenarioSpec::preset(get<std::string>(j, "preset")) : ScenarioSpec{};
    s.name = get_or<std::string>(j, "name", s.name);
    if (j.contains("config")) s.config = config_from_json(j["config"]);
    s.n_targets = get_or<int>(j, "n_targets", s.n_targets);
    s.n_clutter = get_or<int>(j, "n_clutter", s.n_clutter);
    s.target_powers_db = get_or<std::vector<double>>(j, "target_powers_db", s.target_powers_db);
    s.clutter_power_db = get_or<double>(j, "clutter_power_db", s.clutter_power_db);
    s.direct_path = get_or<bool>(j, "direct_path", s.direct_path);
    s.direct_path_power_db = get_or<double>(j, "direct_path_power_db", s.direct_path_power_db);
    s.direct_path_range_m = get_or<double>(j, "direct_path_range_m", s.direct_path_range_m);
    s.range_bounds_m = bounds_from(j, "range_bounds_m", s.range_bounds_m);
    s.clutter_velocity_bounds_mps = bounds_from(j, "clutter_velocity_bounds_mps", s.clutter_velocity_bounds_mps);
    s.target_velocity_bounds_mps = bounds_from(j, "target_velocity_bounds_mps", s.target_velocity_bounds_mps);
    s.ber = get_or<double>(j, "ber", s.ber);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
    s.trials = get_or<int>(j, "trials", s.trials);
    s.constellation = get_or<std::string>(j, "constellation", s.constellation);
    s.validate();
    return s;
}

json to_json(const RmseReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"ber", row.ber},
                        {"algorithm", row.algorithm},
                        {"range_rmse_m", number(row.range_rmse_m)},
                        {"velocity_rmse_mps", number(row.velocity_rmse_mps)},
                        {"identification_rate", row.identification_rate},
                        {"trials_used", row.trials_used}});
    }
    return {{"scenario", r.scenario}, {"seed", r.seed}, {"rows", rows}};
}

std::string estimate_csv(const Estimate& e, const RadarConfig& config) {
    std::ostringstream os;
    os << "phi,psi,range_m,velocity_mps,amp_re,amp_im,dual_peak_mag\n";
    for (const auto& p : e.paths) {
        const auto phys = normalized_to_physical(p.phi, p.psi, config);
        os << format_double(p.phi) << ',' << format_double(p.psi) << ',' << format_double(phys.range_m) << ','
           << format_double(phys.velocity_mps) << ',' << format_double(p.alpha.real()) << ','
           << format_double(p.alpha.imag()) << ',' << format_double(p.dual_peak) << '\n';
    }
    return os.str();
}

std::string grid_csv(const RMat& grid) {
    std::ostringstream os;
    for (Index i = 0; i < grid.rows(); ++i) {
        for (Index k = 0; k < grid.cols(); ++k) {
            if (k) os << ',';
            os << format_double(grid(i, k));
        }
        os << '\n';
    }
    return os.str();
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
}

} // namespace ddsr::io
