#pragma once

#include <string>

#include <json.hpp>

#include "ddsr/admm.hpp"
#include "ddsr/bench.hpp"
#include "ddsr/extract.hpp"
#include "ddsr/scene.hpp"

namespace ddsr::io {

using json = nlohmann::json;

/// Complex vectors travel as flat [re0, im0, re1, im1, ...] arrays.
json complex_array(const CVec& v);
CVec complex_from_json(const json& j, Index expected_size = -1);

json to_json(const RadarConfig& config);
RadarConfig config_from_json(const json& j);

/// Paths accept {alpha_re, alpha_im, phi, psi} or {power_db, range_m, velocity_mps[, phase_rad]}.
json to_json(const Scene& scene);
Scene scene_from_json(const json& j, const RadarConfig& config);

json to_json(const Measurement& measurement);
Measurement measurement_from_json(const json& j);

json to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const json& j, const SolverConfig& base);

json to_json(const Solution& solution, const SolverConfig& config);

json to_json(const Estimate& estimate, const RadarConfig& config);

json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const json& j);

json to_json(const RmseReport& report);

/// phi,psi,range_m,velocity_mps,amp_re,amp_im,dual_peak_mag
std::string estimate_csv(const Estimate& estimate, const RadarConfig& config);

/// One grid row per line; rows index phi, columns index psi.
std::string grid_csv(const RMat& grid);

json parse(const std::string& text);

} // namespace ddsr::io
