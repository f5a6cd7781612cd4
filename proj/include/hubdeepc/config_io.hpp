#pragma once

// JSON scenario files. A file names a preset ("desk" or "full") and
// overrides any subset of its fields; unknown keys are rejected.
//
//   {"preset": "desk", "seed": 3, "deepc": {"lambda_g": 500}}

#include <fstream>
#include <string>

#include <json.hpp>

#include "hubdeepc/error.hpp"
#include "hubdeepc/harness.hpp"

namespace hubdeepc {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BuildingParams, alpha, c_zone, c_mass, c_wall_in, c_wall_out,
                                   c_floor, h_zone_mass, h_zone_wall, h_wall, h_wall_amb,
                                   h_infiltration, h_zone_floor, h_floor_ground, h_adjacent,
                                   k_solar, blind_zone, blind_facade, initial_temperature)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BatteryParams, E0, K, A_exp, B_exp, Q, soc_floor,
                                   nominal_capacity, R0_nom, k_r, k_fade, current_limit,
                                   initial_soc)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DeepcConfig, T_ini, T_f, beta, lambda_g, lambda_rho, C_h, alpha,
                                   v_lin, u_b_bounds, y_b_bounds, u_s_bounds, blind_bounds,
                                   solver_tol, solver_max_iter, equality_rank_tol)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RbcConfig, charge_start, charge_end, discharge_start,
                                   discharge_end, charge_current, soc_high, soc_low,
                                   prbs_amp_building, prbs_amp_battery, prbs_amp_blinds,
                                   prbs_order, u_min, u_max, i_min, i_max, blinds_open_start,
                                   blinds_open_end, blinds_open, blinds_closed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ComfortSchedule, occupied_band, unoccupied_band,
                                   unoccupied_start, unoccupied_end)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TariffParams, day_price, night_price, day_start, day_end)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(WeatherParams, ambient_mean, ambient_seasonal, ambient_diurnal,
                                   ambient_noise, ground_mean, ground_seasonal, ground_noise,
                                   solar_peak_mean, solar_peak_seasonal, facade_factor, cloud_min,
                                   facade_jitter, gains_peak, gains_base, zone_occupancy,
                                   gains_noise, office_start, office_end)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ScenarioConfig, name, horizon_days, start_day, seed, building,
                                   battery, deepc, rbc, comfort, tariff, weather, T_d, T_s,
                                   n_bound, collect_start_day, warmup_hours, soc_guard_lo,
                                   soc_guard_hi, prbs_enabled)

namespace detail {

inline void reject_unknown(const nlohmann::json& given, const nlohmann::json& known,
                           const std::string& path) {
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    require(known.contains(it.key()), ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
    const auto& k = known.at(it.key());
    if (it->is_object()) {
      require(k.is_object(), ErrorKind::InvalidConfig, "'" + key + "' is not a section");
      reject_unknown(*it, k, key);
    }
  }
}

}  // namespace detail

inline ScenarioConfig preset(const std::string& name) {
  if (name == "desk") return ScenarioConfig::desk();
  if (name == "full") return ScenarioConfig::full();
  throw Error(ErrorKind::InvalidConfig, "unknown preset '" + name + "'");
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::InvalidConfig, "config must be a JSON object");
  nlohmann::json overrides = j;
  std::string base = "desk";
  if (overrides.contains("preset")) {
    require(overrides["preset"].is_string(), ErrorKind::InvalidConfig, "preset must be a string");
    base = overrides["preset"].get<std::string>();
    overrides.erase("preset");
  }
  nlohmann::json merged = preset(base);
  detail::reject_unknown(overrides, merged, "");
  merged.merge_patch(overrides);
  ScenarioConfig cfg;
  try {
    cfg = merged.get<ScenarioConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const std::string& path, const ScenarioConfig& cfg) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path);
  os << nlohmann::json(cfg).dump(2) << '\n';
}

}  // namespace hubdeepc
