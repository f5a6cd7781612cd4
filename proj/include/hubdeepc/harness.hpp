#pragma once

// Closed-loop simulation of the energy hub: data collection, DeePC and RBC
// episodes, metrics and the paired comparison.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hubdeepc/battery.hpp"
#include "hubdeepc/building.hpp"
#include "hubdeepc/error.hpp"
#include "hubdeepc/heat_pump.hpp"
#include "hubdeepc/hub_controller.hpp"
#include "hubdeepc/profiles.hpp"
#include "hubdeepc/rbc.hpp"
#include "hubdeepc/trajectory.hpp"

namespace hubdeepc {

struct ScenarioConfig {
  std::string name = "desk";
  int horizon_days = 10;
  int start_day = 12;
  std::uint64_t seed = 1;
  BuildingParams building;
  BatteryParams battery;
  DeepcConfig deepc;
  RbcConfig rbc;
  ComfortSchedule comfort;
  TariffParams tariff;
  WeatherParams weather;
  int T_d = 4416;
  double T_s = 1.0;
  int n_bound = 30;
  int collect_start_day = 258;
  int warmup_hours = 48;
  double soc_guard_lo = 0.05;
  double soc_guard_hi = 1.0;
  bool prbs_enabled = true;

  ScenarioConfig() {
    deepc.u_s_bounds = {0.0, 15.0};
    rbc.u_max = 15.0;
    deepc.solver_tol = 1e-4;
    battery.k_fade = 2.307e-5;  // calibrate-fade on the one-year baseline
  }

  long start_hour() const { return static_cast<long>(start_day - 1) * 24; }
  int horizon_hours() const { return horizon_days * 24; }

  void validate() const {
    require(horizon_days >= 1, ErrorKind::InvalidConfig, "horizon_days must be >= 1");
    require(start_day >= 1 && start_day <= 365 && collect_start_day >= 1 && collect_start_day <= 365,
            ErrorKind::InvalidConfig, "days must be in [1, 365]");
    require(T_d >= deepc.T_ini + deepc.T_f, ErrorKind::InvalidConfig, "T_d must be >= T_ini + T_f");
    require(T_s == 1.0, ErrorKind::InvalidConfig, "only hourly sampling is supported");
    require(warmup_hours >= deepc.T_ini, ErrorKind::InvalidConfig,
            "warm-up must provide at least T_ini samples");
    require(soc_guard_lo >= 0.0 && soc_guard_lo < soc_guard_hi && soc_guard_hi <= 1.0,
            ErrorKind::InvalidConfig, "soc guard must satisfy 0 <= lo < hi <= 1");
    require(n_bound >= 0, ErrorKind::InvalidConfig, "n_bound must be >= 0");
    deepc.validate(HubLayout{});
    rbc.validate();
    comfort.validate();
    for (int z = 0; z < kZones; ++z) {
      require(building.alpha[z] == deepc.alpha[z], ErrorKind::InvalidConfig,
              "building and controller conversion factors differ");
    }
  }

  /// Full-scale values: 4416 h of data, T_ini = 30, one simulated year.
  static ScenarioConfig full() {
    ScenarioConfig c;
    c.name = "full";
    c.horizon_days = 365;
    c.start_day = 1;
    c.n_bound = 120;
    c.deepc.T_ini = 30;
    return c;
  }

  /// Shorter initial window and a ten-day winter episode.
  static ScenarioConfig desk() {
    ScenarioConfig c;
    c.deepc.T_ini = 12;
    return c;
  }
};

// --- plant ---------------------------------------------------------------------

struct HubInputs {
  Eigen::VectorXd u_s;     // zones, kW
  Eigen::VectorXd blinds;  // blinds
  double u_b = 0.0;        // A
};

/// Building, heat pump and battery with the harness-level current guard.
class HubPlant {
 public:
  HubPlant(const ScenarioConfig& cfg, bool ageing)
      : cfg_(cfg), model_(make_building(cfg.building)), ageing_(ageing) {
    x_ = uniform_state(model_, cfg.building.initial_temperature);
    bat_ = fresh_battery(cfg.battery, cfg.battery.initial_soc);
  }

  const BuildingState& building_state() const { return x_; }
  const BatteryState& battery() const { return bat_; }
  const BuildingModel& model() const { return model_; }

  Eigen::VectorXd zone_temperatures() const { return model_.C_c * x_.x_s; }

  struct Sample {
    Eigen::VectorXd u;  // applied, layout order
    Eigen::VectorXd y;
    double u_b_cmd = 0.0;
    double p = 0.0;  // kW
  };

  /// Applies inputs for one hour under disturbances v; outputs are those at
  /// the start of the hour (temperatures) with direct feedthrough of u_h and u_b.
  Sample step(const HubInputs& in, const Eigen::VectorXd& v) {
    const HubLayout L;
    Sample s;
    s.u = Eigen::VectorXd::Zero(L.m());
    s.y = Eigen::VectorXd::Zero(L.p());
    double heat = 0.0;
    for (int i = 0; i < kZones; ++i) heat += in.u_s(i) / cfg_.building.alpha[i];
    const double u_h = heat / cfg_.deepc.C_h;
    s.u_b_cmd = in.u_b;
    const double i_b = limit_current(bat_, in.u_b, cfg_.T_s, cfg_.soc_guard_lo, cfg_.soc_guard_hi);
    s.u.head(kZones) = in.u_s;
    s.u.segment(kZones, kBlinds) = in.blinds;
    s.u(L.u_h()) = u_h;
    s.u(L.u_b()) = i_b;
    s.u.tail(kDisturbances) = v;
    s.y.head(kZones) = zone_temperatures();
    s.y(L.y_h()) = heat_pump_output(u_h, cfg_.deepc.C_h);
    Eigen::VectorXd u_bld(kBuildingInputs);
    u_bld << in.u_s, in.blinds;
    x_ = building_step(model_, x_, u_bld, v, cfg_.T_s).first;
    const BatteryStepResult r = battery_step(bat_, i_b, cfg_.T_s, cfg_.battery, ageing_);
    s.y(L.y_b()) = r.y_b;
    bat_ = r.state;
    s.p = u_h - (cfg_.deepc.v_lin / 1000.0) * i_b;
    return s;
  }

 private:
  ScenarioConfig cfg_;
  BuildingModel model_;
  BuildingState x_;
  BatteryState bat_;
  bool ageing_;
};

/// PRBS dither for radiators, blinds and battery; one register per channel.
class DitherSource {
 public:
  DitherSource(const ScenarioConfig& cfg, std::uint64_t stream) : enabled_(cfg.prbs_enabled) {
    const int order = cfg.rbc.prbs_order;
    for (int i = 0; i < kZones; ++i) {
      gens_.emplace_back(order, prbs_seed(cfg.seed ^ stream, i, order), cfg.rbc.prbs_amp_building);
    }
    for (int i = 0; i < kBlinds; ++i) {
      gens_.emplace_back(order, prbs_seed(cfg.seed ^ stream, kZones + i, order), cfg.rbc.prbs_amp_blinds);
    }
    gens_.emplace_back(order, prbs_seed(cfg.seed ^ stream, kZones + kBlinds, order), cfg.rbc.prbs_amp_battery);
  }

  /// radiators (5), blinds (4), battery (1); all zero when disabled.
  Eigen::VectorXd next() {
    Eigen::VectorXd d(gens_.size());
    for (size_t i = 0; i < gens_.size(); ++i) {
      const double v = gens_[i].next();
      d(i) = enabled_ ? v : 0.0;
    }
    return d;
  }

 private:
  bool enabled_;
  std::vector<PrbsGenerator> gens_;
};

inline HubInputs rbc_inputs(const ScenarioConfig& cfg, const HubPlant& plant, long hour,
                            const Eigen::VectorXd* dither) {
  const int h = hour_of_day(hour);
  const auto band = comfort_bounds_at(h, cfg.comfort);
  const Eigen::VectorXd y = plant.zone_temperatures();
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(kZones, band.first);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(kZones, band.second);
  HubInputs in;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(kZones + kBlinds + 1);
  const Eigen::VectorXd& d = dither ? *dither : zero;
  in.u_s = rbc_building_control(y, lo, hi, d.head(kZones), cfg.rbc.u_min, cfg.rbc.u_max);
  in.blinds = rbc_blinds(h, cfg.rbc, d.segment(kZones, kBlinds));
  in.u_b = rbc_battery_control(h, plant.battery().soc, cfg.rbc, d(kZones + kBlinds));
  return in;
}

// --- data collection -------------------------------------------------------------

struct CollectionResult {
  Trajectory data;
  HankelBlocks blocks;
  ExcitationReport pe;
};

/// Rows of the input record that are excited independently (u_h is a
/// deterministic function of the radiator inputs and is left out).
inline Eigen::MatrixXd independent_inputs(const Trajectory& data) {
  const HubLayout L;
  std::vector<int> rows;
  for (int i = 0; i < L.m(); ++i) {
    if (i != L.u_h()) rows.push_back(i);
  }
  Eigen::MatrixXd u(rows.size(), data.length());
  for (size_t r = 0; r < rows.size(); ++r) u.row(r) = data.inputs.row(rows[r]);
  return u;
}

inline ExcitationReport validate_pe(const Trajectory& data, const ScenarioConfig& cfg) {
  const Eigen::MatrixXd u = independent_inputs(data);
  SignalDims dims{static_cast<int>(u.rows()), data.output_dim(), cfg.n_bound};
  return check_persistent_excitation(u, cfg.deepc.T_ini + cfg.deepc.T_f, dims);
}

/// Weather seed for data collection: a different synthetic year than the
/// episodes that use the controller.
inline std::uint64_t collection_weather_seed(std::uint64_t seed) {
  return seed ^ 0x9e3779b97f4a7c15ULL;
}

/// RBC with PRBS dither for T_d hours, ageing disabled.
inline CollectionResult collect_data(const ScenarioConfig& cfg, bool require_pe = true) {
  cfg.validate();
  HubPlant plant(cfg, false);
  DitherSource dither(cfg, 0xc011ec7ULL);
  const long h0 = static_cast<long>(cfg.collect_start_day - 1) * 24;
  const Eigen::MatrixXd V =
      disturbance_window(h0, cfg.T_d, collection_weather_seed(cfg.seed), cfg.weather);
  const HubLayout L;
  Trajectory data;
  data.inputs.resize(L.m(), cfg.T_d);
  data.outputs.resize(L.p(), cfg.T_d);
  data.sample_time = cfg.T_s;
  for (int t = 0; t < cfg.T_d; ++t) {
    const Eigen::VectorXd d = dither.next();
    const HubInputs in = rbc_inputs(cfg, plant, h0 + t, &d);
    const auto s = plant.step(in, V.col(t));
    data.inputs.col(t) = s.u;
    data.outputs.col(t) = s.y;
  }
  CollectionResult r;
  r.pe = validate_pe(data, cfg);
  if (require_pe) {
    require(r.pe.exciting, ErrorKind::NotExciting,
            "collected data is not persistently exciting (rank " + std::to_string(r.pe.rank) +
                " of " + std::to_string(r.pe.required_rank) + ", length slack " +
                std::to_string(r.pe.length_slack) + ")");
  }
  r.data = std::move(data);
  r.blocks = partition_hankel(r.data, cfg.deepc.T_ini, cfg.deepc.T_f);
  return r;
}

// --- episodes --------------------------------------------------------------------

struct StepRecord {
  long hour = 0;
  Eigen::VectorXd u;  // applied inputs, layout order
  Eigen::VectorXd y;  // outputs
  double u_b_cmd = 0.0;
  double soc = 0.0, capacity = 0.0, cycles = 0.0, capacity_loss = 0.0;
  double price = 0.0, p = 0.0;
  std::string status;
  int iterations = 0;
};

struct EpisodeLog {
  std::string controller;  // "deepc" or "rbc"
  std::string scenario;
  std::uint64_t seed = 0;
  int start_day = 0;
  int horizon_days = 0;
  int T_f = 0;
  double runtime_s = 0.0;
  double initial_cycles = 0.0;  // battery state when logging starts
  double initial_capacity_loss = 0.0;
  std::vector<StepRecord> steps;
  std::vector<Eigen::MatrixXd> predictions;  // per step, outputs x T_f (DeePC only)
  std::vector<Eigen::MatrixXd> simulated;    // plant response to the same plan, open loop

  int length() const { return static_cast<int>(steps.size()); }
};

enum class ControllerKind { Deepc, Rbc };

struct EpisodeOptions {
  int progress_every = 0;  // hours; 0 = silent
};

/// Hourly closed loop. The first warmup_hours run the baseline RBC and are not
/// logged; DeePC failures hold the previous input for that hour.
inline EpisodeLog run_episode(const ScenarioConfig& cfg, ControllerKind kind,
                              const HubDeepcController* deepc = nullptr,
                              const EpisodeOptions& opt = {}) {
  cfg.validate();
  require(kind == ControllerKind::Rbc || deepc != nullptr, ErrorKind::InvalidConfig,
          "DeePC episode needs Hankel blocks");
  const auto t0 = std::chrono::steady_clock::now();
  const HubLayout L;
  const TariffProfile tariff = generate_tariff(cfg.seed, cfg.tariff);
  HubPlant plant(cfg, true);
  const long h_start = cfg.start_hour();
  const long h_warm = h_start - cfg.warmup_hours;
  const int T_f = cfg.deepc.T_f;
  const int total = cfg.warmup_hours + cfg.horizon_hours();
  const Eigen::MatrixXd V = disturbance_window(h_warm, total + T_f, cfg.seed, cfg.weather);

  EpisodeLog log;
  log.controller = kind == ControllerKind::Deepc ? "deepc" : "rbc";
  log.scenario = cfg.name;
  log.seed = cfg.seed;
  log.start_day = cfg.start_day;
  log.horizon_days = cfg.horizon_days;
  log.T_f = T_f;

  const int T_ini = cfg.deepc.T_ini;
  Trajectory window;
  window.inputs = Eigen::MatrixXd::Zero(L.m(), T_ini);
  window.outputs = Eigen::MatrixXd::Zero(L.p(), T_ini);
  auto push = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    if (T_ini > 1) {
      window.inputs.leftCols(T_ini - 1) = window.inputs.rightCols(T_ini - 1).eval();
      window.outputs.leftCols(T_ini - 1) = window.outputs.rightCols(T_ini - 1).eval();
    }
    window.inputs.col(T_ini - 1) = u;
    window.outputs.col(T_ini - 1) = y;
  };

  HubInputs held;
  bool have_held = false;
  std::optional<DeepcWarmStart> warm;
  for (int t = 0; t < total; ++t) {
    const long hour = h_warm + t;
    const bool logged = t >= cfg.warmup_hours;
    if (t == cfg.warmup_hours) {
      log.initial_cycles = plant.battery().cycles;
      log.initial_capacity_loss = plant.battery().capacity_loss;
    }
    HubInputs in;
    StepRecord rec;
    Eigen::MatrixXd pred, sim;
    if (!logged || kind == ControllerKind::Rbc) {
      in = rbc_inputs(cfg, plant, hour, nullptr);
      rec.status = "rbc";
    } else {
      Eigen::VectorXd prices(T_f);
      for (int k = 0; k < T_f; ++k) prices(k) = tariff.at(hour + k);
      try {
        const ControlPlan plan = deepc->step(window, V.middleCols(t, T_f),
                                             prices, hour, warm ? &*warm : nullptr);
        const auto& c = cfg.deepc;
        in.u_s = plan.u_s.col(0).cwiseMax(c.u_s_bounds.first).cwiseMin(c.u_s_bounds.second);
        in.blinds = plan.blinds.col(0).cwiseMax(c.blind_bounds.first).cwiseMin(c.blind_bounds.second);
        in.u_b = std::clamp(plan.u_b(0), c.u_b_bounds.first, c.u_b_bounds.second);
        pred = plan.y_pred;
        sim.resize(L.p(), T_f);
        HubPlant ghost = plant;
        for (int k = 0; k < T_f; ++k) {
          HubInputs pk;
          pk.u_s = plan.u_s.col(k).cwiseMax(c.u_s_bounds.first).cwiseMin(c.u_s_bounds.second);
          pk.blinds = plan.blinds.col(k).cwiseMax(c.blind_bounds.first).cwiseMin(c.blind_bounds.second);
          pk.u_b = std::clamp(plan.u_b(k), c.u_b_bounds.first, c.u_b_bounds.second);
          sim.col(k) = ghost.step(pk, V.col(t + k)).y;
        }
        warm = plan.next_warm;
        rec.status = "optimal";
        rec.iterations = plan.iterations;
      } catch (const DeepcSolveError& e) {
        require(have_held, ErrorKind::SolverFailure, "DeePC failed before any input was applied");
        in = held;
        warm.reset();
        rec.status = std::string("hold_") + to_string(e.status());
      }
    }
    const auto s = plant.step(in, V.col(t));
    held = in;
    have_held = true;
    push(s.u, s.y);
    if (!logged) continue;
    rec.hour = hour;
    rec.u = s.u;
    rec.y = s.y;
    rec.u_b_cmd = s.u_b_cmd;
    rec.soc = plant.battery().soc;
    rec.capacity = plant.battery().capacity;
    rec.cycles = plant.battery().cycles;
    rec.capacity_loss = plant.battery().capacity_loss;
    rec.price = tariff.at(hour);
    rec.p = s.p;
    log.steps.push_back(std::move(rec));
    if (kind == ControllerKind::Deepc) {
      log.predictions.push_back(std::move(pred));
      log.simulated.push_back(std::move(sim));
    }
    if (opt.progress_every > 0 && (t - cfg.warmup_hours + 1) % opt.progress_every == 0) {
      std::fprintf(stderr, "[%s] %d/%d h\n", log.controller.c_str(), t - cfg.warmup_hours + 1,
                   cfg.horizon_hours());
    }
  }
  log.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

/// Capacity-fade coefficient that maps one year of baseline RBC cycling to
/// the given capacity loss.
inline double calibrate_k_fade(ScenarioConfig cfg, double target_loss = 0.008) {
  cfg.horizon_days = 365;
  cfg.battery.k_fade = 0.0;
  const EpisodeLog log = run_episode(cfg, ControllerKind::Rbc);
  const double cycles = log.steps.back().cycles - log.initial_cycles;
  require(cycles > 0, ErrorKind::InvalidConfig, "baseline run did not cycle the battery");
  return target_loss / cycles;
}

// --- metrics ---------------------------------------------------------------------

struct PredictionError {
  Eigen::MatrixXd zones;    // zones x T_f, degC
  Eigen::VectorXd voltage;  // T_f, V
  Eigen::VectorXi counts;   // samples per prediction hour
};

inline PredictionError compute_prediction_error(const EpisodeLog& log, const HubLayout& L = {}) {
  require(!log.predictions.empty() && log.predictions.size() == log.steps.size() &&
              log.simulated.size() == log.predictions.size(),
          ErrorKind::MissingPredictions, "log has no stored plan predictions");
  const int T_f = log.T_f;
  PredictionError e;
  e.zones = Eigen::MatrixXd::Zero(L.n_zones, T_f);
  e.voltage = Eigen::VectorXd::Zero(T_f);
  e.counts = Eigen::VectorXi::Zero(T_f);
  const int n = log.length();
  for (int t = 0; t < n; ++t) {
    const Eigen::MatrixXd& P = log.predictions[t];
    const Eigen::MatrixXd& S = log.simulated[t];
    if (P.size() == 0) continue;
    require(S.rows() == P.rows() && S.cols() == P.cols(), ErrorKind::MissingPredictions,
            "plan at step " + std::to_string(t) + " has no simulated response");
    require(P.rows() == L.p() && P.cols() == T_f, ErrorKind::DimensionMismatch,
            "plan at step " + std::to_string(t) + " does not match the layout");
    for (int k = 0; k < T_f; ++k) {
      for (int z = 0; z < L.n_zones; ++z) e.zones(z, k) += std::abs(P(L.zone(z), k) - S(L.zone(z), k));
      e.voltage(k) += std::abs(P(L.y_b(), k) - S(L.y_b(), k));
      ++e.counts(k);
    }
  }
  for (int k = 0; k < T_f; ++k) {
    if (e.counts(k) == 0) continue;
    e.zones.col(k) /= e.counts(k);
    e.voltage(k) /= e.counts(k);
  }
  return e;
}

struct MetricsReport {
  std::string controller, scenario;
  std::uint64_t seed = 0;
  int start_day = 0, horizon_days = 0;
  double lbv_per_room_hour = 0.0;  // degC
  double ubv_per_room_hour = 0.0;
  double pct_lbv = 0.0;            // %
  double pct_ubv = 0.0;
  double cost = 0.0;               // CHF
  double cycles = 0.0;
  double capacity_loss = 0.0;      // %
  double energy_import = 0.0;      // kWh, sum of p
  int hold_steps = 0;
  std::optional<PredictionError> eps;
};

inline MetricsReport compute_violation_metrics(const EpisodeLog& log, const ComfortSchedule& sched,
                                               double T_s = 1.0) {
  const HubLayout L;
  MetricsReport r;
  r.controller = log.controller;
  r.scenario = log.scenario;
  r.seed = log.seed;
  r.start_day = log.start_day;
  r.horizon_days = log.horizon_days;
  double lbv = 0.0, ubv = 0.0;
  long n_l = 0, n_u = 0, total = 0;
  for (const auto& s : log.steps) {
    const auto band = comfort_bounds_at(hour_of_day(s.hour), sched);
    for (int z = 0; z < L.n_zones; ++z) {
      const double y = s.y(L.zone(z));
      ++total;
      if (y < band.first) {
        lbv += band.first - y;
        ++n_l;
      }
      if (y > band.second) {
        ubv += y - band.second;
        ++n_u;
      }
    }
    r.cost += s.p * s.price * T_s;
    r.energy_import += s.p * T_s;
    if (s.status.rfind("hold", 0) == 0) ++r.hold_steps;
  }
  r.lbv_per_room_hour = n_l ? lbv / n_l : 0.0;
  r.ubv_per_room_hour = n_u ? ubv / n_u : 0.0;
  r.pct_lbv = total ? 100.0 * n_l / total : 0.0;
  r.pct_ubv = total ? 100.0 * n_u / total : 0.0;
  if (!log.steps.empty()) {
    r.cycles = log.steps.back().cycles - log.initial_cycles;
    r.capacity_loss = 100.0 * (log.steps.back().capacity_loss - log.initial_capacity_loss);
  }
  if (!log.predictions.empty()) r.eps = compute_prediction_error(log);
  return r;
}

// --- comparison ------------------------------------------------------------------

struct ComparisonRow {
  std::string metric;
  double deepc = 0.0, rbc = 0.0, ratio = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  bool full_scale = false;
};

inline double safe_ratio(double a, double b) {
  if (a == b) return 1.0;
  if (b == 0.0) return a > 0 ? kInf : -kInf;
  return a / b;
}

inline Comparison compare_report(const MetricsReport& deepc, const MetricsReport& rbc) {
  require(deepc.seed == rbc.seed && deepc.start_day == rbc.start_day &&
              deepc.horizon_days == rbc.horizon_days && deepc.scenario == rbc.scenario,
          ErrorKind::ScenarioMismatch, "reports come from different scenarios");
  Comparison c;
  c.full_scale = deepc.scenario == "full";
  auto add = [&](const std::string& name, double a, double b) {
    c.rows.push_back({name, a, b, safe_ratio(a, b)});
  };
  add("LBV/room/hour [degC]", deepc.lbv_per_room_hour, rbc.lbv_per_room_hour);
  add("UBV/room/hour [degC]", deepc.ubv_per_room_hour, rbc.ubv_per_room_hour);
  add("% LBV", deepc.pct_lbv, rbc.pct_lbv);
  add("% UBV", deepc.pct_ubv, rbc.pct_ubv);
  add("Cost [CHF]", deepc.cost, rbc.cost);
  add("Cycles", deepc.cycles, rbc.cycles);
  add("Capacity loss [%]", deepc.capacity_loss, rbc.capacity_loss);
  return c;
}

/// Full-scale reference values (LBV, UBV, %LBV, %UBV, cost).
struct ReferenceRow {
  const char* controller;
  double lbv, ubv, pct_lbv, pct_ubv, cost;
};
inline constexpr std::array<ReferenceRow, 2> kReferenceRows{{
    {"DeePC", 0.4, 0.0, 2.8, 0.2, 5909.8},
    {"RBC", 0.8, 0.2, 5.5, 3.5, 5961.7},
}};

inline std::string format_comparison(const Comparison& c) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "metric" << std::right << std::setw(14) << "DeePC"
     << std::setw(14) << "RBC" << std::setw(10) << "ratio" << '\n';
  for (const auto& r : c.rows) {
    os << std::left << std::setw(24) << r.metric << std::right << std::fixed << std::setprecision(4)
       << std::setw(14) << r.deepc << std::setw(14) << r.rbc << std::setw(10) << std::setprecision(3)
       << r.ratio << '\n';
  }
  os << "\nreference (full-scale)" << (c.full_scale ? "" : " - not directly comparable")
     << '\n';
  os << std::left << std::setw(8) << "" << std::right << std::setw(8) << "LBV" << std::setw(8)
     << "UBV" << std::setw(8) << "%LBV" << std::setw(8) << "%UBV" << std::setw(10) << "cost" << '\n';
  for (const auto& r : kReferenceRows) {
    os << std::left << std::setw(8) << r.controller << std::right << std::setprecision(1)
       << std::setw(8) << r.lbv << std::setw(8) << r.ubv << std::setw(8) << r.pct_lbv
       << std::setw(8) << r.pct_ubv << std::setw(10) << r.cost << '\n';
  }
  return os.str();
}

inline void write_comparison_csv(const std::string& path, const Comparison& c) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path);
  os << "metric,deepc,rbc,ratio\n";
  for (const auto& r : c.rows) {
    os << '"' << r.metric << '"' << ',' << format_double(r.deepc) << ',' << format_double(r.rbc)
       << ',' << format_double(r.ratio) << '\n';
  }
  os << "# reference," << (c.full_scale ? "full-scale" : "not directly comparable") << '\n';
  for (const auto& r : kReferenceRows) {
    os << "# " << r.controller << ',' << r.lbv << ',' << r.ubv << ',' << r.pct_lbv << ','
       << r.pct_ubv << ',' << r.cost << '\n';
  }
}

// --- episode and metrics files ------------------------------------------------------

inline std::vector<std::string> episode_columns() {
  const HubLayout L;
  std::vector<std::string> c{"hour", "day", "hour_of_day"};
  for (int i = 0; i < L.n_zones; ++i) c.push_back("u_s" + std::to_string(i + 1));
  for (int i = 0; i < L.n_blinds; ++i) c.push_back("blind" + std::to_string(i + 1));
  c.push_back("u_h");
  c.push_back("u_b");
  for (int i = 0; i < kZones; ++i) c.push_back("gain" + std::to_string(i + 1));
  c.push_back("ambient");
  c.push_back("ground");
  for (const char* f : {"solar_s", "solar_e", "solar_w", "solar_n"}) c.push_back(f);
  for (int i = 0; i < L.n_zones; ++i) c.push_back("y_s" + std::to_string(i + 1));
  c.push_back("y_h");
  c.push_back("y_b");
  for (const char* f : {"u_b_cmd", "soc", "capacity", "cycles", "capacity_loss", "price", "p",
                        "status", "iterations"}) {
    c.push_back(f);
  }
  return c;
}

inline void write_episode_csv(const std::string& path, const EpisodeLog& log) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path);
  os << "# controller=" << log.controller << " scenario=" << log.scenario << " seed=" << log.seed
     << " start_day=" << log.start_day << " horizon_days=" << log.horizon_days
     << " T_f=" << log.T_f << " initial_cycles=" << format_double(log.initial_cycles)
     << " initial_capacity_loss=" << format_double(log.initial_capacity_loss) << '\n';
  const auto cols = episode_columns();
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& s : log.steps) {
    os << s.hour << ',' << day_of_hour(s.hour) << ',' << hour_of_day(s.hour);
    for (Eigen::Index i = 0; i < s.u.size(); ++i) os << ',' << format_double(s.u(i));
    for (Eigen::Index i = 0; i < s.y.size(); ++i) os << ',' << format_double(s.y(i));
    os << ',' << format_double(s.u_b_cmd) << ',' << format_double(s.soc) << ','
       << format_double(s.capacity) << ',' << format_double(s.cycles) << ','
       << format_double(s.capacity_loss) << ',' << format_double(s.price) << ','
       << format_double(s.p) << ',' << s.status << ',' << s.iterations << '\n';
  }
}

inline void write_runtime_file(const std::string& path, const EpisodeLog& log) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path);
  os << "controller,hours,runtime_s\n"
     << log.controller << ',' << log.length() << ',' << format_double(log.runtime_s) << '\n';
}

inline void write_plans_csv(const std::string& path, const EpisodeLog& log) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path);
  const HubLayout L;
  os << "hour,k";
  for (int i = 0; i < L.n_zones; ++i) os << ",y_s" << i + 1;
  os << ",y_h,y_b";
  for (int i = 0; i < L.n_zones; ++i) os << ",sim_y_s" << i + 1;
  os << ",sim_y_h,sim_y_b\n";
  for (size_t t = 0; t < log.predictions.size(); ++t) {
    const Eigen::MatrixXd& P = log.predictions[t];
    const Eigen::MatrixXd& S = log.simulated[t];
    for (Eigen::Index k = 0; k < P.cols(); ++k) {
      os << log.steps[t].hour << ',' << k;
      for (Eigen::Index i = 0; i < P.rows(); ++i) os << ',' << format_double(P(i, k));
      for (Eigen::Index i = 0; i < S.rows(); ++i) os << ',' << format_double(S(i, k));
      os << '\n';
    }
  }
}

inline EpisodeLog read_episode_csv(const std::string& path, const std::string& plans_path = "") {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path);
  const HubLayout L;
  EpisodeLog log;
  std::string line;
  std::getline(in, line);
  require(line.rfind("# ", 0) == 0, ErrorKind::Io, "episode file lacks its header comment");
  {
    std::istringstream hs(line.substr(2));
    std::string kv;
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      if (k == "controller") log.controller = v;
      else if (k == "scenario") log.scenario = v;
      else if (k == "seed") log.seed = std::stoull(v);
      else if (k == "start_day") log.start_day = std::stoi(v);
      else if (k == "horizon_days") log.horizon_days = std::stoi(v);
      else if (k == "T_f") log.T_f = std::stoi(v);
      else if (k == "initial_cycles") log.initial_cycles = std::stod(v);
      else if (k == "initial_capacity_loss") log.initial_capacity_loss = std::stod(v);
    }
  }
  std::getline(in, line);
  const auto cols = split_csv_line(line);
  require(cols == episode_columns(), ErrorKind::Io, "unexpected episode columns");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    require(f.size() == cols.size(), ErrorKind::Io, "ragged episode row");
    StepRecord s;
    size_t c = 0;
    s.hour = std::stol(f[c]);
    c += 3;
    s.u.resize(L.m());
    for (int i = 0; i < L.m(); ++i) s.u(i) = std::stod(f[c++]);
    s.y.resize(L.p());
    for (int i = 0; i < L.p(); ++i) s.y(i) = std::stod(f[c++]);
    s.u_b_cmd = std::stod(f[c++]);
    s.soc = std::stod(f[c++]);
    s.capacity = std::stod(f[c++]);
    s.cycles = std::stod(f[c++]);
    s.capacity_loss = std::stod(f[c++]);
    s.price = std::stod(f[c++]);
    s.p = std::stod(f[c++]);
    s.status = f[c++];
    s.iterations = std::stoi(f[c++]);
    log.steps.push_back(std::move(s));
  }
  if (!plans_path.empty()) {
    std::ifstream pin(plans_path);
    require(static_cast<bool>(pin), ErrorKind::Io, "cannot open " + plans_path);
    std::getline(pin, line);
    std::map<long, size_t> index;
    for (size_t t = 0; t < log.steps.size(); ++t) index[log.steps[t].hour] = t;
    log.predictions.assign(log.steps.size(), Eigen::MatrixXd());
    log.simulated.assign(log.steps.size(), Eigen::MatrixXd());
    while (std::getline(pin, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      require(f.size() == static_cast<size_t>(2 + 2 * L.p()), ErrorKind::Io, "ragged plan row");
      const long hour = std::stol(f[0]);
      const int k = std::stoi(f[1]);
      auto it = index.find(hour);
      require(it != index.end() && k >= 0 && k < log.T_f, ErrorKind::Io, "plan row out of range");
      Eigen::MatrixXd& P = log.predictions[it->second];
      if (P.size() == 0) P = Eigen::MatrixXd::Zero(L.p(), log.T_f);
      Eigen::MatrixXd& S = log.simulated[it->second];
      if (S.size() == 0) S = Eigen::MatrixXd::Zero(L.p(), log.T_f);
      for (int i = 0; i < L.p(); ++i) {
        P(i, k) = std::stod(f[2 + i]);
        S(i, k) = std::stod(f[2 + L.p() + i]);
      }
    }
  }
  return log;
}

inline void write_metrics_csv(const std::string& path, const MetricsReport& r) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path);
  os << "key,value\n";
  os << "controller," << r.controller << '\n'
     << "scenario," << r.scenario << '\n'
     << "seed," << r.seed << '\n'
     << "start_day," << r.start_day << '\n'
     << "horizon_days," << r.horizon_days << '\n'
     << "lbv_per_room_hour," << format_double(r.lbv_per_room_hour) << '\n'
     << "ubv_per_room_hour," << format_double(r.ubv_per_room_hour) << '\n'
     << "pct_lbv," << format_double(r.pct_lbv) << '\n'
     << "pct_ubv," << format_double(r.pct_ubv) << '\n'
     << "cost," << format_double(r.cost) << '\n'
     << "cycles," << format_double(r.cycles) << '\n'
     << "capacity_loss," << format_double(r.capacity_loss) << '\n'
     << "energy_import," << format_double(r.energy_import) << '\n'
     << "hold_steps," << r.hold_steps << '\n';
  if (r.eps) {
    for (Eigen::Index k = 0; k < r.eps->voltage.size(); ++k) {
      for (Eigen::Index z = 0; z < r.eps->zones.rows(); ++z) {
        os << "eps_zone" << z + 1 << "_k" << k << ',' << format_double(r.eps->zones(z, k)) << '\n';
      }
      os << "eps_voltage_k" << k << ',' << format_double(r.eps->voltage(k)) << '\n';
      os << "eps_count_k" << k << ',' << r.eps->counts(k) << '\n';
    }
  }
}

inline MetricsReport read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = split_csv_line(line);
    if (f.size() == 2) kv[f[0]] = f[1];
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    require(it != kv.end(), ErrorKind::Io, "metrics file lacks " + k);
    return it->second;
  };
  MetricsReport r;
  r.controller = get("controller");
  r.scenario = get("scenario");
  r.seed = std::stoull(get("seed"));
  r.start_day = std::stoi(get("start_day"));
  r.horizon_days = std::stoi(get("horizon_days"));
  r.lbv_per_room_hour = std::stod(get("lbv_per_room_hour"));
  r.ubv_per_room_hour = std::stod(get("ubv_per_room_hour"));
  r.pct_lbv = std::stod(get("pct_lbv"));
  r.pct_ubv = std::stod(get("pct_ubv"));
  r.cost = std::stod(get("cost"));
  r.cycles = std::stod(get("cycles"));
  r.capacity_loss = std::stod(get("capacity_loss"));
  r.energy_import = std::stod(get("energy_import"));
  r.hold_steps = std::stoi(get("hold_steps"));
  int T_f = 0, zones = 0;
  while (kv.count("eps_voltage_k" + std::to_string(T_f))) ++T_f;
  while (kv.count("eps_zone" + std::to_string(zones + 1) + "_k0")) ++zones;
  if (T_f > 0) {
    PredictionError e;
    e.zones.resize(zones, T_f);
    e.voltage.resize(T_f);
    e.counts.resize(T_f);
    for (int k = 0; k < T_f; ++k) {
      const std::string ks = "_k" + std::to_string(k);
      for (int z = 0; z < zones; ++z) e.zones(z, k) = std::stod(get("eps_zone" + std::to_string(z + 1) + ks));
      e.voltage(k) = std::stod(get("eps_voltage" + ks));
      e.counts(k) = std::stoi(get("eps_count" + ks));
    }
    r.eps = std::move(e);
  }
  return r;
}

}  // namespace hubdeepc
