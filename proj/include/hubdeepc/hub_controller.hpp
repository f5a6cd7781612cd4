#pragma once

// DeePC for the energy hub: building zones, heat pump and battery.
//
// Channel order
//   inputs:  radiators, blinds, u_h, u_b, disturbances
//   outputs: zone temperatures, y_h (optional), y_b

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hubdeepc/deepc.hpp"
#include "hubdeepc/error.hpp"
#include "hubdeepc/profiles.hpp"
#include "hubdeepc/qp.hpp"
#include "hubdeepc/trajectory.hpp"

namespace hubdeepc {

struct HubLayout {
  int n_zones = 5;
  int n_blinds = 4;
  int n_dist = 11;
  bool has_heat_output = true;

  int m() const { return n_zones + n_blinds + 2 + n_dist; }
  int p() const { return n_zones + (has_heat_output ? 1 : 0) + 1; }
  int radiator(int i) const { return i; }
  int blind(int i) const { return n_zones + i; }
  int u_h() const { return n_zones + n_blinds; }
  int u_b() const { return n_zones + n_blinds + 1; }
  int dist(int i) const { return n_zones + n_blinds + 2 + i; }
  int zone(int i) const { return i; }
  int y_h() const { return has_heat_output ? n_zones : -1; }
  int y_b() const { return p() - 1; }
};

struct DeepcConfig {
  int T_ini = 30;
  int T_f = 24;
  double beta = 0.01;
  double lambda_g = 1000.0;
  double lambda_rho = 10.0;
  double C_h = 3.0;
  std::vector<double> alpha{11.9, 11.9, 11.9, 27.77, 7.58};
  double v_lin = 66.0;
  std::pair<double, double> u_b_bounds{-22.0, 22.0};
  std::pair<double, double> y_b_bounds{63.0, 68.0};
  std::pair<double, double> u_s_bounds{0.0, 5.0};
  std::pair<double, double> blind_bounds{0.0, 1.0};
  double solver_tol = 1e-6;
  int solver_max_iter = 50000;
  double equality_rank_tol = 1e-9;

  void validate(const HubLayout& layout) const {
    require(T_ini >= 1 && T_f >= 1, ErrorKind::InvalidConfig, "T_ini, T_f must be >= 1");
    require(beta > 0, ErrorKind::InvalidConfig, "beta must be positive");
    require(lambda_g >= 0 && lambda_rho >= 0, ErrorKind::InvalidConfig, "negative penalty");
    require(C_h > 0, ErrorKind::InvalidConfig, "C_h must be positive");
    require(static_cast<int>(alpha.size()) == layout.n_zones, ErrorKind::InvalidConfig,
            "one alpha per zone");
    for (double a : alpha) require(a > 0, ErrorKind::InvalidConfig, "alpha must be positive");
    for (const auto& b : {u_b_bounds, y_b_bounds, u_s_bounds, blind_bounds}) {
      require(b.first <= b.second, ErrorKind::InvalidConfig, "bounds must be ordered");
    }
  }

  QpSettings solver_settings() const {
    QpSettings s;
    s.tol = solver_tol;
    s.max_iter = solver_max_iter;
    return s;
  }
};

struct ComfortSchedule {
  std::pair<double, double> occupied_band{21.0, 25.0};
  std::pair<double, double> unoccupied_band{10.0, 40.0};
  int unoccupied_start = 23;  // [start, end) wrapping midnight
  int unoccupied_end = 5;

  void validate() const {
    require(occupied_band.first < occupied_band.second &&
                unoccupied_band.first < unoccupied_band.second,
            ErrorKind::InvalidConfig, "comfort bands must have min < max");
    require(unoccupied_band.first <= occupied_band.first &&
                unoccupied_band.second >= occupied_band.second,
            ErrorKind::InvalidConfig, "unoccupied band must contain the occupied band");
  }

  bool unoccupied(int hour) const {
    if (unoccupied_start <= unoccupied_end) return hour >= unoccupied_start && hour < unoccupied_end;
    return hour >= unoccupied_start || hour < unoccupied_end;
  }
};

inline std::pair<double, double> comfort_bounds_at(double hour_of_day, const ComfortSchedule& s) {
  require(hour_of_day >= 0.0 && hour_of_day < 24.0, ErrorKind::InvalidConfig,
          "hour of day must be in [0, 24)");
  return s.unoccupied(static_cast<int>(hour_of_day)) ? s.unoccupied_band : s.occupied_band;
}

struct ControlPlan {
  Eigen::MatrixXd u_s;     // zones x T_f, kW
  Eigen::MatrixXd blinds;  // blinds x T_f
  Eigen::VectorXd u_h;     // kW
  Eigen::VectorXd u_b;     // A
  Eigen::VectorXd p;       // kW
  Eigen::MatrixXd y_pred;  // outputs x T_f
  Eigen::MatrixXd rho;     // zones x T_f
  Eigen::VectorXd g;
  double objective = 0.0;
  QpStatus status = QpStatus::Optimal;
  double kkt_residual = 0.0;
  double equality_residual = 0.0;
  int iterations = 0;
  DeepcWarmStart next_warm;
};

/// Raised when the QP of a step is not solved; carries the full-form problem.
class DeepcSolveError : public Error {
 public:
  DeepcSolveError(QpStatus status, QuadraticProgram qp, const std::string& what)
      : Error(ErrorKind::SolverFailure, what), status_(status), qp_(std::move(qp)) {}
  QpStatus status() const { return status_; }
  const QuadraticProgram& qp() const { return qp_; }

 private:
  QpStatus status_;
  QuadraticProgram qp_;
};

inline StageForm hub_form(const HubLayout& L) {
  StageForm f;
  f.cu = Eigen::VectorXd::Zero(L.m());
  f.cy = Eigen::VectorXd::Zero(L.p());
  return f;
}

/// Constraint and cost structure of the hub problem. Bound order: radiators,
/// blinds, u_b, y_b, y_h >= 0, comfort per zone (soft). One cost: grid import.
inline DeepcStructure hub_structure(const HubLayout& L, const DeepcConfig& cfg) {
  cfg.validate(L);
  DeepcStructure s;
  s.m = L.m();
  s.p = L.p();
  s.T_ini = cfg.T_ini;
  s.T_f = cfg.T_f;
  s.lambda_g = cfg.lambda_g;
  s.lambda_rho = cfg.lambda_rho;
  s.equality_rank_tol = cfg.equality_rank_tol;
  for (int i = 0; i < L.n_dist; ++i) s.pinned_inputs.push_back(L.dist(i));
  StageForm demand = hub_form(L);  // sum_i u_s,i / alpha_i
  for (int i = 0; i < L.n_zones; ++i) demand.cu(L.radiator(i)) = 1.0 / cfg.alpha[i];
  if (L.has_heat_output) {
    StageForm cop = hub_form(L);
    cop.cy(L.y_h()) = 1.0;
    cop.cu(L.u_h()) = -cfg.C_h;
    cop.name = "y_h = C_h u_h";
    StageForm heat = demand;
    heat.cu *= -1.0;
    heat.cy(L.y_h()) = 1.0;
    heat.name = "y_h = sum u_s/alpha";
    s.equalities = {cop, heat};
  } else {
    StageForm heat = demand;
    heat.cu *= -1.0;
    heat.cu(L.u_h()) = cfg.C_h;
    heat.name = "C_h u_h = sum u_s/alpha";
    s.equalities = {heat};
  }
  auto unit = [&](bool input, int idx, const std::string& name) {
    StageForm f = hub_form(L);
    (input ? f.cu : f.cy)(idx) = 1.0;
    f.name = name;
    return f;
  };
  for (int i = 0; i < L.n_zones; ++i) s.bounds.push_back({unit(true, L.radiator(i), "u_s"), false});
  for (int i = 0; i < L.n_blinds; ++i) s.bounds.push_back({unit(true, L.blind(i), "blind"), false});
  s.bounds.push_back({unit(true, L.u_b(), "u_b"), false});
  s.bounds.push_back({unit(false, L.y_b(), "y_b"), false});
  if (L.has_heat_output) s.bounds.push_back({unit(false, L.y_h(), "y_h"), false});
  for (int i = 0; i < L.n_zones; ++i) s.bounds.push_back({unit(false, L.zone(i), "comfort"), true});
  StageForm grid = hub_form(L);
  grid.cu(L.u_h()) = 1.0;
  grid.cu(L.u_b()) = -cfg.v_lin / 1000.0;
  grid.name = "p";
  s.costs.push_back({grid, cfg.beta * cfg.beta});
  return s;
}

/// Per-step bounds, pinned disturbances and cost targets.
inline DeepcStepData hub_step_data(const HubLayout& L, const DeepcConfig& cfg,
                                   const ComfortSchedule& sched, const Eigen::MatrixXd& u_ini,
                                   const Eigen::MatrixXd& y_ini, const Eigen::MatrixXd& v_forecast,
                                   const Eigen::VectorXd& prices, long start_hour) {
  const int T_f = cfg.T_f;
  require(v_forecast.rows() == L.n_dist && v_forecast.cols() >= T_f, ErrorKind::DimensionMismatch,
          "disturbance forecast must be n_dist x T_f");
  require(prices.size() >= T_f, ErrorKind::DimensionMismatch, "need T_f prices");
  DeepcStepData d;
  d.u_ini = u_ini;
  d.y_ini = y_ini;
  d.pinned = v_forecast.leftCols(T_f);
  const int nb = L.n_zones + L.n_blinds + 2 + (L.has_heat_output ? 1 : 0) + L.n_zones;
  d.lo.resize(nb, T_f);
  d.hi.resize(nb, T_f);
  for (int k = 0; k < T_f; ++k) {
    int j = 0;
    for (int i = 0; i < L.n_zones; ++i, ++j) {
      d.lo(j, k) = cfg.u_s_bounds.first;
      d.hi(j, k) = cfg.u_s_bounds.second;
    }
    for (int i = 0; i < L.n_blinds; ++i, ++j) {
      d.lo(j, k) = cfg.blind_bounds.first;
      d.hi(j, k) = cfg.blind_bounds.second;
    }
    d.lo(j, k) = cfg.u_b_bounds.first;
    d.hi(j, k) = cfg.u_b_bounds.second;
    ++j;
    d.lo(j, k) = cfg.y_b_bounds.first;
    d.hi(j, k) = cfg.y_b_bounds.second;
    ++j;
    if (L.has_heat_output) {
      d.lo(j, k) = 0.0;
      d.hi(j, k) = kInf;
      ++j;
    }
    const auto band = comfort_bounds_at(hour_of_day(start_hour + k), sched);
    for (int i = 0; i < L.n_zones; ++i, ++j) {
      d.lo(j, k) = band.first;
      d.hi(j, k) = band.second;
    }
  }
  d.targets.resize(1, T_f);
  for (int k = 0; k < T_f; ++k) d.targets(0, k) = -prices(k) / (2.0 * cfg.beta * cfg.beta);
  return d;
}

/// Full-form problem with decision vector (g, u_e, y_e, rho, p).
inline QuadraticProgram assemble_deepc_qp(const HankelBlocks& blocks, const HubLayout& L,
                                          const Eigen::MatrixXd& u_ini, const Eigen::MatrixXd& y_ini,
                                          const Eigen::MatrixXd& v_forecast,
                                          const Eigen::VectorXd& prices, long start_hour,
                                          const DeepcConfig& cfg, const ComfortSchedule& sched) {
  cfg.validate(L);
  sched.validate();
  const int m = L.m(), p = L.p(), T_ini = cfg.T_ini, T_f = cfg.T_f, nz = L.n_zones;
  require(blocks.T_ini == T_ini && blocks.T_f == T_f && blocks.input_dim() == m &&
              blocks.output_dim() == p,
          ErrorKind::DimensionMismatch, "Hankel blocks do not match the configuration");
  require(u_ini.rows() == m && u_ini.cols() == T_ini && y_ini.rows() == p && y_ini.cols() == T_ini,
          ErrorKind::DimensionMismatch, "u_ini/y_ini must cover T_ini samples");
  require(v_forecast.rows() == L.n_dist && v_forecast.cols() >= T_f && prices.size() >= T_f,
          ErrorKind::DimensionMismatch, "forecast windows must cover T_f");
  const int Ng = blocks.columns();
  const int iu = Ng, iy = iu + m * T_f, ir = iy + p * T_f, ip = ir + nz * T_f;
  const int nx = ip + T_f;
  QuadraticProgram qp(nx);
  qp.var_names.resize(nx);
  for (int j = 0; j < Ng; ++j) qp.var_names[j] = "g" + std::to_string(j);
  for (int k = 0; k < T_f; ++k) {
    for (int i = 0; i < m; ++i) qp.var_names[iu + k * m + i] = "u" + std::to_string(i) + "_" + std::to_string(k);
    for (int i = 0; i < p; ++i) qp.var_names[iy + k * p + i] = "y" + std::to_string(i) + "_" + std::to_string(k);
    for (int i = 0; i < nz; ++i) qp.var_names[ir + i * T_f + k] = "rho" + std::to_string(i) + "_" + std::to_string(k);
    qp.var_names[ip + k] = "p_" + std::to_string(k);
  }
  const double b2 = cfg.beta * cfg.beta;
  qp.H.topLeftCorner(Ng, Ng).diagonal().setConstant(2.0 * cfg.lambda_g);
  for (int i = 0; i < nz * T_f; ++i) qp.H(ir + i, ir + i) = 2.0 * cfg.lambda_rho;
  for (int k = 0; k < T_f; ++k) {
    // (beta p + c / (2 beta))^2 = beta^2 p^2 + c p + c^2 / (4 beta^2)
    qp.H(ip + k, ip + k) = 2.0 * b2;
    qp.f(ip + k) = prices(k);
    qp.constant += prices(k) * prices(k) / (4.0 * b2);
  }

  std::vector<std::pair<Eigen::RowVectorXd, double>> eq, in;
  auto row = [&]() { return Eigen::RowVectorXd::Zero(nx).eval(); };
  for (int i = 0; i < m * T_ini; ++i) {
    auto r = row();
    r.head(Ng) = blocks.U_p.row(i);
    eq.emplace_back(r, u_ini(i % m, i / m));
  }
  for (int i = 0; i < p * T_ini; ++i) {
    auto r = row();
    r.head(Ng) = blocks.Y_p.row(i);
    eq.emplace_back(r, y_ini(i % p, i / p));
  }
  for (int i = 0; i < m * T_f; ++i) {
    auto r = row();
    r.head(Ng) = blocks.U_f.row(i);
    r(iu + i) = -1.0;
    eq.emplace_back(r, 0.0);
  }
  for (int i = 0; i < p * T_f; ++i) {
    auto r = row();
    r.head(Ng) = blocks.Y_f.row(i);
    r(iy + i) = -1.0;
    eq.emplace_back(r, 0.0);
  }
  auto U = [&](int k, int ch) { return iu + k * m + ch; };
  auto Y = [&](int k, int ch) { return iy + k * p + ch; };
  auto bound = [&](int var, double lo, double hi) {
    if (std::isfinite(hi)) {
      auto r = row();
      r(var) = 1.0;
      in.emplace_back(r, hi);
    }
    if (std::isfinite(lo)) {
      auto r = row();
      r(var) = -1.0;
      in.emplace_back(r, -lo);
    }
  };
  for (int k = 0; k < T_f; ++k) {
    for (int i = 0; i < L.n_dist; ++i) {
      auto r = row();
      r(U(k, L.dist(i))) = 1.0;
      eq.emplace_back(r, v_forecast(i, k));
    }
    if (L.has_heat_output) {
      auto r = row();
      r(Y(k, L.y_h())) = 1.0;
      r(U(k, L.u_h())) = -cfg.C_h;
      eq.emplace_back(r, 0.0);
      auto s = row();
      s(Y(k, L.y_h())) = 1.0;
      for (int i = 0; i < nz; ++i) s(U(k, L.radiator(i))) = -1.0 / cfg.alpha[i];
      eq.emplace_back(s, 0.0);
      bound(Y(k, L.y_h()), 0.0, kInf);
    } else {
      auto r = row();
      r(U(k, L.u_h())) = cfg.C_h;
      for (int i = 0; i < nz; ++i) r(U(k, L.radiator(i))) = -1.0 / cfg.alpha[i];
      eq.emplace_back(r, 0.0);
    }
    {
      auto r = row();  // u_h = p + (v_lin / 1000) u_b
      r(U(k, L.u_h())) = 1.0;
      r(ip + k) = -1.0;
      r(U(k, L.u_b())) = -cfg.v_lin / 1000.0;
      eq.emplace_back(r, 0.0);
    }
    for (int i = 0; i < nz; ++i) bound(U(k, L.radiator(i)), cfg.u_s_bounds.first, cfg.u_s_bounds.second);
    for (int i = 0; i < L.n_blinds; ++i) bound(U(k, L.blind(i)), cfg.blind_bounds.first, cfg.blind_bounds.second);
    bound(U(k, L.u_b()), cfg.u_b_bounds.first, cfg.u_b_bounds.second);
    bound(Y(k, L.y_b()), cfg.y_b_bounds.first, cfg.y_b_bounds.second);
    const auto band = comfort_bounds_at(hour_of_day(start_hour + k), sched);
    for (int i = 0; i < nz; ++i) {
      auto up = row();
      up(Y(k, L.zone(i))) = 1.0;
      up(ir + i * T_f + k) = -1.0;
      in.emplace_back(up, band.second);
      auto lo = row();
      lo(Y(k, L.zone(i))) = -1.0;
      lo(ir + i * T_f + k) = -1.0;
      in.emplace_back(lo, -band.first);
    }
  }
  for (int i = 0; i < nz * T_f; ++i) {
    auto r = row();
    r(ir + i) = -1.0;
    in.emplace_back(r, 0.0);
  }
  qp.A_eq.resize(static_cast<Eigen::Index>(eq.size()), nx);
  qp.b_eq.resize(static_cast<Eigen::Index>(eq.size()));
  for (size_t i = 0; i < eq.size(); ++i) {
    qp.A_eq.row(i) = eq[i].first;
    qp.b_eq(i) = eq[i].second;
  }
  qp.A_in.resize(static_cast<Eigen::Index>(in.size()), nx);
  qp.b_in.resize(static_cast<Eigen::Index>(in.size()));
  for (size_t i = 0; i < in.size(); ++i) {
    qp.A_in.row(i) = in[i].first;
    qp.b_in(i) = in[i].second;
  }
  return qp;
}

/// Immutable hub controller: configuration plus the condensed predictor.
class HubDeepcController {
 public:
  HubDeepcController(const HankelBlocks& blocks, HubLayout layout, DeepcConfig cfg,
                     ComfortSchedule schedule)
      : layout_(layout), cfg_(std::move(cfg)), schedule_(schedule), blocks_(blocks),
        core_(std::make_shared<DeepcController>(blocks, hub_structure(layout_, cfg_),
                                                cfg_.solver_settings())) {
    schedule_.validate();
  }

  const HubLayout& layout() const { return layout_; }
  const DeepcConfig& config() const { return cfg_; }
  const ComfortSchedule& schedule() const { return schedule_; }
  const DeepcController& core() const { return *core_; }
  const HankelBlocks& blocks() const { return blocks_; }

  /// Plans from the last T_ini samples of history. v_forecast and prices
  /// cover the T_f hours starting at start_hour.
  ControlPlan step(const Trajectory& history, const Eigen::MatrixXd& v_forecast,
                   const Eigen::VectorXd& prices, long start_hour,
                   const DeepcWarmStart* warm = nullptr) const {
    const int T_ini = cfg_.T_ini;
    require(history.length() >= T_ini, ErrorKind::DimensionMismatch,
            "history shorter than T_ini");
    require(history.input_dim() == layout_.m() && history.output_dim() == layout_.p(),
            ErrorKind::DimensionMismatch, "history channels do not match the layout");
    const Eigen::MatrixXd u_ini = history.inputs.rightCols(T_ini);
    const Eigen::MatrixXd y_ini = history.outputs.rightCols(T_ini);
    const DeepcStepData d =
        hub_step_data(layout_, cfg_, schedule_, u_ini, y_ini, v_forecast, prices, start_hour);
    const DeepcSolution sol = core_->solve(d, warm);
    if (sol.qp.status != QpStatus::Optimal) {
      throw DeepcSolveError(sol.qp.status,
                            assemble_deepc_qp(blocks_, layout_, u_ini, y_ini, v_forecast, prices,
                                              start_hour, cfg_, schedule_),
                            std::string("DeePC QP not solved: ") + to_string(sol.qp.status));
    }
    ControlPlan plan;
    plan.u_s = sol.u.topRows(layout_.n_zones);
    plan.blinds = sol.u.middleRows(layout_.n_zones, layout_.n_blinds);
    plan.u_h = sol.u.row(layout_.u_h()).transpose();
    plan.u_b = sol.u.row(layout_.u_b()).transpose();
    plan.p = plan.u_h - (cfg_.v_lin / 1000.0) * plan.u_b;
    plan.y_pred = sol.y;
    plan.rho = sol.rho;
    plan.g = sol.g;
    plan.objective = sol.objective;
    plan.status = sol.qp.status;
    plan.kkt_residual = sol.qp.kkt_residual;
    plan.equality_residual = sol.equality_residual;
    plan.iterations = sol.qp.iterations;
    plan.next_warm = core_->shifted(sol);
    return plan;
  }

 private:
  HubLayout layout_;
  DeepcConfig cfg_;
  ComfortSchedule schedule_;
  HankelBlocks blocks_;
  std::shared_ptr<const DeepcController> core_;
};

/// One-shot convenience: builds the controller and plans a single step.
inline ControlPlan deepc_step(const Trajectory& history, const HankelBlocks& blocks,
                              const HubLayout& layout, const Eigen::MatrixXd& v_forecast,
                              const Eigen::VectorXd& prices, long start_hour,
                              const DeepcConfig& cfg, const ComfortSchedule& schedule,
                              const DeepcWarmStart* warm = nullptr) {
  const HubDeepcController ctl(blocks, layout, cfg, schedule);
  return ctl.step(history, v_forecast, prices, start_hour, warm);
}

}  // namespace hubdeepc
