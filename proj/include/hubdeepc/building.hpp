#pragma once

// Bilinear multi-zone RC building:
//   dx/dt = A_c x + B_u u + B_v v + sum_i u_i B_vu[i] v,   y = C_c x
// States in degC, time in hours. Heat flows are in W and capacities in Wh/K.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hubdeepc/error.hpp"
#include "hubdeepc/profiles.hpp"

namespace hubdeepc {

inline constexpr int kBlinds = 4;
inline constexpr int kBuildingInputs = kZones + kBlinds;
inline constexpr int kNodesPerZone = 5;  // air, internal mass, inner wall, outer wall, floor

struct BuildingModel {
  Eigen::MatrixXd A_c;
  Eigen::MatrixXd B_u;
  Eigen::MatrixXd B_v;
  std::vector<Eigen::MatrixXd> B_vu;  // one per input, n_b x n_v
  Eigen::MatrixXd C_c;
  double state_min = -20.0;
  double state_max = 60.0;

  int n_b() const { return static_cast<int>(A_c.rows()); }
  int n_u() const { return static_cast<int>(B_u.cols()); }
  int n_v() const { return static_cast<int>(B_v.cols()); }
  int n_y() const { return static_cast<int>(C_c.rows()); }

  void validate() const {
    const Eigen::Index n = A_c.rows();
    require(A_c.cols() == n && B_u.rows() == n && B_v.rows() == n && C_c.cols() == n,
            ErrorKind::DimensionMismatch, "building matrices inconsistent");
    require(static_cast<Eigen::Index>(B_vu.size()) == B_u.cols(), ErrorKind::DimensionMismatch,
            "need one bilinear matrix per input");
    for (const auto& M : B_vu) {
      require(M.rows() == n && M.cols() == B_v.cols(), ErrorKind::DimensionMismatch,
              "bilinear matrix has wrong shape");
    }
  }

  bool hurwitz() const {
    return Eigen::EigenSolver<Eigen::MatrixXd>(A_c, false).eigenvalues().real().maxCoeff() < 0.0;
  }
};

struct BuildingState {
  Eigen::VectorXd x_s;
};

/// Per-square-metre thermal parameters of the synthetic building.
struct BuildingParams {
  std::array<double, kZones> alpha{11.9, 11.9, 11.9, 27.77, 7.58};  // area = 1000 / alpha
  double c_zone = 8.0;       // Wh/m2K
  double c_mass = 40.0;
  double c_wall_in = 30.0;
  double c_wall_out = 30.0;
  double c_floor = 50.0;
  double h_zone_mass = 2.0;  // W/m2K
  double h_zone_wall = 1.5;
  double h_wall = 0.25;
  double h_wall_amb = 0.6;
  double h_infiltration = 0.02;
  double h_zone_floor = 1.0;
  double h_floor_ground = 0.05;
  double h_adjacent = 0.5;   // times the smaller of the two floor areas
  double k_solar = 6e-4;     // kW per W/m2 through a fully open window
  std::array<int, kBlinds> blind_zone{0, 1, 2, 3};
  std::array<int, kBlinds> blind_facade{0, 1, 2, 3};
  double initial_temperature = 21.0;

  double area(int zone) const { return 1000.0 / alpha[zone]; }
};

inline int air_node(int zone) { return kNodesPerZone * zone; }

/// Five zones in a row sharing walls; radiator i delivers u_i / alpha_i kW.
inline BuildingModel make_building(const BuildingParams& p = {}) {
  const int n = kZones * kNodesPerZone;
  const int amb = kZones, gnd = kZones + 1, sol = kZones + 2;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);  // W/K between nodes
  Eigen::VectorXd C(n), G_amb = Eigen::VectorXd::Zero(n), G_gnd = Eigen::VectorXd::Zero(n);
  auto link = [&](int i, int j, double g) {
    G(i, j) += g;
    G(j, i) += g;
  };
  for (int z = 0; z < kZones; ++z) {
    const double a = p.area(z);
    const int air = air_node(z), mass = air + 1, wi = air + 2, wo = air + 3, fl = air + 4;
    C(air) = p.c_zone * a;
    C(mass) = p.c_mass * a;
    C(wi) = p.c_wall_in * a;
    C(wo) = p.c_wall_out * a;
    C(fl) = p.c_floor * a;
    link(air, mass, p.h_zone_mass * a);
    link(air, wi, p.h_zone_wall * a);
    link(wi, wo, p.h_wall * a);
    link(air, fl, p.h_zone_floor * a);
    G_amb(wo) = p.h_wall_amb * a;
    G_amb(air) = p.h_infiltration * a;
    G_gnd(fl) = p.h_floor_ground * a;
    if (z + 1 < kZones) link(air, air_node(z + 1), p.h_adjacent * std::min(a, p.area(z + 1)));
  }
  BuildingModel m;
  m.A_c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) m.A_c(i, j) = G(i, j) / C(i);
    }
    m.A_c(i, i) = -(G.row(i).sum() + G_amb(i) + G_gnd(i)) / C(i);
  }
  m.B_u = Eigen::MatrixXd::Zero(n, kBuildingInputs);
  m.B_v = Eigen::MatrixXd::Zero(n, kDisturbances);
  for (int z = 0; z < kZones; ++z) {
    const int air = air_node(z);
    m.B_u(air, z) = 1000.0 / p.alpha[z] / C(air);
    m.B_v(air, z) = p.area(z) / C(air);
  }
  for (int i = 0; i < n; ++i) {
    m.B_v(i, amb) = G_amb(i) / C(i);
    m.B_v(i, gnd) = G_gnd(i) / C(i);
  }
  m.B_vu.assign(kBuildingInputs, Eigen::MatrixXd::Zero(n, kDisturbances));
  for (int b = 0; b < kBlinds; ++b) {
    const int air = air_node(p.blind_zone[b]);
    m.B_vu[kZones + b](air, sol + p.blind_facade[b]) = 1000.0 * p.k_solar / C(air);
  }
  m.C_c = Eigen::MatrixXd::Zero(kZones, n);
  for (int z = 0; z < kZones; ++z) m.C_c(z, air_node(z)) = 1.0;
  return m;
}

inline BuildingState uniform_state(const BuildingModel& m, double temperature) {
  return {Eigen::VectorXd::Constant(m.n_b(), temperature)};
}

/// Zero-order-hold step of length dt (h) with fixed-step RK4.
inline std::pair<BuildingState, Eigen::VectorXd> building_step(
    const BuildingModel& model, const BuildingState& x, const Eigen::Ref<const Eigen::VectorXd>& u,
    const Eigen::Ref<const Eigen::VectorXd>& v, double dt, int substeps = 10) {
  require(dt > 0 && substeps >= 1, ErrorKind::InvalidConfig, "dt and substeps must be positive");
  require(u.size() == model.n_u() && v.size() == model.n_v() && x.x_s.size() == model.n_b(),
          ErrorKind::DimensionMismatch, "building_step: input sizes");
  Eigen::VectorXd w = model.B_u * u + model.B_v * v;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) != 0.0) w.noalias() += u(i) * (model.B_vu[i] * v);
  }
  const double h = dt / substeps;
  Eigen::VectorXd s = x.x_s;
  for (int k = 0; k < substeps; ++k) {
    const Eigen::VectorXd k1 = model.A_c * s + w;
    const Eigen::VectorXd k2 = model.A_c * (s + 0.5 * h * k1) + w;
    const Eigen::VectorXd k3 = model.A_c * (s + 0.5 * h * k2) + w;
    const Eigen::VectorXd k4 = model.A_c * (s + h * k3) + w;
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    require(std::isfinite(s(i)) && s(i) >= model.state_min && s(i) <= model.state_max,
            ErrorKind::StateBlowUp, "building state left the sane range");
  }
  BuildingState next{s};
  return {next, model.C_c * s};
}

}  // namespace hubdeepc
