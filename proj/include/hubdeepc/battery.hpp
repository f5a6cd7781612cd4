#pragma once

// Battery pack: Shepherd open-circuit voltage, ohmic terminal drop and
// throughput-based capacity fade.

#include <algorithm>
#include <cmath>

#include "hubdeepc/error.hpp"

namespace hubdeepc {

struct BatteryParams {
  double E0 = 31.85;            // V
  double K = 0.05;              // V
  double A_exp = 37.4;          // V
  double B_exp = 0.01;          // 1/Ah
  double Q = 40.0;              // Ah
  double soc_floor = 0.02;      // guard in the 1/soc term
  double nominal_capacity = 40.0;
  double R0_nom = 0.05;         // ohm
  double k_r = 0.5;
  double k_fade = 0.0;          // capacity loss per equivalent full cycle
  double current_limit = 40.0;  // A
  double initial_soc = 0.5;

  double v_oc(double soc) const {
    const double s = std::max(soc, soc_floor);
    return E0 - K / s + A_exp * std::exp(-B_exp * (1.0 - soc) * Q);
  }
};

struct BatteryState {
  double soc = 0.5;
  double capacity = 40.0;   // Ah
  double R0 = 0.05;         // ohm
  double v_oc = 0.0;        // V
  double throughput = 0.0;  // Ah
  double cycles = 0.0;
  double capacity_loss = 0.0;  // fraction
};

inline BatteryState fresh_battery(const BatteryParams& p, double soc) {
  BatteryState s;
  s.soc = soc;
  s.capacity = p.nominal_capacity;
  s.R0 = p.R0_nom;
  s.v_oc = p.v_oc(soc);
  return s;
}

inline BatteryState update_ageing(BatteryState s, const BatteryParams& p) {
  s.cycles = s.throughput / (2.0 * p.nominal_capacity);
  s.capacity_loss = p.k_fade * s.cycles;
  s.capacity = p.nominal_capacity * (1.0 - s.capacity_loss);
  s.R0 = p.R0_nom * (1.0 + p.k_r * s.capacity_loss);
  return s;
}

struct BatteryStepResult {
  BatteryState state;
  double y_b = 0.0;      // terminal voltage during the step, V
  bool clamped = false;  // soc hit 0 or 1
};

/// Positive current discharges. With ageing disabled the throughput is still
/// counted but capacity and resistance stay at their current values.
inline BatteryStepResult battery_step(const BatteryState& s, double i, double dt,
                                      const BatteryParams& p, bool ageing = true) {
  require(std::abs(i) <= p.current_limit, ErrorKind::CurrentLimit,
          "battery current exceeds the hard limit");
  BatteryStepResult r;
  r.y_b = s.v_oc - s.R0 * i;
  BatteryState n = s;
  const double soc = s.soc - i * dt / s.capacity;
  n.soc = std::clamp(soc, 0.0, 1.0);
  r.clamped = n.soc != soc;
  n.v_oc = p.v_oc(n.soc);
  n.throughput += std::abs(i) * dt;
  if (ageing) {
    n = update_ageing(n, p);
  } else {
    n.cycles = n.throughput / (2.0 * p.nominal_capacity);
  }
  r.state = n;
  return r;
}

/// Largest |i| in the requested direction that keeps soc within [lo, hi].
inline double limit_current(const BatteryState& s, double i, double dt, double soc_lo,
                            double soc_hi) {
  if (i > 0) return std::min(i, std::max(0.0, (s.soc - soc_lo) * s.capacity / dt));
  if (i < 0) return std::max(i, -std::max(0.0, (soc_hi - s.soc) * s.capacity / dt));
  return 0.0;
}

}  // namespace hubdeepc
