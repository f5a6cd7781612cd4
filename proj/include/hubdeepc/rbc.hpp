#pragma once

// Rule-based controllers for data collection (with PRBS dither) and for the
// comparison baseline.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hubdeepc/error.hpp"
#include "hubdeepc/random.hpp"

namespace hubdeepc {

/// Fibonacci LFSR on a maximal-length tap set, output +-amplitude.
class PrbsGenerator {
 public:
  PrbsGenerator(int order, std::uint32_t seed, double amplitude, int hold = 1)
      : order_(order), amplitude_(amplitude), hold_(hold) {
    require(order >= 2 && order <= 32, ErrorKind::InvalidConfig, "PRBS order must be in [2, 32]");
    require(hold >= 1, ErrorKind::InvalidConfig, "PRBS hold must be >= 1");
    mask_ = order == 32 ? 0xffffffffULL : ((1ULL << order) - 1ULL);
    reg_ = static_cast<std::uint64_t>(seed) & mask_;
    require(reg_ != 0, ErrorKind::ZeroRegister, "PRBS register must be nonzero");
    taps_ = taps(order);
  }

  int order() const { return order_; }
  double amplitude() const { return amplitude_; }
  int hold() const { return hold_; }
  std::uint64_t period() const { return mask_; }
  std::uint64_t state() const { return reg_; }

  double next() {
    const double v = ((reg_ >> (order_ - 1)) & 1ULL) ? amplitude_ : -amplitude_;
    if (++count_ >= hold_) {
      count_ = 0;
      std::uint64_t fb = 0;
      for (int t : taps_) fb ^= (reg_ >> (t - 1)) & 1ULL;
      reg_ = ((reg_ << 1) | fb) & mask_;
    }
    return v;
  }

  /// Tap positions (1-based) of x^n + ... + 1 primitive polynomials.
  static std::vector<int> taps(int order) {
    static const std::array<std::vector<int>, 33> table = {{
        {}, {}, {2, 1}, {3, 2}, {4, 3}, {5, 3}, {6, 5}, {7, 6}, {8, 6, 5, 4}, {9, 5},
        {10, 7}, {11, 9}, {12, 6, 4, 1}, {13, 4, 3, 1}, {14, 5, 3, 1}, {15, 14},
        {16, 15, 13, 4}, {17, 14}, {18, 11}, {19, 6, 2, 1}, {20, 17}, {21, 19}, {22, 21},
        {23, 18}, {24, 23, 22, 17}, {25, 22}, {26, 6, 2, 1}, {27, 5, 2, 1}, {28, 25},
        {29, 27}, {30, 6, 4, 1}, {31, 28}, {32, 22, 2, 1},
    }};
    return table[order];
  }

 private:
  int order_;
  double amplitude_;
  int hold_;
  std::uint64_t mask_ = 0;
  std::uint64_t reg_ = 0;
  std::vector<int> taps_;
  int count_ = 0;
};

/// Nonzero register seed drawn from a keyed stream.
inline std::uint32_t prbs_seed(std::uint64_t seed, std::uint64_t channel, int order) {
  Rng rng = make_rng({seed, channel, 0x9b1dULL});
  const std::uint64_t mask = order >= 32 ? 0xffffffffULL : ((1ULL << order) - 1ULL);
  std::uint64_t r = 0;
  while (r == 0) r = rng() & mask;
  return static_cast<std::uint32_t>(r);
}

struct RbcConfig {
  int charge_start = 0, charge_end = 4;       // [start, end) hours
  int discharge_start = 5, discharge_end = 23;
  double charge_current = 15.0;               // A
  double soc_high = 0.9;
  double soc_low = 0.2;
  double prbs_amp_building = 5.0;             // kW
  double prbs_amp_battery = 15.0;             // A
  double prbs_amp_blinds = 0.25;
  int prbs_order = 20;
  double u_min = 0.0, u_max = 5.0;            // radiator kW
  double i_min = -22.0, i_max = 22.0;         // battery A
  int blinds_open_start = 7, blinds_open_end = 19;
  double blinds_open = 1.0, blinds_closed = 0.5;

  void validate() const {
    require(0.0 <= soc_low && soc_low < soc_high && soc_high <= 1.0, ErrorKind::InvalidConfig,
            "need 0 <= soc_low < soc_high <= 1");
    auto in_day = [](int a, int b) { return 0 <= a && a <= b && b <= 24; };
    require(in_day(charge_start, charge_end) && in_day(discharge_start, discharge_end) &&
                in_day(blinds_open_start, blinds_open_end),
            ErrorKind::InvalidConfig, "windows must lie within a day");
    require(u_min <= u_max && i_min <= i_max, ErrorKind::InvalidConfig, "unordered bounds");
  }
};

/// Per zone: full heat below the band, off above it, off inside; plus dither.
inline Eigen::VectorXd rbc_building_control(const Eigen::Ref<const Eigen::VectorXd>& y,
                                            const Eigen::Ref<const Eigen::VectorXd>& y_min,
                                            const Eigen::Ref<const Eigen::VectorXd>& y_max,
                                            const Eigen::Ref<const Eigen::VectorXd>& delta,
                                            double u_min, double u_max) {
  require(y.size() == y_min.size() && y.size() == y_max.size() && y.size() == delta.size(),
          ErrorKind::DimensionMismatch, "rbc_building_control: sizes");
  require(u_min <= u_max, ErrorKind::InvalidConfig, "unordered input bounds");
  Eigen::VectorXd u(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    require(y_min(i) <= y_max(i), ErrorKind::InvalidConfig, "unordered comfort bounds");
    double base = 0.0;
    if (y(i) <= y_min(i)) base = u_max;
    else if (y(i) >= y_max(i)) base = u_min;
    u(i) = std::clamp(base + delta(i), u_min, u_max);
  }
  return u;
}

/// Battery schedule. Outside the windows, or once the soc threshold is hit,
/// the base current is zero and only the dither remains.
inline double rbc_battery_control(int hour_of_day, double soc, const RbcConfig& cfg, double delta) {
  require(soc >= 0.0 && soc <= 1.0, ErrorKind::InvalidConfig, "soc out of [0, 1]");
  double base = 0.0;
  if (hour_of_day >= cfg.charge_start && hour_of_day < cfg.charge_end && soc < cfg.soc_high) {
    base = -cfg.charge_current;
  } else if (hour_of_day >= cfg.discharge_start && hour_of_day < cfg.discharge_end &&
             soc > cfg.soc_low) {
    base = cfg.charge_current;
  }
  return std::clamp(base + delta, cfg.i_min, cfg.i_max);
}

inline Eigen::VectorXd rbc_blinds(int hour_of_day, const RbcConfig& cfg,
                                  const Eigen::Ref<const Eigen::VectorXd>& delta) {
  const bool open = hour_of_day >= cfg.blinds_open_start && hour_of_day < cfg.blinds_open_end;
  Eigen::VectorXd b(delta.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    b(i) = std::clamp((open ? cfg.blinds_open : cfg.blinds_closed) + delta(i), 0.0, 1.0);
  }
  return b;
}

}  // namespace hubdeepc
