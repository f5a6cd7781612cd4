#pragma once

// Synthetic weather, occupancy and tariff profiles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

#include "hubdeepc/error.hpp"
#include "hubdeepc/random.hpp"

namespace hubdeepc {

inline constexpr int kZones = 5;
inline constexpr int kFacades = 4;  // S, E, W, N
inline constexpr int kDisturbances = kZones + 2 + kFacades;

/// One day of disturbances, hourly samples.
struct DisturbanceProfile {
  Eigen::Matrix<double, kZones, 24> internal_gains;  // W/m2
  Eigen::Matrix<double, 1, 24> ambient;              // degC
  Eigen::Matrix<double, 1, 24> ground;               // degC
  Eigen::Matrix<double, kFacades, 24> solar;         // W/m2
  int horizon = 24;

  /// Stacked disturbance vector at hour h: gains (5), ambient, ground, solar (4).
  Eigen::Matrix<double, kDisturbances, 1> at(int h) const {
    Eigen::Matrix<double, kDisturbances, 1> v;
    v.head<kZones>() = internal_gains.col(h);
    v(kZones) = ambient(h);
    v(kZones + 1) = ground(h);
    v.tail<kFacades>() = solar.col(h);
    return v;
  }
};

struct WeatherParams {
  double ambient_mean = 10.0;
  double ambient_seasonal = 10.0;
  double ambient_diurnal = 5.0;
  double ambient_noise = 1.0;
  double ground_mean = 10.0;
  double ground_seasonal = 3.0;
  double ground_noise = 0.1;
  double solar_peak_mean = 500.0;
  double solar_peak_seasonal = 300.0;
  std::array<double, kFacades> facade_factor{1.0, 0.7, 0.7, 0.25};
  double cloud_min = 0.3;
  double facade_jitter = 0.2;  // independent relative noise per facade
  double gains_peak = 2.5;
  double gains_base = 0.25;
  std::array<double, kZones> zone_occupancy{1.0, 0.8, 1.2, 0.6, 0.9};
  double gains_noise = 0.3;
  int office_start = 8;
  int office_end = 18;
};

/// Deterministic in (day, seed).
inline DisturbanceProfile generate_disturbances(int day_of_year, std::uint64_t seed,
                                                const WeatherParams& w = {}) {
  require(day_of_year >= 1 && day_of_year <= 365, ErrorKind::InvalidConfig,
          "day_of_year must be in [1, 365]");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Rng rng = make_rng({seed, static_cast<std::uint64_t>(day_of_year), 0x57ea7e5ULL});
  const double d = day_of_year;
  const double season = std::cos(two_pi * (d - 172.0) / 365.0);  // +1 midsummer
  const double day_length = 12.0 + 4.0 * season;
  const double sunrise = 12.0 - 0.5 * day_length;
  const double peak = w.solar_peak_mean + w.solar_peak_seasonal * season;
  const double cloud_day = uniform(rng, w.cloud_min, 1.0);
  const bool weekend = ((day_of_year - 1) % 7) >= 5;

  DisturbanceProfile p;
  for (int h = 0; h < 24; ++h) {
    p.ambient(h) = w.ambient_mean - w.ambient_seasonal * std::cos(two_pi * (d - 15.0) / 365.0) -
                   w.ambient_diurnal * std::cos(two_pi * (h - 3.0) / 24.0) +
                   w.ambient_noise * gaussian(rng);
    p.ground(h) = w.ground_mean - w.ground_seasonal * std::cos(two_pi * (d - 45.0) / 365.0) +
                  w.ground_noise * gaussian(rng);
    const double tc = h + 0.5;
    const double shape = std::max(0.0, std::sin(std::numbers::pi * (tc - sunrise) / day_length));
    const double cloud = std::clamp(cloud_day + 0.3 * (uniform01(rng) - 0.5), w.cloud_min, 1.0);
    for (int f = 0; f < kFacades; ++f) {
      double orient = 1.0;
      if (f == 1) orient = tc < 12.0 ? 1.2 : 0.5;  // east
      if (f == 2) orient = tc < 12.0 ? 0.5 : 1.2;  // west
      const double jitter = 1.0 + w.facade_jitter * (uniform01(rng) - 0.5);
      p.solar(f, h) = peak * shape * cloud * w.facade_factor[f] * orient * jitter;
    }
    const bool office = !weekend && h >= w.office_start && h < w.office_end;
    for (int z = 0; z < kZones; ++z) {
      const double level = office ? w.gains_peak * w.zone_occupancy[z] : w.gains_base;
      p.internal_gains(z, h) = std::max(0.0, level + w.gains_noise * (uniform01(rng) - 0.5));
    }
  }
  return p;
}

/// Day of year (1..365) for an absolute hour counted from 1 January 00:00.
inline int day_of_hour(long hour) {
  const long day = hour >= 0 ? hour / 24 : -((-hour + 23) / 24);
  const long d = day % 365;
  return static_cast<int>(d < 0 ? d + 365 : d) + 1;
}

inline int hour_of_day(long hour) {
  const long h = hour % 24;
  return static_cast<int>(h < 0 ? h + 24 : h);
}

struct TariffProfile {
  std::array<double, 24> c{};  // CHF/kWh
  int period = 24;

  double at(long hour) const { return c[hour_of_day(hour)]; }

  void validate() const {
    for (double v : c) require(v >= 0.0, ErrorKind::InvalidConfig, "tariff must be nonnegative");
  }
};

struct TariffParams {
  double day_price = 0.27;
  double night_price = 0.18;
  int day_start = 7;
  int day_end = 21;
};

inline TariffProfile generate_tariff(std::uint64_t /*seed*/, const TariffParams& t = {}) {
  TariffProfile p;
  for (int h = 0; h < 24; ++h) {
    p.c[h] = (h >= t.day_start && h < t.day_end) ? t.day_price : t.night_price;
  }
  p.validate();
  return p;
}

/// Hourly disturbance matrix (11 x hours) starting at an absolute hour.
inline Eigen::MatrixXd disturbance_window(long start_hour, int hours, std::uint64_t seed,
                                          const WeatherParams& w = {}) {
  Eigen::MatrixXd v(kDisturbances, hours);
  int cached_day = -1;
  DisturbanceProfile prof;
  for (int k = 0; k < hours; ++k) {
    const long t = start_hour + k;
    const int day = day_of_hour(t);
    if (day != cached_day) {
      prof = generate_disturbances(day, seed, w);
      cached_day = day;
    }
    v.col(k) = prof.at(hour_of_day(t));
  }
  return v;
}

}  // namespace hubdeepc
