#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hubdeepc/battery.hpp"
#include "hubdeepc/building.hpp"
#include "hubdeepc/heat_pump.hpp"
#include "hubdeepc/profiles.hpp"

namespace hubdeepc {
namespace {

Eigen::VectorXd quiet_disturbance(double ambient, double ground) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kDisturbances);
  v(kZones) = ambient;
  v(kZones + 1) = ground;
  return v;
}

TEST(Building, DimensionsAndStability) {
  const BuildingModel m = make_building();
  m.validate();
  EXPECT_EQ(m.n_b(), 25);
  EXPECT_EQ(m.n_u(), 9);
  EXPECT_EQ(m.n_v(), 11);
  EXPECT_EQ(m.n_y(), 5);
  EXPECT_TRUE(m.hurwitz());
  for (int z = 0; z < kZones; ++z) {
    EXPECT_EQ(m.C_c.row(z).sum(), 1.0);
    EXPECT_EQ(m.C_c(z, air_node(z)), 1.0);
  }
}

TEST(Building, EquilibriumIsStationary) {
  const BuildingModel m = make_building();
  const BuildingState x = uniform_state(m, 20.0);
  const auto [next, y] = building_step(m, x, Eigen::VectorXd::Zero(9), quiet_disturbance(20, 20), 1.0);
  EXPECT_LE((next.x_s - x.x_s).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((y.array() - 20.0).abs().maxCoeff(), 1e-12);
}

TEST(Building, ClosedBlindsBlockSolar) {
  const BuildingModel m = make_building();
  const BuildingState x = uniform_state(m, 21.0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(9);
  u.head(kZones).setConstant(2.0);  // blinds stay at 0
  Eigen::VectorXd dark = quiet_disturbance(5, 8);
  Eigen::VectorXd sunny = dark;
  sunny.tail(kFacades) << 600, 400, 300, 100;
  const auto a = building_step(m, x, u, dark, 1.0);
  const auto b = building_step(m, x, u, sunny, 1.0);
  EXPECT_EQ(a.first.x_s, b.first.x_s);
  u(kZones) = 1.0;  // open one blind and the zone warms up
  const auto c = building_step(m, x, u, sunny, 1.0);
  EXPECT_GT(c.second(0), b.second(0));
}

TEST(Building, MatchesOneNodeClosedForm) {
  // Single air node: C dT/dt = (T_amb - T)/R + Q.
  const double C = 2.0, R = 2.5, Q = 1.0;  // kWh/K, K/kW, kW
  BuildingModel m;
  m.A_c = Eigen::MatrixXd::Constant(1, 1, -1.0 / (R * C));
  m.B_u = Eigen::MatrixXd::Constant(1, 1, 1.0 / C);
  m.B_v = Eigen::MatrixXd::Constant(1, 1, 1.0 / (R * C));
  m.B_vu = {Eigen::MatrixXd::Zero(1, 1)};
  m.C_c = Eigen::MatrixXd::Ones(1, 1);
  m.validate();
  const double T0 = 18.0, Ta = 4.0, tau = R * C;
  BuildingState x{Eigen::VectorXd::Constant(1, T0)};
  const auto [next, y] = building_step(m, x, Eigen::VectorXd::Constant(1, Q),
                                       Eigen::VectorXd::Constant(1, Ta), 1.0);
  const double expected = Ta + Q * R + (T0 - Ta - Q * R) * std::exp(-1.0 / tau);
  EXPECT_NEAR(y(0), expected, 1e-6);
  EXPECT_NEAR(next.x_s(0), expected, 1e-6);
}

TEST(Building, CoolsMonotonicallyWithoutHeat) {
  const BuildingModel m = make_building();
  BuildingState x = uniform_state(m, 21.0);
  Eigen::VectorXd prev = m.C_c * x.x_s;
  for (int t = 0; t < 72; ++t) {
    auto [next, y] = building_step(m, x, Eigen::VectorXd::Zero(9), quiet_disturbance(0, 5), 1.0);
    for (int z = 0; z < kZones; ++z) EXPECT_LE(y(z), prev(z) + 1e-12) << "hour " << t;
    prev = y;
    x = next;
  }
  EXPECT_LT(prev.maxCoeff(), 21.0);
}

TEST(Building, Rk4SubstepsConverge) {
  const BuildingModel m = make_building();
  BuildingState x = uniform_state(m, 21.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long h = 0; h < 48; ++h) {
    const DisturbanceProfile prof = generate_disturbances(day_of_hour(h + 24 * 30), 3);
    const Eigen::VectorXd v = prof.at(hour_of_day(h));
    Eigen::VectorXd u(9);
    for (int i = 0; i < 9; ++i) u(i) = i < kZones ? 5.0 * unif(rng) : unif(rng);
    const auto coarse = building_step(m, x, u, v, 1.0, 10);
    const auto fine = building_step(m, x, u, v, 1.0, 20);
    EXPECT_LT((coarse.second - fine.second).cwiseAbs().maxCoeff(), 1e-6);
    x = fine.first;
  }
}

TEST(Building, BlowUpIsReported) {
  const BuildingModel m = make_building();
  BuildingState x = uniform_state(m, 59.9);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(9);
  u.head(kZones).setConstant(5000.0);
  try {
    building_step(m, x, u, quiet_disturbance(50, 50), 1.0);
    FAIL() << "expected StateBlowUp";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StateBlowUp);
  }
}

TEST(Battery, Examples) {
  const BatteryParams p;
  BatteryState s = fresh_battery(p, 0.5);
  auto r = battery_step(s, 10.0, 1.0, p);
  EXPECT_DOUBLE_EQ(r.state.soc, 0.25);

  BatteryState v = s;
  v.v_oc = 66.0;
  v.R0 = 0.05;
  EXPECT_DOUBLE_EQ(battery_step(v, 20.0, 1.0, p).y_b, 65.0);

  const auto c = battery_step(v, -15.0, 1.0, p);
  EXPECT_DOUBLE_EQ(c.state.soc, 0.875);
  EXPECT_DOUBLE_EQ(c.y_b, 66.0 + 0.75);
}

TEST(Battery, VoltageCurveInsideBand) {
  const BatteryParams p;
  EXPECT_NEAR(p.v_oc(0.55), 63.0, 0.05);
  EXPECT_LT(p.v_oc(0.93), 68.2);
  // full charge is only reachable by violating the upper voltage bound
  EXPECT_GT(p.v_oc(1.0) - p.R0_nom * 22.0, 68.0);
  for (double soc = 0.02; soc < 1.0; soc += 0.01) EXPECT_GT(p.v_oc(soc + 0.01), p.v_oc(soc));
}

TEST(Battery, AgeingDefinitions) {
  BatteryParams p;
  p.k_fade = 0.002;
  BatteryState s = fresh_battery(p, 0.5);
  s = update_ageing(s, p);
  EXPECT_EQ(s.cycles, 0.0);
  EXPECT_EQ(s.capacity_loss, 0.0);
  EXPECT_EQ(s.capacity, 40.0);
  EXPECT_EQ(s.R0, p.R0_nom);
  s.throughput = 80.0;
  s = update_ageing(s, p);
  EXPECT_DOUBLE_EQ(s.cycles, 1.0);
  EXPECT_DOUBLE_EQ(s.capacity_loss, 0.002);
  EXPECT_DOUBLE_EQ(s.capacity, 40.0 * 0.998);
  EXPECT_DOUBLE_EQ(s.R0, 0.05 * (1.0 + 0.5 * 0.002));
}

TEST(Battery, SymmetricVoltageAndRoundTrip) {
  BatteryParams p;
  const BatteryState s = fresh_battery(p, 0.7);
  for (double i : {1.0, 7.5, 22.0}) {
    const double up = battery_step(s, i, 1.0, p).y_b;
    const double down = battery_step(s, -i, 1.0, p).y_b;
    EXPECT_DOUBLE_EQ(0.5 * (up + down), s.v_oc);
  }
  const auto a = battery_step(s, -10.0, 1.0, p);
  const auto b = battery_step(a.state, 10.0, 1.0, p);
  EXPECT_NEAR(b.state.soc, s.soc, 1e-15);
}

TEST(Battery, MonotoneAgeingOverRandomUse) {
  BatteryParams p;
  p.k_fade = 0.001;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> cur(-22.0, 22.0);
  BatteryState s = fresh_battery(p, 0.5);
  for (int t = 0; t < 500; ++t) {
    const double i = limit_current(s, cur(rng), 1.0, 0.05, 1.0);
    const auto r = battery_step(s, i, 1.0, p);
    EXPECT_GE(r.state.throughput, s.throughput);
    EXPECT_GE(r.state.cycles, s.cycles);
    EXPECT_LE(r.state.capacity, s.capacity);
    EXPECT_DOUBLE_EQ(r.state.capacity_loss, p.k_fade * r.state.cycles);
    EXPECT_GE(r.state.soc, 0.05 - 1e-12);
    EXPECT_LE(r.state.soc, 1.0);
    EXPECT_FALSE(r.clamped);
    s = r.state;
  }
}

TEST(Battery, DisabledAgeingKeepsCapacity) {
  BatteryParams p;
  p.k_fade = 0.01;
  BatteryState s = fresh_battery(p, 0.5);
  for (int t = 0; t < 10; ++t) s = battery_step(s, t % 2 ? 10.0 : -10.0, 1.0, p, false).state;
  EXPECT_DOUBLE_EQ(s.cycles, 100.0 / 80.0);
  EXPECT_EQ(s.capacity, 40.0);
  EXPECT_EQ(s.R0, p.R0_nom);
}

TEST(Battery, LimitsAndClamping) {
  const BatteryParams p;
  const BatteryState s = fresh_battery(p, 0.1);
  try {
    battery_step(s, 41.0, 1.0, p);
    FAIL() << "expected CurrentLimit";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CurrentLimit);
  }
  const auto r = battery_step(s, 20.0, 1.0, p);
  EXPECT_EQ(r.state.soc, 0.0);
  EXPECT_TRUE(r.clamped);
  EXPECT_DOUBLE_EQ(limit_current(s, 20.0, 1.0, 0.05, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(limit_current(s, -20.0, 1.0, 0.05, 1.0), -20.0);
  EXPECT_EQ(limit_current(fresh_battery(p, 1.0), -5.0, 1.0, 0.05, 1.0), 0.0);
}

TEST(HeatPump, Examples) {
  EXPECT_DOUBLE_EQ(heat_pump_output(2.0), 6.0);
  EXPECT_DOUBLE_EQ(heat_pump_output(0.0), 0.0);
  EXPECT_DOUBLE_EQ(heat_pump_output(1.5), 4.5);
  try {
    heat_pump_output(-0.1);
    FAIL() << "expected NegativeInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NegativeInput);
  }
}

TEST(Disturbances, DeterministicAndSeasonal) {
  const DisturbanceProfile a = generate_disturbances(40, 7);
  const DisturbanceProfile b = generate_disturbances(40, 7);
  EXPECT_EQ(a.ambient, b.ambient);
  EXPECT_EQ(a.solar, b.solar);
  EXPECT_EQ(a.internal_gains, b.internal_gains);
  EXPECT_NE(generate_disturbances(40, 8).ambient, a.ambient);
  for (int day = 1; day <= 365; day += 11) {
    const DisturbanceProfile p = generate_disturbances(day, 1);
    EXPECT_TRUE((p.solar.col(0).array() == 0.0).all()) << "day " << day;
    EXPECT_GE(p.solar.minCoeff(), 0.0);
    EXPECT_GE(p.internal_gains.minCoeff(), 0.0);
  }
  double jan = 0, jul = 0;
  for (int d = 10; d < 20; ++d) jan += generate_disturbances(d, 1).ambient.mean();
  for (int d = 191; d < 201; ++d) jul += generate_disturbances(d, 1).ambient.mean();
  EXPECT_LT(jan, jul);
  EXPECT_THROW(generate_disturbances(0, 1), Error);
  EXPECT_THROW(generate_disturbances(366, 1), Error);
}

TEST(Disturbances, WindowFollowsCalendar) {
  const Eigen::MatrixXd V = disturbance_window(24 * 364 + 20, 10, 4);
  ASSERT_EQ(V.rows(), kDisturbances);
  const DisturbanceProfile last = generate_disturbances(365, 4);
  const DisturbanceProfile first = generate_disturbances(1, 4);
  EXPECT_EQ(V.col(0), last.at(20));
  EXPECT_EQ(V.col(4), first.at(0));
  EXPECT_EQ(day_of_hour(-1), 365);
  EXPECT_EQ(hour_of_day(-1), 23);
}

TEST(Tariff, Examples) {
  const TariffProfile t = generate_tariff(1);
  EXPECT_DOUBLE_EQ(t.at(12), 0.27);
  EXPECT_DOUBLE_EQ(t.at(2), 0.18);
  EXPECT_DOUBLE_EQ(t.at(24 * 17 + 12), 0.27);
  double sum = 0;
  for (int h = 0; h < 24; ++h) sum += t.at(h);
  EXPECT_NEAR(sum, 14 * 0.27 + 10 * 0.18, 1e-12);
}

}  // namespace
}  // namespace hubdeepc
