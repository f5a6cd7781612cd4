#include "hubdeepc/trajectory.hpp"

#include <cstdio>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace hubdeepc {
namespace {

Eigen::MatrixXd row_signal(std::initializer_list<double> values) {
  Eigen::MatrixXd s(1, values.size());
  int i = 0;
  for (double v : values) s(0, i++) = v;
  return s;
}

TEST(BuildHankel, ScalarDefinitionUnrolled) {
  const Eigen::MatrixXd H = build_hankel(row_signal({1, 2, 3, 4, 5}), 2);
  Eigen::MatrixXd expected(2, 4);
  expected << 1, 2, 3, 4, 2, 3, 4, 5;
  EXPECT_EQ(H, expected);
}

TEST(BuildHankel, Shapes) {
  EXPECT_EQ(build_hankel(Eigen::MatrixXd::Zero(1, 10), 4).rows(), 4);
  EXPECT_EQ(build_hankel(Eigen::MatrixXd::Zero(1, 10), 4).cols(), 7);
  const Eigen::MatrixXd H = build_hankel(Eigen::MatrixXd::Zero(22, 4416), 54);
  EXPECT_EQ(H.rows(), 1188);
  EXPECT_EQ(H.cols(), 4363);
}

TEST(BuildHankel, WindowTooLong) {
  try {
    build_hankel(Eigen::MatrixXd::Zero(2, 5), 6);
    FAIL() << "expected WindowTooLong";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowTooLong);
  }
}

TEST(BuildHankel, ShiftStructureExhaustive) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int m = 1; m <= 3; ++m) {
    for (int L = 1; L <= 5; ++L) {
      Eigen::MatrixXd s(m, 12);
      for (int i = 0; i < s.size(); ++i) s(i) = U(rng);
      const Eigen::MatrixXd H = build_hankel(s, L);
      for (int t = 0; t < L; ++t) {
        for (int j = 0; j < H.cols(); ++j) {
          EXPECT_EQ(H.block(t * m, j, m, 1), s.col(t + j));
          if (t + 1 < L && j + 1 < H.cols()) {
            EXPECT_EQ(H.block((t + 1) * m, j, m, 1), H.block(t * m, j + 1, m, 1));
          }
        }
      }
    }
  }
}

TEST(PersistentExcitation, ConstantSignalIsRankDeficient) {
  const auto r = check_persistent_excitation(row_signal({1, 1, 1, 1, 1, 1}), 2, {1, 1, 0});
  EXPECT_FALSE(r.exciting);
  EXPECT_EQ(r.rank, 1);
  EXPECT_EQ(r.required_rank, 2);
}

TEST(PersistentExcitation, PrbsOfLength40) {
  const auto seq = testing::mls5(40);
  Eigen::MatrixXd s(1, 40);
  for (int i = 0; i < 40; ++i) s(0, i) = seq[i];
  // Oracle: Gaussian elimination on the 3 x 38 Hankel matrix.
  Eigen::MatrixXd H(3, 38);
  for (int t = 0; t < 3; ++t) for (int j = 0; j < 38; ++j) H(t, j) = seq[t + j];
  ASSERT_EQ(testing::gaussian_rank(H), 3);
  const auto r = check_persistent_excitation(s, 3, {1, 1, 2});
  EXPECT_TRUE(r.exciting);
  EXPECT_EQ(r.rank, 3);
  EXPECT_EQ(r.length_slack, 40 - 9);
}

TEST(PersistentExcitation, LengthBoundViolated) {
  // (m+1)(L+n)-1 = 2*(3+2)-1 = 9; a record of 8 samples fails regardless of rank.
  const auto seq = testing::mls5(8);
  Eigen::MatrixXd s(1, 8);
  for (int i = 0; i < 8; ++i) s(0, i) = seq[i];
  const auto r = check_persistent_excitation(s, 3, {1, 1, 2});
  EXPECT_EQ(r.length_slack, -1);
  EXPECT_FALSE(r.exciting);
}

TEST(PersistentExcitation, MonotoneInOrder) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  Eigen::MatrixXd s(2, 120);
  for (int i = 0; i < s.size(); ++i) s(i) = U(rng);
  for (int L = 12; L >= 1; --L) {
    EXPECT_TRUE(check_persistent_excitation(s, L, {2, 1, 3}).exciting) << "L=" << L;
  }
}

TEST(PartitionHankel, ScalarExample) {
  Trajectory data(row_signal({1, 2, 3, 4}), row_signal({10, 20, 30, 40}));
  const HankelBlocks b = partition_hankel(data, 1, 1);
  EXPECT_EQ(b.U_p, row_signal({1, 2, 3}));
  EXPECT_EQ(b.U_f, row_signal({2, 3, 4}));
  EXPECT_EQ(b.Y_p, row_signal({10, 20, 30}));
  EXPECT_EQ(b.Y_f, row_signal({20, 30, 40}));
}

TEST(PartitionHankel, FullScaleShapes) {
  Trajectory data(Eigen::MatrixXd::Zero(22, 4416), Eigen::MatrixXd::Zero(7, 4416));
  const HankelBlocks b = partition_hankel(data, 30, 24);
  EXPECT_EQ(b.U_p.rows(), 660);
  EXPECT_EQ(b.Y_p.rows(), 210);
  EXPECT_EQ(b.U_f.rows(), 528);
  EXPECT_EQ(b.Y_f.rows(), 168);
  EXPECT_EQ(b.columns(), 4363);
}

TEST(PartitionHankel, BoundarySingleColumn) {
  Trajectory data(Eigen::MatrixXd::Ones(2, 7), Eigen::MatrixXd::Ones(1, 7));
  const HankelBlocks b = partition_hankel(data, 3, 4);
  EXPECT_EQ(b.columns(), 1);
  EXPECT_EQ(b.Y_f.cols(), 1);
}

TEST(PartitionHankel, ColumnsReconstructInputWindows) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  Eigen::MatrixXd u(3, 30), y(2, 30);
  for (int i = 0; i < u.size(); ++i) u(i) = U(rng);
  for (int i = 0; i < y.size(); ++i) y(i) = U(rng);
  const HankelBlocks b = partition_hankel(Trajectory(u, y), 4, 5);
  for (int j = 0; j < b.columns(); ++j) {
    Eigen::VectorXd col(b.U_p.rows() + b.U_f.rows());
    col << b.U_p.col(j), b.U_f.col(j);
    const Eigen::Map<const Eigen::VectorXd> window(u.col(j).data(), 3 * 9);
    EXPECT_EQ(col, window);
  }
}

TEST(PartitionHankel, LtiRankBound) {
  // x+ = A x + B u, y = C x + D u with n = 3, m = 2, p = 2.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0, 1);
  Eigen::MatrixXd A(3, 3);
  A << 0.7, 0.2, 0.0, -0.1, 0.5, 0.3, 0.0, 0.1, 0.6;
  Eigen::MatrixXd B(3, 2), C(2, 3), D(2, 2);
  for (int i = 0; i < B.size(); ++i) B(i) = N(rng);
  for (int i = 0; i < C.size(); ++i) C(i) = N(rng);
  for (int i = 0; i < D.size(); ++i) D(i) = N(rng);
  const int T = 200, Tini = 3, Tf = 4, n = 3;
  Eigen::MatrixXd u(2, T), y(2, T);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  for (int t = 0; t < T; ++t) {
    u(0, t) = N(rng);
    u(1, t) = N(rng);
    y.col(t) = C * x + D * u.col(t);
    x = A * x + B * u.col(t);
  }
  const HankelBlocks b = partition_hankel(Trajectory(u, y), Tini, Tf);
  const int r = testing::gaussian_rank(b.stacked(), 1e-10);
  EXPECT_GE(r, 2 * (Tini + Tf) + n);
  EXPECT_LE(r, 2 * (Tini + Tf) + n);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-100, 100);
  Eigen::MatrixXd u(3, 17), y(2, 17);
  for (int i = 0; i < u.size(); ++i) u(i) = U(rng);
  for (int i = 0; i < y.size(); ++i) y(i) = U(rng);
  const Trajectory t(u, y, 1.0);
  const auto path = (std::filesystem::temp_directory_path() / "hubdeepc_traj_test.csv").string();
  TrajectoryMetadata meta;
  meta.inputs = {{"a", "kW"}, {"b", "A"}, {"c", "-"}};
  meta.outputs = {{"T", "degC"}, {"V", "V"}};
  write_trajectory_csv(path, t, &meta);
  const Trajectory back = read_trajectory_csv(path);
  EXPECT_EQ(back.inputs, u);
  EXPECT_EQ(back.outputs, y);
  EXPECT_TRUE(std::filesystem::exists(path + ".meta.json"));
  std::remove(path.c_str());
  std::remove((path + ".meta.json").c_str());
}

TEST(Trajectory, RejectsUnequalLengths) {
  EXPECT_THROW(Trajectory(Eigen::MatrixXd::Zero(1, 3), Eigen::MatrixXd::Zero(1, 4)), Error);
}

}  // namespace
}  // namespace hubdeepc
