#pragma once

// Independent oracles shared by the test suites. Nothing here calls into the
// library code paths being checked.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace hubdeepc::testing {

/// Rank by Gaussian elimination with partial pivoting.
inline int gaussian_rank(Eigen::MatrixXd M, double rel_tol = 1e-9) {
  const Eigen::Index rows = M.rows(), cols = M.cols();
  const double scale = M.size() ? M.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index c = 0; c < cols && rank < rows; ++c) {
    Eigen::Index piv = rank;
    for (Eigen::Index r = rank; r < rows; ++r) {
      if (std::abs(M(r, c)) > std::abs(M(piv, c))) piv = r;
    }
    if (std::abs(M(piv, c)) <= rel_tol * scale) continue;
    M.row(piv).swap(M.row(rank));
    for (Eigen::Index r = rank + 1; r < rows; ++r) {
      const double f = M(r, c) / M(rank, c);
      M.row(r) -= f * M.row(rank);
    }
    ++rank;
  }
  return rank;
}

/// +-1 maximal-length sequence from a 5-bit Fibonacci register (x^5 + x^3 + 1).
inline std::vector<double> mls5(int length, unsigned seed = 0b10101) {
  std::vector<double> out;
  unsigned reg = seed & 0x1F;
  for (int i = 0; i < length; ++i) {
    const unsigned bit = ((reg >> 4) ^ (reg >> 2)) & 1U;
    out.push_back((reg & 1U) ? 1.0 : -1.0);
    reg = ((reg << 1) | bit) & 0x1F;
  }
  return out;
}

struct ActiveSetResult {
  bool feasible = false;
  Eigen::VectorXd z;
  double objective = 0.0;
};

/// Brute-force oracle for strictly convex QPs: enumerate every activity
/// pattern of the inequalities, solve the equality-constrained KKT system and
/// keep the pattern that is primal feasible with nonnegative multipliers.
inline ActiveSetResult enumerate_active_sets(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                                             const Eigen::MatrixXd& Aeq, const Eigen::VectorXd& beq,
                                             const Eigen::MatrixXd& Ain, const Eigen::VectorXd& bin) {
  const int n = static_cast<int>(f.size());
  const int meq = static_cast<int>(Aeq.rows());
  const int min = static_cast<int>(Ain.rows());
  ActiveSetResult best;
  for (std::uint32_t mask = 0; mask < (1U << min); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < min; ++i) if (mask & (1U << i)) act.push_back(i);
    const int na = meq + static_cast<int>(act.size());
    if (na > n) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + na, n + na);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + na);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -f;
    for (int i = 0; i < meq; ++i) {
      K.block(n + i, 0, 1, n) = Aeq.row(i);
      K.block(0, n + i, n, 1) = Aeq.row(i).transpose();
      rhs(n + i) = beq(i);
    }
    for (size_t k = 0; k < act.size(); ++k) {
      const int r = n + meq + static_cast<int>(k);
      K.block(r, 0, 1, n) = Ain.row(act[k]);
      K.block(0, r, n, 1) = Ain.row(act[k]).transpose();
      rhs(r) = bin(act[k]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(n);
    bool ok = true;
    for (size_t k = 0; k < act.size() && ok; ++k) ok = sol(n + meq + k) >= -1e-9;
    if (min > 0) ok = ok && ((Ain * z - bin).maxCoeff() <= 1e-9);
    if (!ok) continue;
    const double obj = 0.5 * z.dot(H * z) + f.dot(z);
    if (!best.feasible || obj < best.objective) {
      best.feasible = true;
      best.z = z;
      best.objective = obj;
    }
  }
  return best;
}

/// Random strictly convex QP with a known-feasible interior point.
struct RandomQp {
  Eigen::MatrixXd H, Aeq, Ain;
  Eigen::VectorXd f, beq, bin;
};

inline RandomQp random_qp(std::mt19937_64& rng, int n, int meq, int min) {
  std::normal_distribution<double> N(0.0, 1.0);
  auto randn = [&](int r, int c) {
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i) for (int j = 0; j < c; ++j) M(i, j) = N(rng);
    return M;
  };
  RandomQp p;
  const Eigen::MatrixXd G = randn(n, n);
  p.H = G * G.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
  p.f = randn(n, 1);
  const Eigen::VectorXd z0 = randn(n, 1);
  p.Aeq = randn(meq, n);
  p.beq = p.Aeq * z0;
  p.Ain = randn(min, n);
  p.bin = p.Ain * z0 + randn(min, 1).cwiseAbs();
  return p;
}

/// Discrete LTI system x+ = A x + B u, y = C x + D u.
struct Lti {
  Eigen::MatrixXd A, B, C, D;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }

  /// Outputs for inputs u (m x T) from state x0; returns p x T, updates x0.
  Eigen::MatrixXd simulate(const Eigen::MatrixXd& u, Eigen::VectorXd& x) const {
    Eigen::MatrixXd y(p(), u.cols());
    for (Eigen::Index t = 0; t < u.cols(); ++t) {
      y.col(t) = C * x + D * u.col(t);
      x = A * x + B * u.col(t);
    }
    return y;
  }
};

/// Random stable system with spectral radius <= 0.9; controllability is
/// checked by the Kalman rank test and the draw repeated if needed.
inline Lti random_lti(std::mt19937_64& rng, int n, int m, int p) {
  std::normal_distribution<double> N(0.0, 1.0);
  for (;;) {
    Lti s;
    s.A.resize(n, n);
    s.B.resize(n, m);
    s.C.resize(p, n);
    s.D = Eigen::MatrixXd::Zero(p, m);
    for (int i = 0; i < s.A.size(); ++i) s.A(i) = N(rng);
    for (int i = 0; i < s.B.size(); ++i) s.B(i) = N(rng);
    for (int i = 0; i < s.C.size(); ++i) s.C(i) = N(rng);
    const double radius = Eigen::EigenSolver<Eigen::MatrixXd>(s.A).eigenvalues().cwiseAbs().maxCoeff();
    s.A *= 0.9 / radius;
    Eigen::MatrixXd ctrb(n, n * m);
    Eigen::MatrixXd AkB = s.B;
    for (int k = 0; k < n; ++k) {
      ctrb.middleCols(k * m, m) = AkB;
      AkB = s.A * AkB;
    }
    Eigen::MatrixXd obsv(n * p, n);
    Eigen::MatrixXd CAk = s.C;
    for (int k = 0; k < n; ++k) {
      obsv.middleRows(k * p, p) = CAk;
      CAk = CAk * s.A;
    }
    if (gaussian_rank(ctrb, 1e-8) == n && gaussian_rank(obsv, 1e-8) == n) return s;
  }
}

/// Single-zone hub with a linear battery voltage: inputs (u_s, u_h, u_b),
/// outputs (zone, [y_h,] y_b). States are zone temperature and charge.
struct ToyHub {
  Lti sys;
  double alpha = 1.0;
  double C_h = 3.0;
  bool heat_output = false;

  explicit ToyHub(bool with_heat_output = false) : heat_output(with_heat_output) {
    const int p = heat_output ? 3 : 2;
    sys.A = Eigen::Matrix2d{{0.8, 0.0}, {0.0, 1.0}};
    sys.B = Eigen::MatrixXd::Zero(2, 3);
    sys.B(0, 0) = 1.0;
    sys.B(1, 2) = -1.0 / 40.0;
    sys.C = Eigen::MatrixXd::Zero(p, 2);
    sys.D = Eigen::MatrixXd::Zero(p, 3);
    sys.C(0, 0) = 1.0;
    if (heat_output) sys.D(1, 1) = C_h;
    sys.C(p - 1, 1) = 130.0;
    sys.D(p - 1, 2) = -0.05;
  }

  double heat_input(double u_s) const { return u_s / (alpha * C_h); }

  /// Random two-level radiator and battery inputs with a consistent u_h.
  Eigen::MatrixXd excitation(std::mt19937_64& rng, int T) const {
    std::bernoulli_distribution coin(0.5);
    Eigen::MatrixXd u(3, T);
    for (int t = 0; t < T; ++t) {
      u(0, t) = coin(rng) ? 4.0 : 1.0;
      u(1, t) = heat_input(u(0, t));
      u(2, t) = coin(rng) ? 10.0 : -10.0;
    }
    return u;
  }

  /// Input that holds the zone at temp with an idle battery.
  Eigen::MatrixXd steady(double temp, int T) const {
    const double u_s = (1.0 - sys.A(0, 0)) * temp / sys.B(0, 0);
    Eigen::MatrixXd u(3, T);
    u.row(0).setConstant(u_s);
    u.row(1).setConstant(heat_input(u_s));
    u.row(2).setZero();
    return u;
  }
};

}  // namespace hubdeepc::testing
