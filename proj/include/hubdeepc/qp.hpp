#pragma once

// Convex QP solver: operator splitting on the KKT system (OSQP-style ADMM)
// with Ruiz equilibration, adaptive step size, primal infeasibility
// certificates and an active-set polish step.
//
//   minimize    0.5 z'Hz + f'z + constant
//   subject to  A_eq z  = b_eq
//               A_in z <= b_in

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hubdeepc/error.hpp"

namespace hubdeepc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadraticProgram {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  double constant = 0.0;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  std::vector<std::string> var_names;

  QuadraticProgram() = default;
  explicit QuadraticProgram(int n)
      : H(Eigen::MatrixXd::Zero(n, n)),
        f(Eigen::VectorXd::Zero(n)),
        A_eq(0, n),
        b_eq(0),
        A_in(0, n),
        b_in(0) {}

  int size() const { return static_cast<int>(f.size()); }

  double objective(const Eigen::VectorXd& z) const {
    return 0.5 * z.dot(H * z) + f.dot(z) + constant;
  }

  /// Dimension checks plus symmetric-PSD test (lambda_min >= -1e-8 lambda_max).
  void validate(bool check_convexity = true) const {
    const Eigen::Index n = f.size();
    require(H.rows() == n && H.cols() == n, ErrorKind::DimensionMismatch,
            "H must be n x n");
    require(A_eq.cols() == n && A_eq.rows() == b_eq.size(),
            ErrorKind::DimensionMismatch, "A_eq/b_eq inconsistent");
    require(A_in.cols() == n && A_in.rows() == b_in.size(),
            ErrorKind::DimensionMismatch, "A_in/b_in inconsistent");
    require(var_names.empty() || static_cast<Eigen::Index>(var_names.size()) == n,
            ErrorKind::DimensionMismatch, "var_names size");
    if (!check_convexity || n == 0) return;
    const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    require(asym <= 1e-10 * scale, ErrorKind::DimensionMismatch, "H is not symmetric");
    // A Cholesky factorization of H + shift succeeds iff lambda_min > -shift;
    // the Gershgorin radius bounds lambda_max from above.
    double lam_max_bound = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      lam_max_bound = std::max(lam_max_bound, H.row(i).cwiseAbs().sum());
    }
    const double shift = 1e-8 * std::max(lam_max_bound, 1e-300);
    Eigen::LLT<Eigen::MatrixXd> llt(H + shift * Eigen::MatrixXd::Identity(n, n));
    require(llt.info() == Eigen::Success, ErrorKind::DimensionMismatch,
            "H is not positive semidefinite");
  }
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::MaxIter: return "MaxIter";
  }
  return "?";
}

struct QPSolution {
  Eigen::VectorXd z_star;
  Eigen::VectorXd duals_eq;
  Eigen::VectorXd duals_in;
  double objective = kInf;
  QpStatus status = QpStatus::MaxIter;
  double kkt_residual = kInf;
  int iterations = 0;
  bool polished = false;
};

struct QpWarmStart {
  Eigen::VectorXd z;
  Eigen::VectorXd duals_eq;  // optional (empty = zero)
  Eigen::VectorXd duals_in;  // optional
};

struct QpSettings {
  double tol = 1e-6;
  int max_iter = 50000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  int check_interval = 10;
  bool scaling = true;
  int scaling_iterations = 15;
  bool adaptive_rho = true;
  bool polish = true;
  double polish_delta = 1e-7;
  int polish_refine = 6;
  double infeasibility_tol = 1e-7;
  bool check_convexity = true;
};

/// Infinity norm of the stacked KKT residuals: stationarity, primal
/// feasibility, dual feasibility and complementary slackness.
inline double kkt_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                           const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                           const Eigen::MatrixXd& A_in, const Eigen::VectorXd& b_in,
                           const QPSolution& sol) {
  const Eigen::Index n = f.size();
  require(sol.z_star.size() == n && sol.duals_eq.size() == b_eq.size() &&
              sol.duals_in.size() == b_in.size(),
          ErrorKind::DimensionMismatch, "solution dimensions do not match the QP");
  require(H.rows() == n && A_eq.cols() == n && A_in.cols() == n,
          ErrorKind::DimensionMismatch, "QP dimensions inconsistent");
  const Eigen::VectorXd& z = sol.z_star;
  Eigen::VectorXd stationarity = H * z + f;
  if (A_eq.rows() > 0) stationarity += A_eq.transpose() * sol.duals_eq;
  if (A_in.rows() > 0) stationarity += A_in.transpose() * sol.duals_in;
  double r = n > 0 ? stationarity.cwiseAbs().maxCoeff() : 0.0;
  if (A_eq.rows() > 0) r = std::max(r, (A_eq * z - b_eq).cwiseAbs().maxCoeff());
  if (A_in.rows() > 0) {
    const Eigen::VectorXd slack = b_in - A_in * z;
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      if (std::isinf(slack(i)) && slack(i) > 0) {
        r = std::max(r, std::max(0.0, -sol.duals_in(i)));
        if (sol.duals_in(i) != 0.0) r = kInf;
        continue;
      }
      r = std::max(r, std::max(0.0, -slack(i)));
      r = std::max(r, std::max(0.0, -sol.duals_in(i)));
      r = std::max(r, std::abs(sol.duals_in(i) * slack(i)));
    }
  }
  return r;
}

inline double kkt_residual(const QuadraticProgram& qp, const QPSolution& sol) {
  return kkt_residual(qp.H, qp.f, qp.A_eq, qp.b_eq, qp.A_in, qp.b_in, sol);
}

namespace detail {

// Internal two-sided form l <= A z <= u. Equality rows come first. An
// inequality row and its exact negation share one internal row; each internal
// row remembers which A_in rows bound it from above and from below.
struct RowMap {
  Eigen::MatrixXd A;
  Eigen::Index meq = 0;
  std::vector<std::vector<int>> upper;
  std::vector<std::vector<int>> lower;
};

struct RowBounds {
  Eigen::VectorXd l, u;
  std::vector<int> upper_src, lower_src;
};

inline std::uint64_t hash_row(const double* data, Eigen::Index n, double sign) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index j = 0; j < n; ++j) {
    double v = sign * data[j];
    if (v == 0.0) v = 0.0;  // fold -0.0
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

inline RowMap build_row_map(const Eigen::MatrixXd& A_eq, const Eigen::MatrixXd& A_in) {
  const Eigen::Index n = A_in.cols();
  const Eigen::Index meq = A_eq.rows();
  const Eigen::Index min = A_in.rows();
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat Ain = A_in;
  std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> seen;
  std::vector<Eigen::Index> unique_rows;
  std::vector<double> unique_sign;
  std::vector<int> rep(min);
  std::vector<double> sgn(min);
  for (Eigen::Index i = 0; i < min; ++i) {
    const double* row = Ain.row(i).data();
    double s = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (row[j] != 0.0) {
        s = row[j] > 0 ? 1.0 : -1.0;
        break;
      }
    }
    const std::uint64_t h = hash_row(row, n, s);
    int found = -1;
    auto it = seen.find(h);
    if (it != seen.end()) {
      for (Eigen::Index k : it->second) {
        const double* other = Ain.row(unique_rows[k]).data();
        const double so = unique_sign[k];
        bool same = true;
        for (Eigen::Index j = 0; j < n && same; ++j) same = (s * row[j] == so * other[j]);
        if (same) {
          found = static_cast<int>(k);
          break;
        }
      }
    }
    if (found < 0) {
      found = static_cast<int>(unique_rows.size());
      unique_rows.push_back(i);
      unique_sign.push_back(s);
      seen[h].push_back(found);
    }
    rep[i] = found;
    sgn[i] = s;
  }
  const Eigen::Index nu = static_cast<Eigen::Index>(unique_rows.size());
  RowMap map;
  map.meq = meq;
  map.A.resize(meq + nu, n);
  if (meq > 0) map.A.topRows(meq) = A_eq;
  for (Eigen::Index k = 0; k < nu; ++k) {
    map.A.row(meq + k) = unique_sign[k] * A_in.row(unique_rows[k]);
  }
  map.upper.assign(meq + nu, {});
  map.lower.assign(meq + nu, {});
  for (Eigen::Index i = 0; i < min; ++i) {
    const Eigen::Index r = meq + rep[i];
    (sgn[i] > 0 ? map.upper[r] : map.lower[r]).push_back(static_cast<int>(i));
  }
  return map;
}

inline RowBounds make_bounds(const RowMap& map, const Eigen::VectorXd& b_eq,
                             const Eigen::VectorXd& b_in) {
  const Eigen::Index mc = map.A.rows();
  RowBounds b;
  b.l = Eigen::VectorXd::Constant(mc, -kInf);
  b.u = Eigen::VectorXd::Constant(mc, kInf);
  b.upper_src.assign(mc, -1);
  b.lower_src.assign(mc, -1);
  for (Eigen::Index i = 0; i < map.meq; ++i) b.l(i) = b.u(i) = b_eq(i);
  for (Eigen::Index r = map.meq; r < mc; ++r) {
    for (int i : map.upper[r]) {
      if (b.upper_src[r] < 0 || b_in(i) < b.u(r)) {
        b.u(r) = b_in(i);
        b.upper_src[r] = i;
      }
    }
    for (int i : map.lower[r]) {
      if (b.lower_src[r] < 0 || -b_in(i) > b.l(r)) {
        b.l(r) = -b_in(i);
        b.lower_src[r] = i;
      }
    }
  }
  return b;
}

inline double inf_norm(const Eigen::VectorXd& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace detail

/// Solver for a family of QPs sharing H, A_eq and A_in. Scaling and the
/// convexity check run once; KKT factorizations are cached per step size.
/// solve() is const and safe to call concurrently.
class QpSolver {
 public:
  QpSolver(const Eigen::MatrixXd& H, const Eigen::MatrixXd& A_eq, const Eigen::MatrixXd& A_in,
           const QpSettings& settings = {})
      : settings_(settings), H_(H), A_eq_(A_eq), A_in_(A_in), cache_(std::make_shared<Cache>()) {
    QuadraticProgram shape(static_cast<int>(H.rows()));
    shape.H = H;
    shape.A_eq = A_eq;
    shape.b_eq = Eigen::VectorXd::Zero(A_eq.rows());
    shape.A_in = A_in;
    shape.b_in = Eigen::VectorXd::Zero(A_in.rows());
    shape.validate(settings.check_convexity);
    map_ = detail::build_row_map(A_eq, A_in);
    equilibrate();
  }

  int size() const { return static_cast<int>(H_.rows()); }
  const QpSettings& settings() const { return settings_; }

  QPSolution solve(const Eigen::VectorXd& f, double constant, const Eigen::VectorXd& b_eq,
                   const Eigen::VectorXd& b_in, const QpWarmStart* warm = nullptr) const;

 private:
  struct Cache {
    std::mutex mutex;
    std::map<int, std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>>> factors;
  };

  double rho_at(int level) const { return settings_.rho * std::pow(10.0, 0.5 * level); }

  Eigen::VectorXd rho_vector(int level) const {
    const Eigen::Index mc = map_.A.rows();
    Eigen::VectorXd r(mc);
    for (Eigen::Index i = 0; i < mc; ++i) r(i) = (i < map_.meq ? 1e3 : 1.0) * rho_at(level);
    return r;
  }

  const Eigen::LLT<Eigen::MatrixXd>& factor(int level) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->factors.find(level);
    if (it != cache_->factors.end()) return *it->second;
    Eigen::MatrixXd K = P_;
    K.diagonal().array() += settings_.sigma;
    if (A_.rows() > 0) K.noalias() += A_.transpose() * rho_vector(level).asDiagonal() * A_;
    auto llt = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(K);
    require(llt->info() == Eigen::Success, ErrorKind::SolverFailure,
            "ADMM linear system factorization failed");
    return *cache_->factors.emplace(level, std::move(llt)).first->second;
  }

  void equilibrate() {
    using Eigen::VectorXd;
    const Eigen::Index n = H_.rows();
    const Eigen::Index mc = map_.A.rows();
    P_ = H_;
    A_ = map_.A;
    D_ = VectorXd::Ones(n);
    E_ = VectorXd::Ones(mc);
    c_ = 1.0;
    if (!settings_.scaling || n == 0) return;
    auto clip_scale = [](double norm) {
      if (norm < 1e-4) return 1.0;
      return std::clamp(1.0 / std::sqrt(norm), 1e-4, 1e4);
    };
    for (int it = 0; it < settings_.scaling_iterations; ++it) {
      VectorXd dcol(n), erow(mc);
      for (Eigen::Index j = 0; j < n; ++j) {
        double nrm = P_.col(j).cwiseAbs().maxCoeff();
        if (mc > 0) nrm = std::max(nrm, A_.col(j).cwiseAbs().maxCoeff());
        dcol(j) = clip_scale(nrm);
      }
      for (Eigen::Index i = 0; i < mc; ++i) erow(i) = clip_scale(A_.row(i).cwiseAbs().maxCoeff());
      P_ = dcol.asDiagonal() * P_ * dcol.asDiagonal();
      if (mc > 0) A_ = erow.asDiagonal() * A_ * dcol.asDiagonal();
      D_ = D_.cwiseProduct(dcol);
      E_ = E_.cwiseProduct(erow);
      double mean_col = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) mean_col += P_.col(j).cwiseAbs().maxCoeff();
      mean_col /= static_cast<double>(n);
      const double gamma = mean_col < 1e-4 ? 1.0 : std::clamp(1.0 / mean_col, 1e-4, 1e4);
      P_ *= gamma;
      c_ *= gamma;
    }
  }

  QpSettings settings_;
  Eigen::MatrixXd H_, A_eq_, A_in_;
  detail::RowMap map_;
  Eigen::MatrixXd P_, A_;
  Eigen::VectorXd D_, E_;
  double c_ = 1.0;
  std::shared_ptr<Cache> cache_;
};

inline QPSolution QpSolver::solve(const Eigen::VectorXd& f, double constant,
                                  const Eigen::VectorXd& b_eq, const Eigen::VectorXd& b_in,
                                  const QpWarmStart* warm) const {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const Eigen::Index n = H_.rows();
  const Eigen::Index meq = A_eq_.rows();
  const Eigen::Index mc = map_.A.rows();
  require(f.size() == n && b_eq.size() == meq && b_in.size() == A_in_.rows(),
          ErrorKind::DimensionMismatch, "QP data does not match the prepared structure");
  const detail::RowBounds bounds = detail::make_bounds(map_, b_eq, b_in);
  const auto& eps = settings_.tol;
  const VectorXd& D = D_;
  const VectorXd& E = E_;
  const double c = c_;
  const MatrixXd& P = P_;
  const MatrixXd& A = A_;

  auto objective = [&](const VectorXd& z) { return 0.5 * z.dot(H_ * z) + f.dot(z) + constant; };
  auto residual = [&](const QPSolution& s) {
    return kkt_residual(H_, f, A_eq_, b_eq, A_in_, b_in, s);
  };

  for (Eigen::Index i = 0; i < mc; ++i) {
    if (bounds.l(i) > bounds.u(i)) {
      QPSolution s;
      s.z_star = VectorXd::Zero(n);
      s.duals_eq = VectorXd::Zero(meq);
      s.duals_in = VectorXd::Zero(b_in.size());
      if (bounds.upper_src[i] >= 0) s.duals_in(bounds.upper_src[i]) = 1.0;
      if (bounds.lower_src[i] >= 0) s.duals_in(bounds.lower_src[i]) = 1.0;
      s.objective = objective(s.z_star);
      s.kkt_residual = residual(s);
      s.status = QpStatus::Infeasible;
      return s;
    }
  }

  const VectorXd q = c * D.cwiseProduct(f);
  VectorXd l = E.cwiseProduct(bounds.l);
  VectorXd u = E.cwiseProduct(bounds.u);
  for (Eigen::Index i = 0; i < mc; ++i) {
    if (std::isinf(bounds.l(i))) l(i) = -kInf;
    if (std::isinf(bounds.u(i))) u(i) = kInf;
  }
  const VectorXd Dinv = D.cwiseInverse();
  const VectorXd Einv = E.cwiseInverse();

  VectorXd x = VectorXd::Zero(n);
  VectorXd z = VectorXd::Zero(mc);
  VectorXd y = VectorXd::Zero(mc);
  if (warm != nullptr && warm->z.size() == n) {
    x = Dinv.cwiseProduct(warm->z);
    z = A * x;
    for (Eigen::Index i = 0; i < mc; ++i) z(i) = std::clamp(z(i), l(i), u(i));
    VectorXd y_orig = VectorXd::Zero(mc);
    for (Eigen::Index i = 0; i < mc; ++i) {
      if (i < meq) {
        if (warm->duals_eq.size() == meq) y_orig(i) = warm->duals_eq(i);
      } else if (warm->duals_in.size() == b_in.size()) {
        if (bounds.upper_src[i] >= 0) y_orig(i) += warm->duals_in(bounds.upper_src[i]);
        if (bounds.lower_src[i] >= 0) y_orig(i) -= warm->duals_in(bounds.lower_src[i]);
      }
    }
    y = c * Einv.cwiseProduct(y_orig);
  }

  int level = 0;
  VectorXd rho_vec = rho_vector(level);
  const Eigen::LLT<MatrixXd>* kkt = &factor(level);

  auto unscaled = [&](const VectorXd& xs, const VectorXd& ys) {
    QPSolution s;
    s.z_star = D.cwiseProduct(xs);
    const VectorXd y_orig = E.cwiseProduct(ys) / c;
    s.duals_eq = y_orig.head(meq);
    s.duals_in = VectorXd::Zero(b_in.size());
    for (Eigen::Index i = meq; i < mc; ++i) {
      if (y_orig(i) > 0 && bounds.upper_src[i] >= 0 && !std::isinf(u(i))) {
        s.duals_in(bounds.upper_src[i]) = y_orig(i);
      } else if (y_orig(i) < 0 && bounds.lower_src[i] >= 0 && !std::isinf(l(i))) {
        s.duals_in(bounds.lower_src[i]) = -y_orig(i);
      }
    }
    s.objective = objective(s.z_star);
    s.kkt_residual = residual(s);
    return s;
  };

  // Active-set polish in the scaled space.
  auto polish = [&](const VectorXd& xs, const VectorXd& zs, const VectorXd& ys)
      -> std::optional<QPSolution> {
    std::vector<Eigen::Index> rows;
    std::vector<double> rhs;
    std::vector<int> side;  // -1 lower, +1 upper, 0 equality
    for (Eigen::Index i = 0; i < mc; ++i) {
      if (i < meq) {
        rows.push_back(i); rhs.push_back(u(i)); side.push_back(0);
      } else if (!std::isinf(l(i)) && zs(i) - l(i) < -ys(i)) {
        rows.push_back(i); rhs.push_back(l(i)); side.push_back(-1);
      } else if (!std::isinf(u(i)) && u(i) - zs(i) < ys(i)) {
        rows.push_back(i); rhs.push_back(u(i)); side.push_back(1);
      }
    }
    const Eigen::Index na = static_cast<Eigen::Index>(rows.size());
    MatrixXd Aa(na, n);
    VectorXd ba(na);
    for (Eigen::Index k = 0; k < na; ++k) {
      Aa.row(k) = A.row(rows[k]);
      ba(k) = rhs[k];
    }
    const double delta = settings_.polish_delta;
    MatrixXd K = P;
    K.diagonal().array() += delta;
    if (na > 0) K.noalias() += (Aa.transpose() * Aa) / delta;
    Eigen::LLT<MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) return std::nullopt;
    auto solve_reg = [&](const VectorXd& r1, const VectorXd& r2, VectorXd& dx, VectorXd& dy) {
      VectorXd rhs1 = r1;
      if (na > 0) rhs1 += Aa.transpose() * r2 / delta;
      dx = llt.solve(rhs1);
      dy = na > 0 ? VectorXd((Aa * dx - r2) / delta) : VectorXd();
    };
    VectorXd xp = xs, ya(na);
    solve_reg(-q, ba, xp, ya);
    for (int it = 0; it < settings_.polish_refine; ++it) {
      VectorXd r1 = -q - P * xp;
      if (na > 0) r1 -= Aa.transpose() * ya;
      VectorXd r2 = na > 0 ? VectorXd(ba - Aa * xp) : VectorXd();
      VectorXd dx, dy;
      solve_reg(r1, r2, dx, dy);
      xp += dx;
      if (na > 0) ya += dy;
    }
    VectorXd yp = VectorXd::Zero(mc);
    for (Eigen::Index k = 0; k < na; ++k) {
      double v = ya(k);
      if (side[k] < 0) v = std::min(v, 0.0);
      if (side[k] > 0) v = std::max(v, 0.0);
      yp(rows[k]) = v;
    }
    return unscaled(xp, yp);
  };

  auto finalize = [&](QPSolution s, QpStatus status, int iters, bool polished) {
    for (Eigen::Index i = 0; i < s.duals_in.size(); ++i) s.duals_in(i) = std::max(0.0, s.duals_in(i));
    s.kkt_residual = residual(s);
    s.status = status;
    if (status == QpStatus::Optimal && s.kkt_residual > eps) s.status = QpStatus::MaxIter;
    s.iterations = iters;
    s.polished = polished;
    return s;
  };

  VectorXd x_prev, z_prev, y_prev;
  VectorXd rhs(n), xt(n), zt(mc), zhat(mc);
  std::optional<QPSolution> best;
  int last_polish = -1000000;
  for (int k = 1; k <= settings_.max_iter; ++k) {
    x_prev = x;
    z_prev = z;
    y_prev = y;
    rhs = settings_.sigma * x - q;
    if (mc > 0) rhs.noalias() += A.transpose() * (rho_vec.cwiseProduct(z) - y);
    xt = kkt->solve(rhs);
    if (mc > 0) zt.noalias() = A * xt;
    x = settings_.alpha * xt + (1.0 - settings_.alpha) * x_prev;
    if (mc > 0) {
      zhat = settings_.alpha * zt + (1.0 - settings_.alpha) * z_prev;
      z = zhat + y.cwiseQuotient(rho_vec);
      for (Eigen::Index i = 0; i < mc; ++i) z(i) = std::clamp(z(i), l(i), u(i));
      y += rho_vec.cwiseProduct(zhat - z);
    }

    if (k % settings_.check_interval != 0 && k != settings_.max_iter) continue;

    const VectorXd Ax = mc > 0 ? VectorXd(A * x) : VectorXd();
    const VectorXd Px = P * x;
    const VectorXd Aty = mc > 0 ? VectorXd(A.transpose() * y) : VectorXd::Zero(n);
    const double prim = mc > 0 ? detail::inf_norm(Einv.cwiseProduct(Ax - z)) : 0.0;
    const double dual = detail::inf_norm(Dinv.cwiseProduct(Px + q + Aty)) / c;
    const double prim_scale =
        mc > 0 ? std::max(detail::inf_norm(Einv.cwiseProduct(Ax)), detail::inf_norm(Einv.cwiseProduct(z)))
               : 0.0;
    const double dual_scale = std::max({detail::inf_norm(Dinv.cwiseProduct(Px)),
                                        detail::inf_norm(Dinv.cwiseProduct(Aty)),
                                        detail::inf_norm(Dinv.cwiseProduct(q))}) / c;
    const bool coarse = prim <= 1e3 * eps * (1.0 + prim_scale) && dual <= 1e3 * eps * (1.0 + dual_scale);
    const bool fine = prim <= eps * (1.0 + prim_scale) && dual <= eps * (1.0 + dual_scale);

    // Primal infeasibility certificate from the dual iterate increment.
    if (mc > 0) {
      const VectorXd dy = y - y_prev;
      const double dy_norm = detail::inf_norm(E.cwiseProduct(dy));
      if (dy_norm > 1e-12) {
        const double at_dy = detail::inf_norm(Dinv.cwiseProduct(A.transpose() * dy));
        double support = 0.0;
        bool finite = true;
        for (Eigen::Index i = 0; i < mc && finite; ++i) {
          if (dy(i) > 0) {
            if (std::isinf(u(i))) finite = false; else support += u(i) * dy(i);
          } else if (dy(i) < 0) {
            if (std::isinf(l(i))) finite = false; else support += l(i) * dy(i);
          }
        }
        const double tol_inf = settings_.infeasibility_tol * dy_norm;
        if (finite && at_dy <= tol_inf && support < -tol_inf) {
          return finalize(unscaled(x, y), QpStatus::Infeasible, k, false);
        }
      }
    }

    if (fine || (coarse && settings_.polish && k - last_polish >= 10 * settings_.check_interval)) {
      QPSolution plain = unscaled(x, y);
      if (settings_.polish) {
        last_polish = k;
        auto pol = polish(x, z, y);
        if (pol && pol->kkt_residual <= eps && pol->kkt_residual <= plain.kkt_residual) {
          return finalize(*pol, QpStatus::Optimal, k, true);
        }
        if (pol && (!best || pol->kkt_residual < best->kkt_residual)) best = pol;
      }
      if (plain.kkt_residual <= eps) return finalize(plain, QpStatus::Optimal, k, false);
      if (!best || plain.kkt_residual < best->kkt_residual) best = plain;
    }

    if (settings_.adaptive_rho && mc > 0 && k % (5 * settings_.check_interval) == 0) {
      const double pr = prim / std::max(prim_scale, 1e-30);
      const double du = dual / std::max(dual_scale, 1e-30);
      const double ratio = std::sqrt(pr / std::max(du, 1e-30));
      const double target = std::clamp(rho_at(level) * ratio, 1e-6, 1e6);
      const int new_level = static_cast<int>(std::lround(2.0 * std::log10(target / settings_.rho)));
      if (std::abs(new_level - level) >= 2) {
        level = new_level;
        rho_vec = rho_vector(level);
        kkt = &factor(level);
      }
    }
  }
  QPSolution last = unscaled(x, y);
  if (settings_.polish) {
    auto pol = polish(x, z, y);
    if (pol && pol->kkt_residual <= eps) return finalize(*pol, QpStatus::Optimal, settings_.max_iter, true);
    if (pol && pol->kkt_residual < last.kkt_residual) last = *pol;
  }
  if (best && best->kkt_residual < last.kkt_residual) last = *best;
  return finalize(last, QpStatus::MaxIter, settings_.max_iter, false);
}

inline QPSolution solve_qp(const QuadraticProgram& qp, const QpSettings& settings,
                           const QpWarmStart* warm = nullptr) {
  qp.validate(false);
  const QpSolver solver(qp.H, qp.A_eq, qp.A_in, settings);
  return solver.solve(qp.f, qp.constant, qp.b_eq, qp.b_in, warm);
}

inline QPSolution solve_qp(const QuadraticProgram& qp, double tol = 1e-6,
                           int max_iter = 50000, const QpWarmStart* warm = nullptr) {
  QpSettings s;
  s.tol = tol;
  s.max_iter = max_iter;
  return solve_qp(qp, s, warm);
}


// --- text dump ----------------------------------------------------------------
// Layout: "n meq min", constant, then H rows, f, A_eq rows, b_eq, A_in rows,
// b_in; one matrix row per line, space separated, %.17g.

inline void write_qp_dump(std::ostream& os, const QuadraticProgram& qp) {
  auto row = [&](const auto& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v(j)));
      os << (j ? " " : "") << buf;
    }
    os << '\n';
  };
  os << qp.size() << ' ' << qp.A_eq.rows() << ' ' << qp.A_in.rows() << '\n';
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", qp.constant);
  os << buf << '\n';
  for (Eigen::Index i = 0; i < qp.H.rows(); ++i) row(qp.H.row(i));
  row(qp.f.transpose());
  for (Eigen::Index i = 0; i < qp.A_eq.rows(); ++i) row(qp.A_eq.row(i));
  row(qp.b_eq.transpose());
  for (Eigen::Index i = 0; i < qp.A_in.rows(); ++i) row(qp.A_in.row(i));
  row(qp.b_in.transpose());
}

inline QuadraticProgram read_qp_dump(std::istream& is) {
  long n = 0, meq = 0, min = 0;
  require(static_cast<bool>(is >> n >> meq >> min), ErrorKind::Io, "bad QP dump header");
  QuadraticProgram qp(static_cast<int>(n));
  qp.A_eq.resize(meq, n);
  qp.b_eq.resize(meq);
  qp.A_in.resize(min, n);
  qp.b_in.resize(min);
  auto read = [&](double& v) {
    std::string tok;
    require(static_cast<bool>(is >> tok), ErrorKind::Io, "truncated QP dump");
    v = std::stod(tok);
  };
  read(qp.constant);
  for (long i = 0; i < n; ++i) for (long j = 0; j < n; ++j) read(qp.H(i, j));
  for (long j = 0; j < n; ++j) read(qp.f(j));
  for (long i = 0; i < meq; ++i) for (long j = 0; j < n; ++j) read(qp.A_eq(i, j));
  for (long i = 0; i < meq; ++i) read(qp.b_eq(i));
  for (long i = 0; i < min; ++i) for (long j = 0; j < n; ++j) read(qp.A_in(i, j));
  for (long i = 0; i < min; ++i) read(qp.b_in(i));
  return qp;
}

}  // namespace hubdeepc
