#pragma once

// Generic data-driven predictive control on top of Hankel blocks.
//
// The trajectory (u, y) over the horizon is a linear image of the predictor
// coefficients g. Past samples, pinned future inputs and stage equalities fix
// an affine subspace of g; the controller parameterizes that subspace once at
// construction and each step only solves a QP in the remaining coordinates
// plus the comfort slacks.

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hubdeepc/error.hpp"
#include "hubdeepc/qp.hpp"
#include "hubdeepc/trajectory.hpp"

namespace hubdeepc {

/// Linear functional of one stage: cu' u_k + cy' y_k.
struct StageForm {
  Eigen::VectorXd cu;
  Eigen::VectorXd cy;
  std::string name;
};

struct StageBound {
  StageForm form;
  bool soft = false;  // soft bounds share one slack per step for both sides
};

struct StageCost {
  StageForm form;
  double weight = 1.0;  // weight * (form - target_k)^2
};

struct DeepcStructure {
  int m = 0;
  int p = 0;
  int T_ini = 1;
  int T_f = 1;
  std::vector<int> pinned_inputs;      // input channels fixed to per-step values
  std::vector<StageForm> equalities;   // form = 0 at every future step
  std::vector<StageBound> bounds;
  std::vector<StageCost> costs;
  double lambda_g = 0.0;
  double lambda_rho = 0.0;
  double equality_rank_tol = 1e-9;     // relative, for the equality pseudo-inverse

  int soft_count() const {
    int n = 0;
    for (const auto& b : bounds) n += b.soft ? 1 : 0;
    return n;
  }

  void validate() const {
    require(m >= 1 && p >= 1, ErrorKind::InvalidConfig, "need m, p >= 1");
    require(T_ini >= 1 && T_f >= 1, ErrorKind::InvalidConfig, "need T_ini, T_f >= 1");
    require(lambda_g >= 0 && lambda_rho >= 0, ErrorKind::InvalidConfig, "negative penalty");
    auto check = [&](const StageForm& f) {
      require(f.cu.size() == m && f.cy.size() == p, ErrorKind::DimensionMismatch,
              "stage form '" + f.name + "' has wrong length");
    };
    for (int c : pinned_inputs) {
      require(c >= 0 && c < m, ErrorKind::DimensionMismatch, "pinned channel out of range");
    }
    for (const auto& f : equalities) check(f);
    for (const auto& b : bounds) check(b.form);
    for (const auto& c : costs) {
      check(c.form);
      require(c.weight >= 0, ErrorKind::InvalidConfig, "negative stage cost weight");
    }
  }
};

/// Per-step data. Matrices are channel x time.
struct DeepcStepData {
  Eigen::MatrixXd u_ini;    // m x T_ini
  Eigen::MatrixXd y_ini;    // p x T_ini
  Eigen::MatrixXd pinned;   // pinned_inputs.size() x T_f
  Eigen::MatrixXd lo, hi;   // bounds.size() x T_f, +-inf allowed
  Eigen::MatrixXd targets;  // costs.size() x T_f
};

struct DeepcSolution {
  Eigen::MatrixXd u;    // m x T_f
  Eigen::MatrixXd y;    // p x T_f
  Eigen::MatrixXd rho;  // soft bounds x T_f
  Eigen::VectorXd g;
  double objective = 0.0;
  double equality_residual = 0.0;  // |E a0 - e|_inf, nonzero when past data is inconsistent
  QPSolution qp;
};

struct DeepcWarmStart {
  Eigen::VectorXd g;
  Eigen::MatrixXd rho;
  Eigen::VectorXd duals_in;
};

class DeepcController {
 public:
  DeepcController(const HankelBlocks& blocks, DeepcStructure structure,
                  const QpSettings& settings = {})
      : s_(std::move(structure)) {
    s_.validate();
    require(blocks.T_ini == s_.T_ini && blocks.T_f == s_.T_f, ErrorKind::DimensionMismatch,
            "Hankel blocks do not match the horizons");
    require(blocks.input_dim() == s_.m && blocks.output_dim() == s_.p,
            ErrorKind::DimensionMismatch, "Hankel blocks do not match m, p");
    N_g_ = blocks.columns();
    reduce_columns(blocks);
    build_affine_map();
    build_qp(settings);
  }

  const DeepcStructure& structure() const { return s_; }
  int columns() const { return N_g_; }
  int reduced_dim() const { return static_cast<int>(K_.cols()); }
  int free_dim() const { return static_cast<int>(N_.cols()); }
  const QpSolver& solver() const { return *solver_; }

  /// Horizon rows of K: g = Q a maps to (u_p, y_p, u_f, y_f) = K a.
  const Eigen::MatrixXd& reduced_hankel() const { return K_; }

  /// Map reduced coordinates back to predictor coefficients.
  Eigen::VectorXd expand(const Eigen::VectorXd& a) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(N_g_);
    g.head(a.size()) = a;
    g.applyOnTheLeft(qr_->householderQ());
    return g;
  }

  Eigen::VectorXd reduce(const Eigen::VectorXd& g) const {
    Eigen::VectorXd t = g;
    t.applyOnTheLeft(qr_->householderQ().adjoint());
    return t.head(K_.cols());
  }

  /// Equality right-hand side and particular solution a0.
  void particular(const DeepcStepData& d, Eigen::VectorXd& a0, double& residual) const {
    const Eigen::VectorXd e = equality_rhs(d);
    a0 = E_pinv_ * e;
    residual = e.size() ? (E_ * a0 - e).cwiseAbs().maxCoeff() : 0.0;
  }

  DeepcSolution solve(const DeepcStepData& d, const DeepcWarmStart* warm = nullptr) const {
    check_data(d);
    const int T_f = s_.T_f;
    const Eigen::Index nb = N_.cols();
    const int ns = s_.soft_count();
    Eigen::VectorXd a0;
    double eq_res = 0.0;
    particular(d, a0, eq_res);
    const Eigen::VectorXd uf0 = Kuf_ * a0;
    const Eigen::VectorXd yf0 = Kyf_ * a0;
    auto offsets = [&](const StageForm& f) {
      Eigen::VectorXd off(T_f);
      for (int k = 0; k < T_f; ++k) {
        off(k) = f.cu.dot(uf0.segment(k * s_.m, s_.m)) + f.cy.dot(yf0.segment(k * s_.p, s_.p));
      }
      return off;
    };

    Eigen::VectorXd f = Eigen::VectorXd::Zero(nb + ns * T_f);
    double constant = s_.lambda_g * a0.squaredNorm();
    if (nb > 0) f.head(nb) = 2.0 * s_.lambda_g * (N_.transpose() * a0);
    for (size_t c = 0; c < s_.costs.size(); ++c) {
      const Eigen::VectorXd r = offsets(s_.costs[c].form) - d.targets.row(c).transpose();
      const double w = s_.costs[c].weight;
      if (nb > 0) f.head(nb) += 2.0 * w * (cost_phi_[c].transpose() * r);
      constant += w * r.squaredNorm();
    }

    Eigen::VectorXd b_in(A_in_rows_);
    Eigen::Index row = 0;
    for (size_t j = 0; j < s_.bounds.size(); ++j) {
      const Eigen::VectorXd off = offsets(s_.bounds[j].form);
      for (int k = 0; k < T_f; ++k) {
        b_in(row++) = d.hi(j, k) - off(k);
        b_in(row++) = off(k) - d.lo(j, k);
      }
    }
    b_in.tail(ns * T_f).setZero();

    QpWarmStart ws;
    const QpWarmStart* wsp = nullptr;
    if (warm != nullptr && warm->g.size() == N_g_) {
      ws.z = Eigen::VectorXd::Zero(nb + ns * T_f);
      if (nb > 0) ws.z.head(nb) = N_.transpose() * (reduce(warm->g) - a0);
      if (warm->rho.rows() == ns && warm->rho.cols() == T_f) {
        for (int sidx = 0; sidx < ns; ++sidx) {
          ws.z.segment(nb + sidx * T_f, T_f) = warm->rho.row(sidx).transpose();
        }
      }
      if (warm->duals_in.size() == A_in_rows_) ws.duals_in = warm->duals_in;
      wsp = &ws;
    }

    DeepcSolution out;
    out.qp = solver_->solve(f, constant, Eigen::VectorXd(0), b_in, wsp);
    out.equality_residual = eq_res;
    out.objective = out.qp.objective;
    const Eigen::VectorXd& x = out.qp.z_star;
    Eigen::VectorXd a = a0;
    if (nb > 0) a += N_ * x.head(nb);
    const Eigen::VectorXd uf = Kuf_ * a;
    const Eigen::VectorXd yf = Kyf_ * a;
    out.u = Eigen::Map<const Eigen::MatrixXd>(uf.data(), s_.m, T_f);
    out.y = Eigen::Map<const Eigen::MatrixXd>(yf.data(), s_.p, T_f);
    out.rho.resize(ns, T_f);
    for (int sidx = 0; sidx < ns; ++sidx) {
      out.rho.row(sidx) = x.segment(nb + sidx * T_f, T_f).transpose();
    }
    out.g = expand(a);
    return out;
  }

  /// Receding-horizon warm start: shift the trajectory one sample forward and
  /// repeat the last slack and dual entries.
  DeepcWarmStart shifted(const DeepcSolution& sol) const {
    DeepcWarmStart w;
    w.g = Eigen::VectorXd::Zero(N_g_);
    if (N_g_ > 1) w.g.tail(N_g_ - 1) = sol.g.head(N_g_ - 1);
    w.g(0) = sol.g(0);
    const int T_f = s_.T_f;
    w.rho = sol.rho;
    for (int k = 0; k + 1 < T_f; ++k) w.rho.col(k) = sol.rho.col(k + 1);
    w.duals_in = sol.qp.duals_in;
    if (w.duals_in.size() == A_in_rows_) {
      const Eigen::Index nbnd = static_cast<Eigen::Index>(s_.bounds.size());
      for (Eigen::Index j = 0; j < nbnd; ++j) {
        for (int k = 0; k + 1 < T_f; ++k) {
          const Eigen::Index r = 2 * (j * T_f + k);
          w.duals_in(r) = sol.qp.duals_in(r + 2);
          w.duals_in(r + 1) = sol.qp.duals_in(r + 3);
        }
      }
      const Eigen::Index base = 2 * nbnd * T_f;
      for (int sidx = 0; sidx < s_.soft_count(); ++sidx) {
        for (int k = 0; k + 1 < T_f; ++k) {
          w.duals_in(base + sidx * T_f + k) = sol.qp.duals_in(base + sidx * T_f + k + 1);
        }
      }
    }
    return w;
  }

 private:
  void check_data(const DeepcStepData& d) const {
    const int T_f = s_.T_f;
    const Eigen::Index nbnd = static_cast<Eigen::Index>(s_.bounds.size());
    require(d.u_ini.rows() == s_.m && d.u_ini.cols() == s_.T_ini && d.y_ini.rows() == s_.p &&
                d.y_ini.cols() == s_.T_ini,
            ErrorKind::DimensionMismatch, "u_ini/y_ini must cover T_ini samples");
    require(d.pinned.rows() == static_cast<Eigen::Index>(s_.pinned_inputs.size()) &&
                (d.pinned.rows() == 0 || d.pinned.cols() == T_f),
            ErrorKind::DimensionMismatch, "pinned inputs must cover T_f samples");
    require(d.lo.rows() == nbnd && d.hi.rows() == nbnd && (nbnd == 0 || (d.lo.cols() == T_f && d.hi.cols() == T_f)),
            ErrorKind::DimensionMismatch, "bound data must be bounds x T_f");
    require(d.targets.rows() == static_cast<Eigen::Index>(s_.costs.size()) &&
                (s_.costs.empty() || d.targets.cols() == T_f),
            ErrorKind::DimensionMismatch, "cost targets must be costs x T_f");
  }

  Eigen::VectorXd equality_rhs(const DeepcStepData& d) const {
    const int T_f = s_.T_f;
    Eigen::VectorXd e(E_.rows());
    Eigen::Index r = 0;
    e.segment(r, s_.m * s_.T_ini) = Eigen::Map<const Eigen::VectorXd>(d.u_ini.data(), s_.m * s_.T_ini);
    r += s_.m * s_.T_ini;
    e.segment(r, s_.p * s_.T_ini) = Eigen::Map<const Eigen::VectorXd>(d.y_ini.data(), s_.p * s_.T_ini);
    r += s_.p * s_.T_ini;
    for (int k = 0; k < T_f; ++k) {
      for (size_t c = 0; c < s_.pinned_inputs.size(); ++c) e(r++) = d.pinned(c, k);
    }
    for (size_t q = 0; q < s_.equalities.size(); ++q) {
      for (int k = 0; k < T_f; ++k) e(r++) = 0.0;
    }
    return e;
  }

  void reduce_columns(const HankelBlocks& blocks) {
    const Eigen::MatrixXd M = blocks.stacked();
    qr_ = std::make_shared<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>>(M.rows(), M.cols());
    qr_->setThreshold(1e-12);
    qr_->compute(M.transpose());
    const Eigen::Index r = qr_->rank();
    const Eigen::MatrixXd R =
        qr_->matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    K_ = qr_->colsPermutation() * R.transpose();
    const Eigen::Index up = s_.m * s_.T_ini, yp = s_.p * s_.T_ini, uf = s_.m * s_.T_f;
    Kp_ = K_.topRows(up + yp);
    Kuf_ = K_.middleRows(up + yp, uf);
    Kyf_ = K_.bottomRows(s_.p * s_.T_f);
  }

  void build_affine_map() {
    const int T_f = s_.T_f;
    const Eigen::Index r = K_.cols();
    const Eigen::Index n_pin = static_cast<Eigen::Index>(s_.pinned_inputs.size());
    const Eigen::Index n_e = Kp_.rows() + (n_pin + static_cast<Eigen::Index>(s_.equalities.size())) * T_f;
    E_.resize(n_e, r);
    Eigen::Index row = 0;
    E_.topRows(Kp_.rows()) = Kp_;
    row += Kp_.rows();
    for (int k = 0; k < T_f; ++k) {
      for (int c : s_.pinned_inputs) E_.row(row++) = Kuf_.row(k * s_.m + c);
    }
    for (const auto& q : s_.equalities) {
      for (int k = 0; k < T_f; ++k) E_.row(row++) = stage_row(q, k);
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(E_, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int re = numerical_rank(sv, s_.equality_rank_tol);
    const Eigen::MatrixXd& V = svd.matrixV();
    E_pinv_ = V.leftCols(re) * sv.head(re).cwiseInverse().asDiagonal() *
              svd.matrixU().leftCols(re).transpose();
    N_ = V.rightCols(r - re);
    equality_rank_ = re;
  }

  Eigen::RowVectorXd stage_row(const StageForm& f, int k) const {
    return f.cu.transpose() * Kuf_.middleRows(k * s_.m, s_.m) +
           f.cy.transpose() * Kyf_.middleRows(k * s_.p, s_.p);
  }

  Eigen::MatrixXd phi(const StageForm& f) const {
    const Eigen::MatrixXd Wu = Kuf_ * N_;
    const Eigen::MatrixXd Wy = Kyf_ * N_;
    Eigen::MatrixXd P(s_.T_f, N_.cols());
    for (int k = 0; k < s_.T_f; ++k) {
      P.row(k) = f.cu.transpose() * Wu.middleRows(k * s_.m, s_.m) +
                 f.cy.transpose() * Wy.middleRows(k * s_.p, s_.p);
    }
    return P;
  }

  void build_qp(const QpSettings& settings) {
    const int T_f = s_.T_f;
    const Eigen::Index nb = N_.cols();
    const int ns = s_.soft_count();
    const Eigen::Index nx = nb + ns * T_f;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nx, nx);
    H.topLeftCorner(nb, nb).diagonal().setConstant(2.0 * s_.lambda_g);
    for (const auto& c : s_.costs) {
      cost_phi_.push_back(phi(c.form));
      H.topLeftCorner(nb, nb).noalias() += 2.0 * c.weight * cost_phi_.back().transpose() * cost_phi_.back();
    }
    if (ns > 0) H.bottomRightCorner(ns * T_f, ns * T_f).diagonal().setConstant(2.0 * s_.lambda_rho);
    H = 0.5 * (H + H.transpose()).eval();

    const Eigen::Index nbnd = static_cast<Eigen::Index>(s_.bounds.size());
    A_in_rows_ = 2 * nbnd * T_f + ns * T_f;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(A_in_rows_, nx);
    int sidx = 0;
    for (Eigen::Index j = 0; j < nbnd; ++j) {
      const Eigen::MatrixXd P = phi(s_.bounds[j].form);
      for (int k = 0; k < T_f; ++k) {
        const Eigen::Index r = 2 * (j * T_f + k);
        A.row(r).head(nb) = P.row(k);
        A.row(r + 1).head(nb) = -P.row(k);
        if (s_.bounds[j].soft) {
          A(r, nb + sidx * T_f + k) = -1.0;
          A(r + 1, nb + sidx * T_f + k) = -1.0;
        }
      }
      if (s_.bounds[j].soft) ++sidx;
    }
    for (int i = 0; i < ns * T_f; ++i) A(2 * nbnd * T_f + i, nb + i) = -1.0;
    solver_ = std::make_shared<QpSolver>(H, Eigen::MatrixXd(0, nx), A, settings);
  }

  DeepcStructure s_;
  int N_g_ = 0;
  std::shared_ptr<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> qr_;
  Eigen::MatrixXd K_, Kp_, Kuf_, Kyf_;
  Eigen::MatrixXd E_, E_pinv_, N_;
  int equality_rank_ = 0;
  std::vector<Eigen::MatrixXd> cost_phi_;
  Eigen::Index A_in_rows_ = 0;
  std::shared_ptr<QpSolver> solver_;
};

}  // namespace hubdeepc
