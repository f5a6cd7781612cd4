#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include <json.hpp>

#include "hubdeepc/error.hpp"

namespace hubdeepc {

struct SignalDims {
  int m = 1;        // input channels
  int p = 1;        // output channels
  int n_bound = 0;  // assumed upper bound on the plant order

  void validate() const {
    require(m >= 1 && p >= 1 && n_bound >= 0, ErrorKind::DimensionMismatch,
            "SignalDims requires m >= 1, p >= 1, n_bound >= 0");
  }
};

/// Input/output record of a plant. Samples are stored column-wise, one
/// column per time step, so a Hankel window is a contiguous block of columns.
struct Trajectory {
  Eigen::MatrixXd inputs;   // m x T_d
  Eigen::MatrixXd outputs;  // p x T_d
  double sample_time = 1.0; // h

  Trajectory() = default;
  Trajectory(Eigen::MatrixXd u, Eigen::MatrixXd y, double ts = 1.0)
      : inputs(std::move(u)), outputs(std::move(y)), sample_time(ts) {
    validate();
  }

  int length() const { return static_cast<int>(inputs.cols()); }
  int input_dim() const { return static_cast<int>(inputs.rows()); }
  int output_dim() const { return static_cast<int>(outputs.rows()); }

  void validate() const {
    require(inputs.cols() == outputs.cols(), ErrorKind::DimensionMismatch,
            "inputs and outputs must have equal length");
    require(inputs.cols() >= 1, ErrorKind::DimensionMismatch,
            "trajectory must hold at least one sample");
    require(inputs.rows() >= 1 && outputs.rows() >= 1,
            ErrorKind::DimensionMismatch, "trajectory needs m >= 1, p >= 1");
    require(sample_time > 0.0, ErrorKind::DimensionMismatch,
            "sample time must be positive");
  }

  /// Append one sample (u_t, y_t).
  void push_back(const Eigen::Ref<const Eigen::VectorXd>& u,
                 const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (inputs.size() == 0 && outputs.size() == 0) {
      inputs.resize(u.size(), 0);
      outputs.resize(y.size(), 0);
    }
    require(u.size() == inputs.rows() && y.size() == outputs.rows(),
            ErrorKind::DimensionMismatch, "sample dimension mismatch");
    inputs.conservativeResize(Eigen::NoChange, inputs.cols() + 1);
    outputs.conservativeResize(Eigen::NoChange, outputs.cols() + 1);
    inputs.col(inputs.cols() - 1) = u;
    outputs.col(outputs.cols() - 1) = y;
  }
};

/// Data predictor blocks. Row blocks are time-major: block t of U_p holds the
/// full input vector at window offset t.
struct HankelBlocks {
  Eigen::MatrixXd U_p, Y_p, U_f, Y_f;
  int T_ini = 0;
  int T_f = 0;

  int columns() const { return static_cast<int>(U_p.cols()); }
  int input_dim() const { return T_ini > 0 ? static_cast<int>(U_p.rows()) / T_ini : 0; }
  int output_dim() const { return T_ini > 0 ? static_cast<int>(Y_p.rows()) / T_ini : 0; }

  /// (U_p; Y_p; U_f; Y_f) stacked in that order.
  Eigen::MatrixXd stacked() const {
    Eigen::MatrixXd out(U_p.rows() + Y_p.rows() + U_f.rows() + Y_f.rows(),
                        U_p.cols());
    out << U_p, Y_p, U_f, Y_f;
    return out;
  }
};

/// Block-Hankel matrix of depth L built from a channels x T_d signal.
inline Eigen::MatrixXd build_hankel(const Eigen::Ref<const Eigen::MatrixXd>& signal,
                                    int L) {
  const int m = static_cast<int>(signal.rows());
  const int T = static_cast<int>(signal.cols());
  require(L >= 1, ErrorKind::WindowTooLong, "window length must be >= 1");
  require(L <= T, ErrorKind::WindowTooLong,
          "window length " + std::to_string(L) + " exceeds signal length " +
              std::to_string(T));
  const int cols = T - L + 1;
  Eigen::MatrixXd H(static_cast<Eigen::Index>(L) * m, cols);
  for (int t = 0; t < L; ++t) {
    H.middleRows(static_cast<Eigen::Index>(t) * m, m) = signal.middleCols(t, cols);
  }
  return H;
}

/// Relative singular-value cutoff used to decide numerical rank.
inline constexpr double kRankTolerance = 1e-9;

inline Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& M) {
  if (M.size() == 0) return Eigen::VectorXd();
  // The wide orientation keeps the divide-and-conquer SVD cheap.
  if (M.rows() > M.cols()) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M.transpose());
    return svd.singularValues();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues();
}

inline int numerical_rank(const Eigen::VectorXd& sv, double rel_tol = kRankTolerance) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) / sv(0) >= rel_tol) ++r;
  }
  return r;
}

struct ExcitationReport {
  bool exciting = false;
  int rank = 0;
  int required_rank = 0;
  /// T_d - ((m+1)(L+n_bound) - 1); negative means the length bound fails.
  long length_slack = 0;
  double sigma_ratio = 0.0;  // sigma_min / sigma_max of H_L(u)
};

/// Persistency of excitation of order L: H_L(u) has full row rank L*m and the
/// record is at least (m+1)(L+n_bound)-1 samples long.
inline ExcitationReport check_persistent_excitation(
    const Eigen::Ref<const Eigen::MatrixXd>& signal, int L, const SignalDims& dims) {
  ExcitationReport report;
  const long T = static_cast<long>(signal.cols());
  const long m = static_cast<long>(signal.rows());
  report.required_rank = static_cast<int>(L * m);
  report.length_slack = T - ((m + 1) * (L + dims.n_bound) - 1);
  if (L < 1 || L > T) return report;
  const Eigen::MatrixXd H = build_hankel(signal, L);
  const Eigen::VectorXd sv = singular_values(H);
  report.rank = numerical_rank(sv);
  const long full = std::min<long>(H.rows(), H.cols());
  if (sv.size() > 0 && sv(0) > 0.0) {
    report.sigma_ratio = H.rows() <= H.cols() ? sv(sv.size() - 1) / sv(0) : 0.0;
  }
  report.exciting = report.rank == report.required_rank &&
                    full == report.required_rank && report.length_slack >= 0;
  return report;
}

inline HankelBlocks partition_hankel(const Trajectory& data, int T_ini, int T_f) {
  data.validate();
  require(T_ini >= 1 && T_f >= 1, ErrorKind::WindowTooLong,
          "T_ini and T_f must be >= 1");
  const int L = T_ini + T_f;
  const Eigen::MatrixXd Hu = build_hankel(data.inputs, L);
  const Eigen::MatrixXd Hy = build_hankel(data.outputs, L);
  const Eigen::Index m = data.input_dim();
  const Eigen::Index p = data.output_dim();
  HankelBlocks blocks;
  blocks.T_ini = T_ini;
  blocks.T_f = T_f;
  blocks.U_p = Hu.topRows(T_ini * m);
  blocks.U_f = Hu.bottomRows(T_f * m);
  blocks.Y_p = Hy.topRows(T_ini * p);
  blocks.Y_f = Hy.bottomRows(T_f * p);
  return blocks;
}

// --- CSV import/export -------------------------------------------------------

struct ChannelInfo {
  std::string name;
  std::string unit;
};

struct TrajectoryMetadata {
  std::vector<ChannelInfo> inputs;
  std::vector<ChannelInfo> outputs;
  double sample_time = 1.0;
  std::string note;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 const TrajectoryMetadata* meta = nullptr) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + path);
  out << "t";
  for (int i = 0; i < traj.input_dim(); ++i) out << ",u_" << i + 1;
  for (int i = 0; i < traj.output_dim(); ++i) out << ",y_" << i + 1;
  out << '\n';
  for (int t = 0; t < traj.length(); ++t) {
    out << format_double(t * traj.sample_time);
    for (int i = 0; i < traj.input_dim(); ++i) out << ',' << format_double(traj.inputs(i, t));
    for (int i = 0; i < traj.output_dim(); ++i) out << ',' << format_double(traj.outputs(i, t));
    out << '\n';
  }
  if (meta == nullptr) return;
  nlohmann::json j;
  j["sample_time_h"] = traj.sample_time;
  j["length"] = traj.length();
  for (const auto& c : meta->inputs) j["inputs"].push_back({{"name", c.name}, {"unit", c.unit}});
  for (const auto& c : meta->outputs) j["outputs"].push_back({{"name", c.name}, {"unit", c.unit}});
  if (!meta->note.empty()) j["note"] = meta->note;
  std::ofstream side(path + ".meta.json");
  require(static_cast<bool>(side), ErrorKind::Io, "cannot open " + path + ".meta.json");
  side << j.dump(2) << '\n';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

inline Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io, "empty file " + path);
  const auto header = split_csv_line(line);
  require(!header.empty() && header[0] == "t", ErrorKind::Io, "bad trajectory header");
  int m = 0, p = 0;
  for (size_t i = 1; i < header.size(); ++i) {
    if (header[i].rfind("u_", 0) == 0) {
      require(p == 0, ErrorKind::Io, "inputs must precede outputs");
      ++m;
    } else if (header[i].rfind("y_", 0) == 0) {
      ++p;
    } else {
      throw Error(ErrorKind::Io, "unexpected column " + header[i]);
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    require(static_cast<int>(cells.size()) == 1 + m + p, ErrorKind::Io, "ragged row");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(std::stod(c));
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::Io, "no samples in " + path);
  const int T = static_cast<int>(rows.size());
  Eigen::MatrixXd u(m, T), y(p, T);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < m; ++i) u(i, t) = rows[t][1 + i];
    for (int i = 0; i < p; ++i) y(i, t) = rows[t][1 + m + i];
  }
  const double ts = T > 1 ? rows[1][0] - rows[0][0] : 1.0;
  return Trajectory(std::move(u), std::move(y), ts > 0 ? ts : 1.0);
}

}  // namespace hubdeepc
