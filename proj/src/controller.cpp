#include "pcac/controller.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pcac/error.hpp"
#include "pcac/linear_model.hpp"

namespace pcac {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void PcacConfig::set_angle_limits(const Vec3& limit) {
  constraint_matrix = MatrixXd::Zero(6, kStateDim);
  constraint_offset = VectorXd::Zero(6);
  slack_index.assign(6, 0);
  for (int j = 0; j < 3; ++j) {
    constraint_matrix(2 * j, state_index::kEuler + j) = 1.0;
    constraint_matrix(2 * j + 1, state_index::kEuler + j) = -1.0;
    constraint_offset[2 * j] = -limit[j];
    constraint_offset[2 * j + 1] = -limit[j];
    slack_index[2 * j] = j;
    slack_index[2 * j + 1] = j;
  }
}

namespace {

bool positive_definite(const MatrixXd& m) {
  return Eigen::LLT<MatrixXd>(m).info() == Eigen::Success;
}

bool positive_semidefinite(const MatrixXd& m) {
  if (m.size() == 0) return true;
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
  return eig.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

}  // namespace

void PcacConfig::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (!positive_definite(stage_weight)) throw ConfigError("stage weight must be positive definite");
  if (!positive_definite(terminal_weight)) throw ConfigError("terminal weight must be positive definite");
  if (!positive_semidefinite(move_weight)) throw ConfigError("move weight must be positive semidefinite");
  if (slack_weight.rows() != slack_weight.cols()) throw ConfigError("slack weight must be square");
  if (!positive_semidefinite(slack_weight)) throw ConfigError("slack weight must be positive semidefinite");
  const Index rows = constraint_offset.size();
  if (constraint_matrix.rows() != rows || (rows > 0 && constraint_matrix.cols() != kStateDim)) {
    throw ConfigError("constraint matrix must be n_c x 12 with n_c = length of the offset");
  }
  if (static_cast<Index>(slack_index.size()) != rows) {
    throw ConfigError("every constraint row needs a slack index");
  }
  for (int s : slack_index) {
    if (s < 0 || s >= num_slacks()) throw ConfigError("slack index out of range");
  }
  if ((u_min.array() > u_max.array()).any()) throw ConfigError("u_min must not exceed u_max");
  if ((du_min.array() > du_max.array()).any()) throw ConfigError("du_min must not exceed du_max");
  // The zero deviation has to be admissible so a feasible warm start always exists.
  if ((u_min.array() > 0.0).any() || (u_max.array() < 0.0).any()) {
    throw ConfigError("input bounds must contain zero deviation");
  }
  if ((du_min.array() > 0.0).any() || (du_max.array() < 0.0).any()) {
    throw ConfigError("move bounds must contain zero");
  }
}

PredictionModel::PredictionModel(const Mat12& ad, int horizon) : ad_(ad), horizon_(horizon) {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  powers_.reserve(static_cast<std::size_t>(horizon));
  powers_.push_back(Mat12::Identity());
  for (int i = 1; i < horizon; ++i) powers_.push_back(ad_ * powers_.back());
  gamma_.resize(kStateDim * horizon, kStateDim);
  for (int i = 0; i < horizon; ++i) gamma_.middleRows<kStateDim>(kStateDim * i) = powers_[static_cast<std::size_t>(i)];
}

Prediction PredictionModel::build(const Mat12x4& bd, const Vec12& y, const InputVector& u_k) const {
  const int l = horizon_;
  Prediction p;
  p.horizon = l;
  p.gamma = gamma_;
  p.first_output = ad_ * y + bd * u_k;
  p.toeplitz = MatrixXd::Zero(kStateDim * l, kInputDim * l);
  // Markov blocks H_i = Ad^(i-1) Bd, placed on the i-th subdiagonal.
  for (int i = 1; i < l; ++i) {
    const Mat12x4 markov = powers_[static_cast<std::size_t>(i - 1)] * bd;
    for (int row = i; row < l; ++row) {
      p.toeplitz.block<kStateDim, kInputDim>(kStateDim * row, kInputDim * (row - i)) = markov;
    }
  }
  return p;
}

Prediction build_prediction(const Mat12& ad, const Mat12x4& bd, const Vec12& y, const InputVector& u_k,
                            int horizon) {
  return PredictionModel(ad, horizon).build(bd, y, u_k);
}

QpProblem encode_qp(const Prediction& prediction, const VectorXd& reference, const PcacConfig& config,
                    const InputVector& u_k) {
  const int l = prediction.horizon;
  if (l != config.horizon) throw ConfigError("prediction horizon does not match the controller config");
  if (reference.size() != kStateDim * l) {
    throw ConfigError("reference must stack " + std::to_string(l) + " 12-vectors");
  }
  const int nu = kInputDim * l;
  const int ns = config.num_slacks();
  const int ne = ns * l;
  const int nc = config.num_constraint_rows();
  const int n = nu + ne;

  MatrixXd q_bar = MatrixXd::Zero(kStateDim * l, kStateDim * l);
  MatrixXd r_bar = MatrixXd::Zero(nu, nu);
  MatrixXd diff = MatrixXd::Identity(nu, nu);  // Delta U = diff * U - e
  for (int i = 0; i < l; ++i) {
    q_bar.block<kStateDim, kStateDim>(kStateDim * i, kStateDim * i) =
        (i == l - 1) ? config.terminal_weight : config.stage_weight;
    r_bar.block<kInputDim, kInputDim>(kInputDim * i, kInputDim * i) = config.move_weight;
    if (i > 0) diff.block<kInputDim, kInputDim>(kInputDim * i, kInputDim * (i - 1)) = -Mat4::Identity();
  }
  VectorXd e = VectorXd::Zero(nu);
  e.head<kInputDim>() = u_k;

  const MatrixXd& t = prediction.toeplitz;
  const VectorXd free = prediction.free_response();
  const VectorXd offset = free - reference;

  QpProblem qp;
  qp.hessian = MatrixXd::Zero(n, n);
  qp.linear = VectorXd::Zero(n);
  const MatrixXd qt = q_bar * t;
  const MatrixXd rd = r_bar * diff;
  qp.hessian.topLeftCorner(nu, nu) = 2.0 * (t.transpose() * qt + diff.transpose() * rd);
  for (int i = 0; i < l; ++i) {
    qp.hessian.block(nu + ns * i, nu + ns * i, ns, ns) = 2.0 * config.slack_weight;
  }
  qp.hessian = 0.5 * (qp.hessian + qp.hessian.transpose()).eval();
  qp.linear.head(nu) = 2.0 * (qt.transpose() * offset - rd.transpose() * e);
  qp.constant = offset.dot(q_bar * offset) + e.dot(r_bar * e);

  const int m = 4 * nu + nc * l + ne;
  qp.constraint_matrix = MatrixXd::Zero(m, n);
  qp.constraint_bound = VectorXd::Zero(m);
  int row = 0;
  for (int i = 0; i < l; ++i) {
    qp.constraint_matrix.block<kInputDim, kInputDim>(row, kInputDim * i).setIdentity();
    qp.constraint_bound.segment<kInputDim>(row) = config.u_max;
    row += kInputDim;
    qp.constraint_matrix.block<kInputDim, kInputDim>(row, kInputDim * i) = -Mat4::Identity();
    qp.constraint_bound.segment<kInputDim>(row) = -config.u_min;
    row += kInputDim;
  }
  for (int i = 0; i < l; ++i) {
    const auto d_rows = diff.middleRows<kInputDim>(kInputDim * i);
    const Vec4 anchor = e.segment<kInputDim>(kInputDim * i);
    qp.constraint_matrix.block(row, 0, kInputDim, nu) = d_rows;
    qp.constraint_bound.segment<kInputDim>(row) = config.du_max + anchor;
    row += kInputDim;
    qp.constraint_matrix.block(row, 0, kInputDim, nu) = -d_rows;
    qp.constraint_bound.segment<kInputDim>(row) = -config.du_min - anchor;
    row += kInputDim;
  }
  for (int i = 0; i < l; ++i) {
    const auto t_rows = t.middleRows<kStateDim>(kStateDim * i);
    const Vec12 free_i = free.segment<kStateDim>(kStateDim * i);
    for (int r = 0; r < nc; ++r) {
      qp.constraint_matrix.row(row).head(nu) = config.constraint_matrix.row(r) * t_rows;
      qp.constraint_matrix(row, nu + ns * i + config.slack_index[static_cast<std::size_t>(r)]) = -1.0;
      qp.constraint_bound[row] = -config.constraint_offset[r] - config.constraint_matrix.row(r).dot(free_i);
      ++row;
    }
  }
  for (int j = 0; j < ne; ++j) {
    qp.constraint_matrix(row, nu + j) = -1.0;
    ++row;
  }
  return qp;
}

PcacController::PcacController(PcacConfig config, const Mat12& ad)
    : config_(std::move(config)), model_(ad, config_.horizon) {
  config_.validate();
}

VectorXd PcacController::warm_start(const Prediction& prediction) const {
  const int l = config_.horizon;
  const int nu = kInputDim * l;
  const int ns = config_.num_slacks();
  VectorXd w = VectorXd::Zero(nu + ns * l);

  // Shift the previous plan by one step and repeat its last move.
  VectorXd plan = VectorXd::Zero(nu);
  if (previous_inputs_) {
    const VectorXd& prev = *previous_inputs_;
    plan.head(nu - kInputDim) = prev.tail(nu - kInputDim);
    plan.tail<kInputDim>() = prev.tail<kInputDim>();
  } else {
    for (int i = 0; i < l; ++i) plan.segment<kInputDim>(kInputDim * i) = last_deviation_;
  }
  // Project onto the box and move bounds stage by stage; zero moves keep this nonempty.
  InputVector anchor = last_deviation_;
  for (int i = 0; i < l; ++i) {
    const Vec4 lo = config_.u_min.cwiseMax(anchor + config_.du_min);
    const Vec4 hi = config_.u_max.cwiseMin(anchor + config_.du_max);
    const Vec4 u = plan.segment<kInputDim>(kInputDim * i).cwiseMax(lo).cwiseMin(hi);
    w.segment<kInputDim>(kInputDim * i) = u;
    anchor = u;
  }
  // Smallest slacks that make the soft constraints hold for this plan.
  const VectorXd outputs = prediction.free_response() + prediction.toeplitz * w.head(nu);
  for (int i = 0; i < l; ++i) {
    const Vec12 y_i = outputs.segment<kStateDim>(kStateDim * i);
    for (int r = 0; r < config_.num_constraint_rows(); ++r) {
      const double excess = config_.constraint_matrix.row(r).dot(y_i) + config_.constraint_offset[r];
      double& slack = w[nu + ns * i + config_.slack_index[static_cast<std::size_t>(r)]];
      slack = std::max(slack, excess);
    }
  }
  return w;
}

ControlResult PcacController::compute(const Vec12& y, const VectorXd& reference, const ThetaVector& theta) {
  const Prediction prediction = model_.build(assemble_bd(theta), y, last_deviation_);
  QpProblem qp = encode_qp(prediction, reference, config_, last_deviation_);
  qp.warm_start = warm_start(prediction);

  ControlResult result;
  result.qp = solve_qp(qp);
  if (result.qp.status != QpStatus::kSolved) {
    throw ControllerFault("PCAC QP not solved: " + std::string(to_string(result.qp.status)) + " after " +
                          std::to_string(result.qp.iterations) + " iterations");
  }
  const int nu = kInputDim * config_.horizon;
  // Clip round-off so the applied move satisfies the bounds exactly.
  const Vec4 lo = config_.u_min.cwiseMax(last_deviation_ + config_.du_min);
  const Vec4 hi = config_.u_max.cwiseMin(last_deviation_ + config_.du_max);
  result.deviation = result.qp.w.head<kInputDim>().cwiseMax(lo).cwiseMin(hi);
  result.applied = result.deviation;
  result.applied[0] += config_.gravity_feedforward;
  const Index ne = result.qp.w.size() - nu;
  result.slack_max = ne > 0 ? std::max(0.0, result.qp.w.tail(ne).maxCoeff()) : 0.0;

  previous_inputs_ = result.qp.w.head(nu);
  last_deviation_ = result.deviation;
  return result;
}

}  // namespace pcac
