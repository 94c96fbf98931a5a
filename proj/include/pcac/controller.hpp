#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pcac/qp.hpp"
#include "pcac/types.hpp"

namespace pcac {

using Mat4 = Eigen::Matrix4d;

/// Receding-horizon settings. Input and move bounds apply to the deviation
/// from the gravity feedforward, not to the physical thrust.
struct PcacConfig {
  int horizon = 10;
  Mat12 stage_weight = Mat12::Identity();     // Q_i, i < horizon
  Mat12 terminal_weight = Mat12::Identity();  // Q_horizon
  Mat4 move_weight = Mat4::Identity();        // R, on successive input differences
  Eigen::MatrixXd slack_weight;               // S, one row/column per slack
  // Soft output constraints C y + D <= eps[slack_index[row]].
  Eigen::MatrixXd constraint_matrix;
  Eigen::VectorXd constraint_offset;
  std::vector<int> slack_index;
  Vec4 u_min = Vec4::Constant(-1.0);
  Vec4 u_max = Vec4::Constant(1.0);
  Vec4 du_min = Vec4::Constant(-1.0);
  Vec4 du_max = Vec4::Constant(1.0);
  double gravity_feedforward = 0.0;  // added to the first input component

  int num_constraint_rows() const { return static_cast<int>(constraint_offset.size()); }
  int num_slacks() const { return static_cast<int>(slack_weight.rows()); }

  /// Symmetric Euler-angle limits |xi_j| <= limit_j as two rows per angle
  /// sharing one slack each.
  void set_angle_limits(const Vec3& limit);

  void validate() const;
};

/// Stacked prediction Y = Gamma y1 + T U over the horizon.
struct Prediction {
  Eigen::MatrixXd gamma;     // [I; Ad; ...; Ad^(l-1)], 12l x 12
  Eigen::MatrixXd toeplitz;  // strictly lower block Toeplitz of Ad^(i-1) Bd, 12l x 4l
  Vec12 first_output;        // y_{1|k} = Ad y_k + Bd u_k
  int horizon = 0;

  /// Gamma * first_output, the prediction with U = 0.
  Eigen::VectorXd free_response() const { return gamma * first_output; }
};

/// Caches Gamma and the powers of Ad for a fixed Ad and horizon.
class PredictionModel {
 public:
  PredictionModel(const Mat12& ad, int horizon);

  Prediction build(const Mat12x4& bd, const Vec12& y, const InputVector& u_k) const;

  const Eigen::MatrixXd& gamma() const { return gamma_; }
  int horizon() const { return horizon_; }

 private:
  Mat12 ad_;
  int horizon_;
  Eigen::MatrixXd gamma_;
  std::vector<Mat12> powers_;
};

Prediction build_prediction(const Mat12& ad, const Mat12x4& bd, const Vec12& y, const InputVector& u_k,
                            int horizon);

/// Dense QP in w = [U; eps_1; ...; eps_l]. `reference` stacks r_1..r_l (12l).
QpProblem encode_qp(const Prediction& prediction, const Eigen::VectorXd& reference, const PcacConfig& config,
                    const InputVector& u_k);

struct ControlResult {
  InputVector deviation;  // u_{1|k}
  InputVector applied;    // deviation + gravity feedforward on thrust
  QpSolution qp;
  double slack_max = 0.0;
};

/// Predictive controller driven by the identified input matrix.
class PcacController {
 public:
  PcacController(PcacConfig config, const Mat12& ad);

  /// Solves the horizon problem for measurement `y` and returns the first
  /// move. The move becomes the new anchor for the move constraints. Throws
  /// ControllerFault unless the QP reports solved.
  ControlResult compute(const Vec12& y, const Eigen::VectorXd& reference, const ThetaVector& theta);

  /// Deviation input the next computation is anchored to (u_k).
  const InputVector& last_deviation() const { return last_deviation_; }
  void set_gravity_feedforward(double value) { config_.gravity_feedforward = value; }
  const PcacConfig& config() const { return config_; }
  const PredictionModel& prediction_model() const { return model_; }

 private:
  Eigen::VectorXd warm_start(const Prediction& prediction) const;

  PcacConfig config_;
  PredictionModel model_;
  InputVector last_deviation_ = InputVector::Zero();
  std::optional<Eigen::VectorXd> previous_inputs_;
};

}  // namespace pcac
