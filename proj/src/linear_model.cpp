#include "pcac/linear_model.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pcac/error.hpp"

namespace pcac {

namespace si = state_index;

ContinuousModel build_continuous(const VehicleParams& params) {
  params.validate();
  ContinuousModel m;
  m.a.setZero();
  m.b.setZero();

  // Position rates are the velocities.
  m.a.block<3, 3>(si::kPosition, si::kVelocity).setIdentity();
  // Euler rates at hover: psi_dot = w3, phi_dot = w1, theta_dot = w2.
  m.a(si::kEuler + 0, si::kRate + 2) = 1.0;
  m.a(si::kEuler + 1, si::kRate + 0) = 1.0;
  m.a(si::kEuler + 2, si::kRate + 1) = 1.0;
  // Tilt couples thrust into horizontal acceleration.
  m.a(si::kVelocity + 0, si::kEuler + 2) = -params.gravity;
  m.a(si::kVelocity + 1, si::kEuler + 1) = params.gravity;

  m.b(si::kVelocity + 2, 0) = 1.0 / params.mass;
  for (int i = 0; i < 3; ++i) {
    m.b(si::kRate + i, 1 + i) = 1.0 / params.inertia[i];
  }
  return m;
}

DiscreteModel discretize(const Mat12& a, const Mat12x4& b, double sample_time) {
  if (!(sample_time > 0.0) || !std::isfinite(sample_time)) {
    throw ConfigError("sample time must be positive");
  }
  const double ts = sample_time;
  const Mat12 eye = Mat12::Identity();
  const Mat12 a2 = a * a;
  const Mat12 a3 = a2 * a;

  DiscreteModel d;
  d.ad = eye + a * ts + a2 * (ts * ts / 2.0) + a3 * (ts * ts * ts / 6.0);
  const Mat12 integral = eye * ts + a * (ts * ts / 2.0) + a2 * (ts * ts * ts / 6.0) +
                         a3 * (ts * ts * ts * ts / 24.0);
  d.bd = integral * b;
  return d;
}

LinearHoverModel make_hover_model(const VehicleParams& params, double sample_time) {
  const ContinuousModel c = build_continuous(params);
  const DiscreteModel d = discretize(c.a, c.b, sample_time);
  return LinearHoverModel{c.a, c.b, d.ad, d.bd, sample_time};
}

ThetaVector true_theta(const Mat12x4& bd) {
  Mat12x4 residual = bd;
  ThetaVector theta;
  for (int k = 0; k < kThetaDim; ++k) {
    const auto [row, col] = kInputTemplate[k];
    theta[k] = bd(row - 1, col - 1);
    residual(row - 1, col - 1) = 0.0;
  }
  Eigen::Index r = 0, c = 0;
  const double worst = residual.cwiseAbs().maxCoeff(&r, &c);
  if (!(worst <= kTemplateTolerance)) {
    throw TemplateError("Bd has off-template entry " + std::to_string(worst) + " at (" +
                        std::to_string(r + 1) + ", " + std::to_string(c + 1) + ")");
  }
  return theta;
}

Mat12x4 assemble_bd(const ThetaVector& theta) {
  Mat12x4 bd = Mat12x4::Zero();
  for (int k = 0; k < kThetaDim; ++k) {
    bd(kInputTemplate[k].row - 1, kInputTemplate[k].column - 1) = theta[k];
  }
  return bd;
}

Vec12 regressor_diagonal(const InputVector& u) {
  Vec12 d;
  for (int k = 0; k < kThetaDim; ++k) {
    d[k] = u[kInputTemplate[k].column - 1];
  }
  return d;
}

Mat12 regressor(const InputVector& u) {
  return regressor_diagonal(u).asDiagonal();
}

int controllability_rank(const Mat12& a, const Mat12x4& b) {
  Eigen::Matrix<double, 12, 48> ctrb;
  Mat12x4 block = b;
  for (int i = 0; i < 12; ++i) {
    ctrb.middleCols<4>(4 * i) = block;
    block = a * block;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ctrb);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

}  // namespace pcac
