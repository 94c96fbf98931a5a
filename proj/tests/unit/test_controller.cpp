#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "pcac/controller.hpp"
#include "pcac/error.hpp"
#include "pcac/linear_model.hpp"

namespace pcac {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Vec12 random_vec12(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec12 v;
  for (int i = 0; i < 12; ++i) v[i] = normal(rng);
  return v;
}

PcacConfig default_config(int horizon) {
  PcacConfig c;
  c.horizon = horizon;
  c.terminal_weight = 10.0 * Mat12::Identity();
  c.slack_weight = 1e3 * MatrixXd::Identity(3, 3);
  c.set_angle_limits(Vec3::Constant(0.5));
  c.u_min << -20, -1, -1, -1;
  c.u_max << 20, 1, 1, 1;
  c.du_min << -2, -0.1, -0.1, -0.1;
  c.du_max << 2, 0.1, 0.1, 0.1;
  return c;
}

struct Fixture {
  LinearHoverModel model = make_hover_model(VehicleParams{}, 0.1);
  ThetaVector theta = true_theta(model.bd);
};

TEST(Prediction, SingleStepHorizon) {
  Fixture f;
  const Vec12 y = Vec12::LinSpaced(-1, 1);
  const InputVector u(1, 2, 3, 4);
  const Prediction p = build_prediction(f.model.ad, f.model.bd, y, u, 1);
  EXPECT_TRUE(p.gamma.isApprox(MatrixXd::Identity(12, 12), 0.0));
  EXPECT_TRUE(p.toeplitz.isZero(0.0));
  EXPECT_LT((p.first_output - (f.model.ad * y + f.model.bd * u)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Prediction, IdentityDynamics) {
  Fixture f;
  const Prediction p = build_prediction(Mat12::Identity(), f.model.bd, Vec12::Zero(), InputVector::Zero(), 4);
  for (int r = 0; r < 4; ++r) {
    EXPECT_TRUE(p.gamma.middleRows(12 * r, 12).isApprox(MatrixXd::Identity(12, 12), 0.0));
    for (int c = 0; c < 4; ++c) {
      const MatrixXd block = p.toeplitz.block(12 * r, 4 * c, 12, 4);
      if (c < r) {
        EXPECT_TRUE(block.isApprox(MatrixXd(f.model.bd), 0.0));
      } else {
        EXPECT_TRUE(block.isZero(0.0));
      }
    }
  }
}

TEST(Prediction, MatchesStepByStepRecursion) {
  Fixture f;
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int l = 1 + trial % 12;
    Mat12x4 bd = f.model.bd;
    bd = assemble_bd(random_vec12(rng));
    const Vec12 y = random_vec12(rng);
    const InputVector uk = random_vec12(rng).head<4>();
    VectorXd u(4 * l);
    for (int i = 0; i < 4 * l; ++i) u[i] = random_vec12(rng)[0];
    const Prediction p = build_prediction(f.model.ad, bd, y, uk, l);
    const VectorXd stacked = p.gamma * p.first_output + p.toeplitz * u;
    Vec12 yi = f.model.ad * y + bd * uk;
    for (int i = 0; i < l; ++i) {
      EXPECT_LT((stacked.segment<12>(12 * i) - yi).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + yi.norm()));
      yi = f.model.ad * yi + bd * u.segment<4>(4 * i);
    }
  }
}

TEST(Prediction, CachedModelMatchesFreeFunction) {
  Fixture f;
  const PredictionModel m(f.model.ad, 6);
  const Vec12 y = Vec12::Constant(0.2);
  const InputVector u(0.1, 0, 0, 0.3);
  const Prediction a = m.build(f.model.bd, y, u);
  const Prediction b = build_prediction(f.model.ad, f.model.bd, y, u, 6);
  EXPECT_TRUE(a.gamma == b.gamma);
  EXPECT_TRUE(a.toeplitz == b.toeplitz);
}

// Cost evaluated directly from the definitions, independent of the QP encoding.
double direct_cost(const Prediction& p, const VectorXd& reference, const PcacConfig& c, const InputVector& uk,
                   const VectorXd& w) {
  const int l = c.horizon;
  const int ns = c.num_slacks();
  const VectorXd y = p.gamma * p.first_output + p.toeplitz * w.head(4 * l);
  double cost = 0.0;
  InputVector prev = uk;
  for (int i = 0; i < l; ++i) {
    const Vec12 e = y.segment<12>(12 * i) - reference.segment<12>(12 * i);
    cost += e.dot((i == l - 1 ? c.terminal_weight : c.stage_weight) * e);
    const InputVector ui = w.segment<4>(4 * i);
    cost += (ui - prev).dot(c.move_weight * (ui - prev));
    prev = ui;
    const VectorXd eps = w.segment(4 * l + ns * i, ns);
    cost += eps.dot(c.slack_weight * eps);
  }
  return cost;
}

TEST(EncodeQp, ObjectiveMatchesDirectCost) {
  Fixture f;
  std::mt19937_64 rng(32);
  const PcacConfig c = default_config(5);
  const Prediction p = build_prediction(f.model.ad, f.model.bd, random_vec12(rng), InputVector(0.5, 0, 0.1, 0), 5);
  VectorXd ref(60);
  for (int i = 0; i < 5; ++i) ref.segment<12>(12 * i) = random_vec12(rng);
  const QpProblem qp = encode_qp(p, ref, c, InputVector(0.5, 0, 0.1, 0));
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd w(qp.num_variables());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = random_vec12(rng)[0];
    const double direct = direct_cost(p, ref, c, InputVector(0.5, 0, 0.1, 0), w);
    EXPECT_NEAR(qp_objective(qp, w), direct, 1e-9 * (1.0 + std::abs(direct)));
  }
}

TEST(EncodeQp, HessianSymmetricPositiveSemidefinite) {
  Fixture f;
  const PcacConfig c = default_config(10);
  const Prediction p = build_prediction(f.model.ad, f.model.bd, Vec12::Zero(), InputVector::Zero(), 10);
  const QpProblem qp = encode_qp(p, VectorXd::Zero(120), c, InputVector::Zero());
  EXPECT_TRUE(qp.hessian.isApprox(qp.hessian.transpose(), 0.0));
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(qp.hessian);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9 * qp.hessian.cwiseAbs().maxCoeff());
  EXPECT_EQ(qp.num_variables(), 40 + 30);
  EXPECT_EQ(qp.num_constraints(), 4 * 40 + 6 * 10 + 30);
}

TEST(EncodeQp, ZeroCostAtReference) {
  Fixture f;
  const PcacConfig c = default_config(8);
  const Prediction p = build_prediction(f.model.ad, f.model.bd, Vec12::Zero(), InputVector::Zero(), 8);
  const QpProblem qp = encode_qp(p, VectorXd::Zero(96), c, InputVector::Zero());
  EXPECT_EQ(qp.constant, 0.0);
  EXPECT_TRUE(qp.linear.isZero(0.0));
  const QpSolution s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::kSolved);
  EXPECT_LT(s.w.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(s.objective, 0.0, 1e-15);
}

TEST(EncodeQp, SlackColumnsOfSoftRows) {
  Fixture f;
  const int l = 3;
  const PcacConfig c = default_config(l);
  const Prediction p = build_prediction(f.model.ad, f.model.bd, Vec12::Zero(), InputVector::Zero(), l);
  const QpProblem qp = encode_qp(p, VectorXd::Zero(12 * l), c, InputVector::Zero());
  const int nu = 4 * l;
  const int first_soft = 4 * nu;
  for (int i = 0; i < l; ++i) {
    for (int r = 0; r < 6; ++r) {
      const auto row = qp.constraint_matrix.row(first_soft + 6 * i + r);
      for (int j = 0; j < 3 * l; ++j) {
        EXPECT_EQ(row[nu + j], j == 3 * i + r / 2 ? -1.0 : 0.0);
      }
      // Angle bounds at zero state: the offset is the limit itself.
      EXPECT_DOUBLE_EQ(qp.constraint_bound[first_soft + 6 * i + r], 0.5);
    }
  }
  // Trailing rows keep every slack nonnegative.
  for (int j = 0; j < 3 * l; ++j) {
    EXPECT_EQ(qp.constraint_matrix(first_soft + 6 * l + j, nu + j), -1.0);
    EXPECT_EQ(qp.constraint_bound[first_soft + 6 * l + j], 0.0);
  }
}

TEST(EncodeQp, RejectsMismatchedReference) {
  Fixture f;
  const PcacConfig c = default_config(4);
  const Prediction p = build_prediction(f.model.ad, f.model.bd, Vec12::Zero(), InputVector::Zero(), 4);
  EXPECT_THROW(encode_qp(p, VectorXd::Zero(12), c, InputVector::Zero()), ConfigError);
}

TEST(PcacConfig, Validation) {
  PcacConfig c = default_config(4);
  EXPECT_NO_THROW(c.validate());
  c.horizon = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = default_config(4);
  c.stage_weight(0, 0) = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = default_config(4);
  c.u_min[0] = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = default_config(4);
  c.slack_index[0] = 7;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PcacController, HoverIsAFixedPoint) {
  Fixture f;
  PcacConfig c = default_config(10);
  c.gravity_feedforward = 4.34 * 9.81;
  PcacController ctrl(c, f.model.ad);
  for (int k = 0; k < 5; ++k) {
    const ControlResult r = ctrl.compute(Vec12::Zero(), VectorXd::Zero(120), f.theta);
    EXPECT_LT(r.deviation.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r.applied[0], 4.34 * 9.81, 1e-12);
    EXPECT_EQ(r.slack_max, 0.0);
  }
}

TEST(PcacController, AppliedMovesRespectBounds) {
  Fixture f;
  const PcacConfig c = default_config(10);
  PcacController ctrl(c, f.model.ad);
  std::mt19937_64 rng(33);
  InputVector prev = InputVector::Zero();
  for (int k = 0; k < 30; ++k) {
    VectorXd ref(120);
    for (int i = 0; i < 10; ++i) ref.segment<12>(12 * i) = random_vec12(rng, 2.0);
    const ControlResult r = ctrl.compute(random_vec12(rng, 0.1), ref, f.theta);
    EXPECT_TRUE((r.deviation.array() <= c.u_max.array()).all());
    EXPECT_TRUE((r.deviation.array() >= c.u_min.array()).all());
    EXPECT_TRUE(((r.deviation - prev).array() <= c.du_max.array()).all());
    EXPECT_TRUE(((r.deviation - prev).array() >= c.du_min.array()).all());
    EXPECT_LT(r.qp.kkt_residual, 1e-6);
    prev = r.deviation;
    EXPECT_TRUE(ctrl.last_deviation() == prev);
  }
}

TEST(PcacController, StepsTowardReference) {
  Fixture f;
  PcacController ctrl(default_config(10), f.model.ad);
  VectorXd ref = VectorXd::Zero(120);
  for (int i = 0; i < 10; ++i) ref[12 * i + 2] = 1.0;  // climb to z = 1
  const ControlResult r = ctrl.compute(Vec12::Zero(), ref, f.theta);
  EXPECT_GT(r.deviation[0], 0.0);
  EXPECT_LT(r.deviation.tail<3>().cwiseAbs().maxCoeff(), 1e-9);
}

}  // namespace
}  // namespace pcac
