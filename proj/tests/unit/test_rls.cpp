#include <deque>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "pcac/error.hpp"
#include "pcac/linear_model.hpp"
#include "pcac/oracles.hpp"
#include "pcac/rls.hpp"

namespace pcac {
namespace {

struct Fixture {
  LinearHoverModel model = make_hover_model(VehicleParams{}, 0.1);
  ThetaVector truth = true_theta(model.bd);
};

InputVector random_input(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return InputVector(normal(rng), normal(rng), normal(rng), normal(rng));
}

TEST(PerformanceVariable, ZeroAtTrueParameters) {
  Fixture f;
  std::mt19937_64 rng(1);
  Vec12 y_prev;
  for (int i = 0; i < 12; ++i) y_prev[i] = 0.1 * i - 0.3;
  const InputVector u = random_input(rng);
  const Vec12 y = f.model.ad * y_prev + f.model.bd * u;
  EXPECT_LT(performance_variable(y, y_prev, u, f.model.ad, f.truth).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PerformanceVariable, ZeroInputIgnoresTheta) {
  Fixture f;
  const Vec12 y = Vec12::LinSpaced(0.0, 1.0);
  const Vec12 y_prev = Vec12::LinSpaced(-1.0, 0.5);
  const Vec12 z = performance_variable(y, y_prev, InputVector::Zero(), f.model.ad, ThetaVector::Constant(7.0));
  EXPECT_TRUE(z.isApprox(y - f.model.ad * y_prev, 0.0));
}

TEST(PerformanceVariable, LinearInTheta) {
  Fixture f;
  const InputVector u(1.0, -2.0, 0.5, 3.0);
  const Vec12 y = Vec12::LinSpaced(0.0, 1.0);
  const Vec12 y_prev = Vec12::LinSpaced(-1.0, 0.5);
  const Vec12 z0 = performance_variable(y, y_prev, u, f.model.ad, f.truth);
  for (int j = 0; j < 12; ++j) {
    const Vec12 z = performance_variable(y, y_prev, u, f.model.ad, f.truth + 0.01 * ThetaVector::Unit(j));
    EXPECT_LT((z - z0 + 0.01 * regressor(u).col(j)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(RlsUpdate, ZeroRegressorOnlyInflatesCovariance) {
  RlsState s = RlsState::initial(ThetaVector::Constant(0.3), 2.0);
  const RlsState next = rls_update(s, Mat12::Zero(), Vec12::Ones(), 0.8);
  EXPECT_TRUE(next.theta == s.theta);
  EXPECT_LT((next.covariance - s.covariance / 0.8).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RlsUpdate, ConvergesOnNoiselessLinearData) {
  Fixture f;
  std::mt19937_64 rng(2);
  RlsIdentifier id(ThetaVector::Constant(1e-2), 1e6, VrfConfig{});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const InputVector u = random_input(rng);
    Vec12 y_prev;
    for (int i = 0; i < 12; ++i) y_prev[i] = normal(rng);
    const Vec12 y = f.model.ad * y_prev + f.model.bd * u;
    id.update(y, y_prev, u, f.model.ad);
  }
  // Only the prior, weighted by 1/p0, keeps the estimate off the truth.
  EXPECT_LT((id.theta() - f.truth).norm(), 1e-7);
}

TEST(RlsUpdate, MatchesBatchNormalEquations) {
  Fixture f;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  const ThetaVector theta0 = ThetaVector::Constant(0.05);
  RlsIdentifier id(theta0, 1e6, VrfConfig{});
  std::vector<Mat12> phis;
  std::vector<Vec12> targets;
  std::vector<double> lambdas;
  Vec12 y_prev = Vec12::Zero();
  for (int k = 0; k < 20; ++k) {
    const InputVector u = random_input(rng);
    Vec12 noise;
    for (int i = 0; i < 12; ++i) noise[i] = 1e-2 * normal(rng);
    const Vec12 y = 0.3 * f.model.ad * y_prev + f.model.bd * u + noise;
    const auto step = id.update(y, y_prev, u, f.model.ad);
    phis.push_back(regressor(u));
    targets.push_back(y - f.model.ad * y_prev);
    lambdas.push_back(step.lambda);
    const ThetaVector batch = oracle::batch_least_squares(theta0, 1e6, phis, targets, lambdas);
    EXPECT_LT((batch - id.theta()).cwiseAbs().maxCoeff(), 1e-8) << "step " << k;
    y_prev = y;
  }
}

TEST(RlsUpdate, MatchesBatchWithVaryingForgetting) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.6, 1.0);
  const ThetaVector theta0 = ThetaVector::Constant(-0.2);
  RlsState s = RlsState::initial(theta0, 10.0);
  std::vector<Mat12> phis;
  std::vector<Vec12> targets;
  std::vector<double> lambdas;
  for (int k = 0; k < 30; ++k) {
    const Mat12 phi = regressor(random_input(rng));
    Vec12 target;
    for (int i = 0; i < 12; ++i) target[i] = normal(rng);
    const double l = lam(rng);
    s = rls_update(s, phi, target - phi * s.theta, l);
    phis.push_back(phi);
    targets.push_back(target);
    lambdas.push_back(l);
    const ThetaVector batch = oracle::batch_least_squares(theta0, 10.0, phis, targets, lambdas);
    EXPECT_LT((batch - s.theta).cwiseAbs().maxCoeff(), 1e-9) << "step " << k;
  }
}

TEST(RlsUpdate, CovarianceStaysSymmetricPositiveDefinite) {
  std::mt19937_64 rng(5);
  RlsState s = RlsState::initial(ThetaVector::Zero(), 1e6);
  for (int k = 0; k < 200; ++k) {
    const Mat12 phi = regressor(random_input(rng));
    s = rls_update(s, phi, Vec12::Ones(), 0.9);
    EXPECT_LT((s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat12>(s.covariance).eigenvalues()[0], 0.0);
  }
}

TEST(RlsUpdate, RejectsInvalidForgettingFactor) {
  const RlsState s = RlsState::initial(ThetaVector::Zero(), 1.0);
  EXPECT_THROW(rls_update(s, Mat12::Identity(), Vec12::Zero(), 0.0), ConfigError);
  EXPECT_THROW(rls_update(s, Mat12::Identity(), Vec12::Zero(), 1.5), ConfigError);
}

std::deque<Vec12> constant_history(int n, double magnitude) {
  return std::deque<Vec12>(static_cast<std::size_t>(n), Vec12::Constant(magnitude));
}

TEST(Vrf, StationaryResidualsKeepLambdaAtOne) {
  VrfConfig c;
  c.eta = 0.99;
  EXPECT_DOUBLE_EQ(vrf_lambda(constant_history(25, 0.3), c), 1.0);
}

TEST(Vrf, DisabledGainKeepsLambdaAtOne) {
  VrfConfig c;
  c.eta = 0.0;
  auto h = constant_history(25, 0.01);
  for (int i = 0; i < 5; ++i) h[h.size() - 1 - static_cast<std::size_t>(i)] *= 100.0;
  EXPECT_EQ(vrf_lambda(h, c), 1.0);
}

TEST(Vrf, ShortHistoryKeepsLambdaAtOne) {
  VrfConfig c;
  c.eta = 0.99;
  auto h = constant_history(24, 0.01);
  h.back() *= 1000.0;
  EXPECT_EQ(vrf_lambda(h, c), 1.0);
}

TEST(Vrf, ResidualStepTriggersForgetting) {
  VrfConfig c;
  c.eta = 0.99;
  auto h = constant_history(25, 0.01);
  for (int i = 0; i < 5; ++i) h[h.size() - 1 - static_cast<std::size_t>(i)] *= 100.0;
  const double lambda = vrf_lambda(h, c);
  EXPECT_LT(lambda, 0.6);
  // With the whole short window dominating, the statistic approaches sqrt(tau_d / tau_n) - 1.
  EXPECT_NEAR(lambda, 1.0 / (1.0 + 0.99 * (std::sqrt(5.0) - 1.0)), 1e-3);
}

TEST(Vrf, StatisticIsScaleInvariant) {
  VrfConfig c;
  c.eta = 0.5;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::deque<Vec12> h, scaled;
  for (int k = 0; k < 25; ++k) {
    Vec12 z;
    for (int i = 0; i < 12; ++i) z[i] = normal(rng) * (k > 20 ? 3.0 : 1.0);
    h.push_back(z);
    scaled.push_back(37.0 * z);
  }
  EXPECT_NEAR(vrf_statistic(h, c), vrf_statistic(scaled, c), 1e-12);
  EXPECT_GT(vrf_statistic(h, c), 0.0);
}

TEST(Vrf, LambdaIsFloored) {
  VrfConfig c;
  c.eta = 1e6;
  c.lambda_min = 0.01;
  auto h = constant_history(25, 1e-3);
  h.back() *= 1e4;
  EXPECT_DOUBLE_EQ(vrf_lambda(h, c), 0.01);
}

TEST(Vrf, ConfigValidation) {
  VrfConfig c;
  c.tau_n = 25;
  EXPECT_THROW(c.validate(), ConfigError);
  c = VrfConfig{};
  c.eta = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = VrfConfig{};
  c.lambda_min = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RlsIdentifier, HistoryIsBounded) {
  Fixture f;
  VrfConfig c;
  c.eta = 0.5;
  RlsIdentifier id(ThetaVector::Zero(), 1e3, c);
  std::mt19937_64 rng(7);
  Vec12 y_prev = Vec12::Zero();
  for (int k = 0; k < 60; ++k) {
    const InputVector u = random_input(rng);
    const Vec12 y = f.model.bd * u;
    id.update(y, y_prev, u, f.model.ad);
    y_prev = y;
    EXPECT_LE(id.state().residual_history.size(), 25u);
  }
}

}  // namespace
}  // namespace pcac
