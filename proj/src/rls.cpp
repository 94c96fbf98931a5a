#include "pcac/rls.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "pcac/error.hpp"
#include "pcac/linear_model.hpp"

namespace pcac {

void VrfConfig::validate() const {
  if (!(tau_n > 0 && tau_n < tau_d)) {
    throw ConfigError("VRF windows require 0 < tau_n < tau_d");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw ConfigError("VRF gain eta must be nonnegative");
  }
  if (!(lambda_min > 0.0 && lambda_min < 1.0)) {
    throw ConfigError("lambda_min must lie in (0, 1)");
  }
}

RlsState RlsState::initial(const ThetaVector& theta0, double p0_scale) {
  if (!(p0_scale > 0.0) || !std::isfinite(p0_scale)) {
    throw ConfigError("initial covariance scale must be positive");
  }
  if (!theta0.allFinite()) {
    throw ConfigError("initial estimate must be finite");
  }
  RlsState s;
  s.theta = theta0;
  s.covariance = p0_scale * Mat12::Identity();
  return s;
}

Vec12 performance_variable(const Vec12& y, const Vec12& y_prev, const InputVector& u_prev, const Mat12& ad,
                           const ThetaVector& theta) {
  return y - ad * y_prev - regressor_diagonal(u_prev).cwiseProduct(theta);
}

double vrf_statistic(const std::deque<Vec12>& history, const VrfConfig& config) {
  const auto n = static_cast<std::size_t>(config.tau_n);
  const auto d = static_cast<std::size_t>(config.tau_d);
  if (history.size() < d) {
    return 0.0;
  }
  double short_sum = 0.0;
  double long_sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double sq = history[history.size() - 1 - i].squaredNorm();
    long_sum += sq;
    if (i < n) {
      short_sum += sq;
    }
  }
  if (!(long_sum > 0.0)) {
    return 0.0;
  }
  const double ratio = (short_sum / static_cast<double>(n)) / (long_sum / static_cast<double>(d));
  return std::max(0.0, std::sqrt(ratio) - 1.0);
}

double vrf_lambda(const std::deque<Vec12>& history, const VrfConfig& config) {
  if (config.eta == 0.0) {
    return 1.0;
  }
  const double f = vrf_statistic(history, config);
  return std::clamp(1.0 / (1.0 + config.eta * f), config.lambda_min, 1.0);
}

RlsState rls_update(const RlsState& state, const Mat12& phi, const Vec12& z, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ConfigError("forgetting factor must lie in (0, 1], got " + std::to_string(lambda));
  }
  const Mat12& p = state.covariance;
  const Mat12 p_phit = p * phi.transpose();
  const Mat12 innovation = lambda * Mat12::Identity() + phi * p_phit;
  // innovation is SPD for lambda > 0 and SPD P.
  const Eigen::LLT<Mat12> llt(innovation);
  if (llt.info() != Eigen::Success) {
    throw CovarianceError("RLS innovation matrix is not positive definite");
  }
  const Mat12 gain = llt.solve(p_phit.transpose()).transpose();

  RlsState next = state;
  next.theta = state.theta + gain * z;
  Mat12 p_next = (p - gain * phi * p) / lambda;
  p_next = 0.5 * (p_next + p_next.transpose());
  next.covariance = p_next;
  next.lambda = lambda;

  if (!next.theta.allFinite() || !p_next.allFinite()) {
    throw CovarianceError("RLS update produced non-finite values");
  }
  const Eigen::LLT<Mat12> check(p_next);
  if (check.info() != Eigen::Success) {
    throw CovarianceError("RLS covariance lost positive definiteness (min diagonal " +
                          std::to_string(p_next.diagonal().minCoeff()) + ")");
  }
  return next;
}

RlsIdentifier::RlsIdentifier(const ThetaVector& theta0, double p0_scale, const VrfConfig& vrf)
    : state_(RlsState::initial(theta0, p0_scale)), vrf_(vrf) {
  vrf_.validate();
}

IdentificationStep RlsIdentifier::update(const Vec12& y, const Vec12& y_prev, const InputVector& u_prev,
                                         const Mat12& ad) {
  IdentificationStep step;
  step.residual = performance_variable(y, y_prev, u_prev, ad, state_.theta);

  auto& history = state_.residual_history;
  history.push_back(step.residual);
  while (history.size() > static_cast<std::size_t>(vrf_.tau_d)) {
    history.pop_front();
  }
  step.lambda = vrf_lambda(history, vrf_);

  std::deque<Vec12> kept = std::move(history);
  state_ = rls_update(state_, regressor(u_prev), step.residual, step.lambda);
  state_.residual_history = std::move(kept);
  return step;
}

}  // namespace pcac
