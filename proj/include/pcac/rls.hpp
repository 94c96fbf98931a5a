#pragma once

#include <cstddef>
#include <deque>

#include "pcac/types.hpp"

namespace pcac {

/// Variable-rate forgetting settings.
struct VrfConfig {
  double eta = 0.0;
  int tau_n = 5;
  int tau_d = 25;
  double lambda_min = 0.01;

  /// Requires 0 < tau_n < tau_d, eta >= 0 and 0 < lambda_min < 1.
  void validate() const;
};

/// Estimate, covariance and forgetting state of the identifier.
struct RlsState {
  ThetaVector theta = ThetaVector::Zero();
  Mat12 covariance = Mat12::Identity();
  double lambda = 1.0;
  // Most recent performance variables, newest at the back.
  std::deque<Vec12> residual_history;

  static RlsState initial(const ThetaVector& theta0, double p0_scale);
};

/// One-step prediction residual z = y - Ad y_prev - Phi(u_prev) theta.
Vec12 performance_variable(const Vec12& y, const Vec12& y_prev, const InputVector& u_prev, const Mat12& ad,
                           const ThetaVector& theta);

/// Ratio statistic f = max(0, sqrt(ms_short / ms_long) - 1), where ms_* is the
/// mean squared residual norm over the newest tau_n / tau_d entries.
/// Zero until the history holds tau_d residuals or when the long window is all zero.
double vrf_statistic(const std::deque<Vec12>& history, const VrfConfig& config);

/// lambda = 1 / (1 + eta f), clamped to [lambda_min, 1].
double vrf_lambda(const std::deque<Vec12>& history, const VrfConfig& config);

/// Recursive minimizer of the forgetting-weighted cost for one new sample:
/// L = P Phi^T (lambda I + Phi P Phi^T)^-1, theta+ = theta + L z,
/// P+ = (P - L Phi P) / lambda, symmetrized.
/// `z` must be the residual evaluated at `state.theta`. Throws CovarianceError
/// if P+ is not positive definite.
RlsState rls_update(const RlsState& state, const Mat12& phi, const Vec12& z, double lambda);

/// Diagnostics from one identification step.
struct IdentificationStep {
  Vec12 residual;
  double lambda = 1.0;
};

/// Sequential identifier: residual, VRF forgetting factor, RLS update.
class RlsIdentifier {
 public:
  RlsIdentifier(const ThetaVector& theta0, double p0_scale, const VrfConfig& vrf);

  /// Consumes the measurement pair (y_prev, y) produced by input u_prev.
  IdentificationStep update(const Vec12& y, const Vec12& y_prev, const InputVector& u_prev, const Mat12& ad);

  const RlsState& state() const { return state_; }
  const ThetaVector& theta() const { return state_.theta; }
  const VrfConfig& vrf() const { return vrf_; }

 private:
  RlsState state_;
  VrfConfig vrf_;
};

}  // namespace pcac
