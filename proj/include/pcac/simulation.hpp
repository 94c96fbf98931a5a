#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcac/scenario.hpp"
#include "pcac/types.hpp"

namespace pcac {

/// One sample of a closed-loop run, taken at t_k before integration.
struct TraceRecord {
  double t = 0.0;
  StateVector state = StateVector::Zero();    // true state x_k
  Vec12 measured = Vec12::Zero();             // y_k
  InputVector input = InputVector::Zero();    // physical input held over [t_k, t_k + Ts)
  ThetaVector theta = ThetaVector::Zero();    // estimate used for the step-k computation
  double lambda = 1.0;
  double slack_max = 0.0;
  int qp_iterations = 0;
  double qp_kkt = 0.0;
  Vec3 tracking_error = Vec3::Zero();         // p_k - p_d(t_k)
};

enum class FaultKind { kSingularity, kIntegration, kController, kCovariance, kNonFinite };

const char* to_string(FaultKind kind);

struct Fault {
  FaultKind kind = FaultKind::kNonFinite;
  double time = 0.0;
  std::string message;
};

struct RunResult {
  std::string scenario_name;
  std::vector<TraceRecord> trace;
  std::optional<Fault> fault;
  // Worst covariance health over the run.
  double min_covariance_eigenvalue = 0.0;
  double max_covariance_asymmetry = 0.0;

  bool ok() const { return !fault.has_value(); }
};

/// Called after each recorded sample; return false to stop the run early.
using StepObserver = std::function<bool(const TraceRecord&)>;

/// Closed loop: measure, identify, solve, apply, integrate. Faults stop the
/// run and are reported in the result with the partial trace.
RunResult run_scenario(const Scenario& scenario, const StepObserver& observer = {});

/// True input matrix entries for the plant in effect at each record.
std::vector<ThetaVector> true_theta_history(const Scenario& scenario, const std::vector<TraceRecord>& trace);

}  // namespace pcac
