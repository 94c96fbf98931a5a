#include "pcac/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "pcac/controller.hpp"
#include "pcac/dynamics.hpp"
#include "pcac/error.hpp"
#include "pcac/linear_model.hpp"
#include "pcac/rls.hpp"

namespace pcac {

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::kSingularity:
      return "euler-singularity";
    case FaultKind::kIntegration:
      return "integration-failure";
    case FaultKind::kController:
      return "controller-failure";
    case FaultKind::kCovariance:
      return "covariance-not-positive-definite";
    case FaultKind::kNonFinite:
      return "non-finite-state";
  }
  return "unknown";
}

namespace {

Eigen::VectorXd stacked_reference(const Scenario& s, int k) {
  const int horizon = s.pcac.horizon;
  Eigen::VectorXd r(kStateDim * horizon);
  for (int i = 1; i <= horizon; ++i) {
    r.segment<kStateDim>(kStateDim * (i - 1)) = evaluate_command(s.command, (k + i) * s.sample_time);
  }
  return r;
}

}  // namespace

RunResult run_scenario(const Scenario& s, const StepObserver& observer) {
  s.validate();
  RunResult result;
  result.scenario_name = s.name;

  const LinearHoverModel nominal = make_hover_model(s.vehicle, s.sample_time);
  RlsIdentifier identifier(s.theta0, s.p0_scale, s.vrf);
  PcacController controller(s.pcac, nominal.ad);

  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool noisy = (s.noise_sigma.array() > 0.0).any();

  StateVector x = s.initial_state;
  Vec12 y_prev = Vec12::Zero();
  InputVector u_prev = InputVector::Zero();  // deviation held over the previous interval
  InputVector pending = InputVector::Zero();  // deviation scheduled for the next interval

  result.min_covariance_eigenvalue = s.p0_scale;
  const int steps = s.num_steps();
  result.trace.reserve(static_cast<std::size_t>(steps));

  double t = 0.0;
  try {
    for (int k = 0; k < steps; ++k) {
      t = k * s.sample_time;
      if (!x.allFinite()) throw Error("state became non-finite");
      const double mass = s.plant_mass_at(t);

      Vec12 y = x;
      if (noisy) {
        for (int i = 0; i < kStateDim; ++i) {
          if (s.noise_sigma[i] > 0.0) y[i] += s.noise_sigma[i] * normal(rng);
        }
      }

      TraceRecord rec;
      rec.t = t;
      rec.state = x;
      rec.measured = y;
      if (k > 0) rec.lambda = identifier.update(y, y_prev, u_prev, nominal.ad).lambda;
      rec.theta = identifier.theta();

      const Mat12& p = identifier.state().covariance;
      result.min_covariance_eigenvalue =
          std::min(result.min_covariance_eigenvalue, Eigen::SelfAdjointEigenSolver<Mat12>(p).eigenvalues()[0]);
      result.max_covariance_asymmetry = std::max(result.max_covariance_asymmetry, (p - p.transpose()).cwiseAbs().maxCoeff());

      const double feedforward =
          (s.feedforward_mass == FeedforwardMass::kPlant ? mass : s.vehicle.mass) * s.vehicle.gravity;
      controller.set_gravity_feedforward(feedforward);
      const ControlResult control = controller.compute(y, stacked_reference(s, k), rec.theta);

      InputVector deviation;
      if (s.one_step_delay) {
        deviation = pending;
        pending = control.deviation;
      } else {
        deviation = control.deviation;
      }
      rec.input = deviation;
      rec.input[0] += feedforward;
      rec.slack_max = control.slack_max;
      rec.qp_iterations = control.qp.iterations;
      rec.qp_kkt = control.qp.kkt_residual;
      rec.tracking_error = x.segment<3>(state_index::kPosition) - evaluate_command(s.command, t).head<3>();
      result.trace.push_back(rec);
      if (observer && !observer(rec)) break;

      VehicleParams plant = s.vehicle;
      plant.mass = mass;
      x = integrate_step(x, rec.input, plant, s.sample_time, s.integrator);
      y_prev = y;
      u_prev = deviation;
    }
  } catch (const SingularityError& e) {
    result.fault = Fault{FaultKind::kSingularity, t, e.what()};
  } catch (const IntegrationError& e) {
    result.fault = Fault{FaultKind::kIntegration, t, e.what()};
  } catch (const ControllerFault& e) {
    result.fault = Fault{FaultKind::kController, t, e.what()};
  } catch (const CovarianceError& e) {
    result.fault = Fault{FaultKind::kCovariance, t, e.what()};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    result.fault = Fault{FaultKind::kNonFinite, t, e.what()};
  }
  return result;
}

std::vector<ThetaVector> true_theta_history(const Scenario& s, const std::vector<TraceRecord>& trace) {
  std::vector<ThetaVector> out;
  out.reserve(trace.size());
  double cached_mass = -1.0;
  ThetaVector cached = ThetaVector::Zero();
  for (const auto& rec : trace) {
    const double mass = s.plant_mass_at(rec.t);
    if (mass != cached_mass) {
      VehicleParams plant = s.vehicle;
      plant.mass = mass;
      cached = true_theta(make_hover_model(plant, s.sample_time).bd);
      cached_mass = mass;
    }
    out.push_back(cached);
  }
  return out;
}

}  // namespace pcac
