#include "pcac/dynamics.hpp"

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Geometry>
#include <boost/numeric/odeint.hpp>

#include "pcac/error.hpp"

namespace pcac {

namespace si = state_index;

void VehicleParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ConfigError("vehicle mass must be positive, got " + std::to_string(mass));
  }
  for (int i = 0; i < 3; ++i) {
    if (!(inertia[i] > 0.0) || !std::isfinite(inertia[i])) {
      throw ConfigError("inertia entry " + std::to_string(i) + " must be positive");
    }
  }
  if (!(gravity > 0.0) || !std::isfinite(gravity)) {
    throw ConfigError("gravity must be positive");
  }
}

Mat3 rotation_matrix(const Vec3& euler) {
  const double cps = std::cos(euler[0]), sps = std::sin(euler[0]);
  const double cph = std::cos(euler[1]), sph = std::sin(euler[1]);
  const double cth = std::cos(euler[2]), sth = std::sin(euler[2]);
  Mat3 r;
  r << cps * cth + sph * sps * sth, cps * sph * sth - cth * sps, cph * sth,
       cph * sps,                   cph * cps,                   -sph,
       cth * sph * sps - cps * sth, sps * sth + cps * cth * sph, cph * cth;
  return r;
}

Mat3 euler_rate_jacobian(const Vec3& euler) {
  const double cps = std::cos(euler[0]), sps = std::sin(euler[0]);
  const double cph = std::cos(euler[1]), sph = std::sin(euler[1]);
  Mat3 j;
  j << 0.0, cps, -sps,
       0.0, sps, cph * cps,
       1.0, 0.0, sph * cps;
  return j;
}

Vec3 euler_kinematics(const Vec3& euler, const Vec3& omega) {
  const double cps = std::cos(euler[0]), sps = std::sin(euler[0]);
  const double cph = std::cos(euler[1]), sph = std::sin(euler[1]);
  const double det = cps * cps * cph + sps * sps;
  if (!(std::abs(det) > kEulerSingularityGuard)) {
    throw SingularityError("Euler kinematics singular: |c_psi^2 c_phi + s_psi^2| = " +
                           std::to_string(std::abs(det)));
  }
  Mat3 adj;
  adj << sph * cps * sps, -sph * cps * cps, det,
         cph * cps,       sps,              0.0,
         -sps,            cps,              0.0;
  return adj * omega / det;
}

StateVector state_derivative(const StateVector& x, const InputVector& u, const VehicleParams& params) {
  const Vec3 euler = x.segment<3>(si::kEuler);
  const Vec3 omega = x.segment<3>(si::kRate);
  const Vec3& inertia = params.inertia;

  StateVector dx;
  dx.segment<3>(si::kPosition) = x.segment<3>(si::kVelocity);
  dx.segment<3>(si::kEuler) = euler_kinematics(euler, omega);

  // Thrust direction R^T e3 is the third row of R.
  const Mat3 r = rotation_matrix(euler);
  Vec3 accel = (u[0] / params.mass) * r.row(2).transpose();
  accel[2] -= params.gravity;
  dx.segment<3>(si::kVelocity) = accel;

  const Vec3 momentum = inertia.cwiseProduct(omega);
  dx.segment<3>(si::kRate) = (-omega.cross(momentum) + u.tail<3>()).cwiseQuotient(inertia);
  return dx;
}

namespace {

using OdeState = std::array<double, 12>;

struct PlantRhs {
  const InputVector& u;
  const VehicleParams& params;

  void operator()(const OdeState& x, OdeState& dxdt, double /*t*/) const {
    const StateVector dx = state_derivative(Eigen::Map<const StateVector>(x.data()), u, params);
    Eigen::Map<StateVector>(dxdt.data()) = dx;
  }
};

}  // namespace

StateVector integrate_step(const StateVector& x, const InputVector& u, const VehicleParams& params,
                           double dt, const IntegratorOptions& options) {
  namespace odeint = boost::numeric::odeint;
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("integration step must be positive");
  }

  OdeState state;
  Eigen::Map<StateVector>(state.data()) = x;
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(options.abs_tol, options.rel_tol);
  const PlantRhs rhs{u, params};

  double t = 0.0;
  double h = dt;
  // The final step is clipped to land exactly on dt.
  while (t < dt) {
    const double remaining = dt - t;
    if (remaining <= 1e-14 * dt) {
      break;
    }
    double step = std::min(h, remaining);
    const bool last = step == remaining;
    const double t_before = t;
    if (stepper.try_step(rhs, state, t, step) == odeint::success) {
      if (last) {
        t = dt;
      }
      h = step;
      continue;
    }
    t = t_before;
    if (step < options.min_step) {
      throw IntegrationError("step size underflow at t = " + std::to_string(t) + " (h = " +
                             std::to_string(step) + ")");
    }
    h = step;
  }

  const StateVector out = Eigen::Map<const StateVector>(state.data());
  if (!out.allFinite()) {
    throw IntegrationError("integration produced a non-finite state");
  }
  return out;
}

}  // namespace pcac
