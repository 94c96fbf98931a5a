#pragma once

#include "pcac/types.hpp"

namespace pcac {

/// Rigid-body parameters. Inertia is diagonal (principal axes).
struct VehicleParams {
  double mass = 4.34;
  Vec3 inertia{0.082, 0.0845, 0.1377};
  double gravity = 9.81;

  /// Throws ConfigError unless mass, inertia and gravity are all positive and finite.
  void validate() const;
};

/// Denominators |c_psi^2 c_phi + s_psi^2| at or below this value are treated
/// as an Euler-kinematics singularity.
inline constexpr double kEulerSingularityGuard = 1e-6;

/// Body-to-inertial rotation for the Z-X-Y Euler sequence, R = Ry(theta) Rx(phi) Rz(psi).
/// `euler` is ordered [psi, phi, theta].
Mat3 rotation_matrix(const Vec3& euler);

/// Matrix mapping Euler-angle rates to body angular velocity, omega = J(xi) xi_dot.
Mat3 euler_rate_jacobian(const Vec3& euler);

/// xi_dot = J(xi)^-1 omega using the closed-form inverse.
/// Throws SingularityError when the Jacobian determinant is within the guard.
Vec3 euler_kinematics(const Vec3& euler, const Vec3& omega);

/// Right-hand side of the nonlinear model:
/// [v; J(xi)^-1 omega; -g e3 + (f/m) R^T e3; Jb^-1 (-omega x Jb omega + tau)].
StateVector state_derivative(const StateVector& x, const InputVector& u, const VehicleParams& params);

struct IntegratorOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  // Steps shorter than this after a rejected step abort the integration.
  double min_step = 1e-12;
};

/// Advances the plant by `dt` seconds with `u` held constant, using an
/// adaptive Dormand-Prince 4(5) pair. Throws IntegrationError on step-size
/// underflow or a non-finite result, SingularityError from the model.
StateVector integrate_step(const StateVector& x, const InputVector& u, const VehicleParams& params,
                           double dt, const IntegratorOptions& options = {});

}  // namespace pcac
