#pragma once

#include <Eigen/Core>

namespace pcac {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat12x4 = Eigen::Matrix<double, 12, 4>;

/// Full quadrotor state [p, xi, v, omega]: position, Euler angles
/// [psi, phi, theta], inertial velocity, body angular velocity.
using StateVector = Vec12;

/// Control [f, tau1, tau2, tau3].
using InputVector = Vec4;

/// The twelve free entries of the discrete input matrix, row-major.
using ThetaVector = Vec12;

// Offsets of the state blocks inside a StateVector.
namespace state_index {
inline constexpr int kPosition = 0;
inline constexpr int kEuler = 3;
inline constexpr int kVelocity = 6;
inline constexpr int kRate = 9;
}  // namespace state_index

inline constexpr int kStateDim = 12;
inline constexpr int kInputDim = 4;
inline constexpr int kThetaDim = 12;

}  // namespace pcac
