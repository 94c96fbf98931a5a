#pragma once

#include <array>

#include "pcac/dynamics.hpp"
#include "pcac/types.hpp"

namespace pcac {

/// Continuous-time hover linearization (A, B) and its zero-order-hold
/// discretization (Ad, Bd) at sampling time `sample_time`.
struct LinearHoverModel {
  Mat12 a;
  Mat12x4 b;
  Mat12 ad;
  Mat12x4 bd;
  double sample_time = 0.0;
};

struct ContinuousModel {
  Mat12 a;
  Mat12x4 b;
};

struct DiscreteModel {
  Mat12 ad;
  Mat12x4 bd;
};

/// One placeholder of the discrete input matrix, 1-based (row, column) in
/// matrix notation.
struct TemplateEntry {
  int row;
  int column;
};

/// Nonzero pattern of Bd, traversed row-major. Input column read row by row
/// is (3,2,1,4,2,3,3,2,1,2,3,4).
inline constexpr std::array<TemplateEntry, kThetaDim> kInputTemplate{{
    {1, 3}, {2, 2}, {3, 1}, {4, 4}, {5, 2}, {6, 3},
    {7, 3}, {8, 2}, {9, 1}, {10, 2}, {11, 3}, {12, 4},
}};

/// Entries off the template larger than this make true_theta() reject Bd.
inline constexpr double kTemplateTolerance = 1e-14;

/// Hover linearization. A is fully known; B carries 1/m and the inverse inertia.
ContinuousModel build_continuous(const VehicleParams& params);

/// Exact ZOH discretization using A^4 = 0:
/// Ad = I + A Ts + A^2 Ts^2/2 + A^3 Ts^3/6,
/// Bd = (I Ts + A Ts^2/2 + A^2 Ts^3/6 + A^3 Ts^4/24) B.
DiscreteModel discretize(const Mat12& a, const Mat12x4& b, double sample_time);

LinearHoverModel make_hover_model(const VehicleParams& params, double sample_time);

/// Extracts the template values of `bd` in row-major order.
/// Throws TemplateError if any off-template entry exceeds kTemplateTolerance.
ThetaVector true_theta(const Mat12x4& bd);

/// Inverse of true_theta: places theta at the template positions, zero elsewhere.
Mat12x4 assemble_bd(const ThetaVector& theta);

/// Diagonal of the regressor, diag{u3,u2,u1,u4,u2,u3,u3,u2,u1,u2,u3,u4}.
Vec12 regressor_diagonal(const InputVector& u);

/// Regressor matrix Phi(u) such that assemble_bd(theta) * u == Phi(u) * theta.
Mat12 regressor(const InputVector& u);

/// Rank of [B, AB, ..., A^11 B].
int controllability_rank(const Mat12& a, const Mat12x4& b);

}  // namespace pcac
