#pragma once

#include <random>
#include <string>
#include <vector>

#include "pcac/dynamics.hpp"
#include "pcac/linear_model.hpp"
#include "pcac/qp.hpp"
#include "pcac/types.hpp"

// Reference computations used to check the production code. They trade speed
// for independence from it: numerical Jacobians, quadrature with a Pade
// matrix exponential, normal equations and brute-force active-set search.
namespace pcac::oracle {

/// Central-difference Jacobians of the nonlinear model at hover, u = [m g 0 0 0].
ContinuousModel hover_jacobian(const VehicleParams& params, double step = 1e-6);

/// Ad = expm(A Ts) and Bd = integral_0^Ts expm(A s) ds B by composite
/// three-point Gauss-Legendre quadrature over `panels` subintervals.
DiscreteModel zoh_quadrature(const Mat12& a, const Mat12x4& b, double sample_time, int panels = 10000);

/// Minimizer of the exponentially weighted identification cost
///   sum_i w_i ||targets_i - Phi_i theta||^2 + w_0 (theta - theta0)^T P0^-1 (theta - theta0)
/// with w_i the product of lambdas after step i, solved from the normal equations.
ThetaVector batch_least_squares(const ThetaVector& theta0, double p0_scale, const std::vector<Mat12>& phis,
                                const std::vector<Vec12>& targets, const std::vector<double>& lambdas);

struct EnumerationResult {
  bool feasible = false;
  Eigen::VectorXd w;
  double objective = 0.0;
  std::vector<int> active_set;
};

/// Exhaustive search over working sets for a strictly convex QP: returns the
/// first subset (by size, then lexicographically) whose equality-constrained
/// minimizer is primal feasible with nonnegative multipliers.
EnumerationResult enumerate_active_sets(const QpProblem& problem, double tolerance = 1e-9);

/// Random strictly convex instance with a known feasible interior point.
QpProblem random_strictly_convex_qp(std::mt19937_64& rng, int num_variables, int num_constraints);

struct CheckResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

CheckResult check_discretization(int random_cases = 50, std::uint64_t seed = 11);
CheckResult check_rls_batch(int steps = 100, std::uint64_t seed = 12);
CheckResult check_qp_enumeration(int instances = 200, std::uint64_t seed = 13);

/// The three checks above with their default settings.
std::vector<CheckResult> run_verify_suite();

}  // namespace pcac::oracle
