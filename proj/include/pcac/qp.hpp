#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace pcac {

/// minimize  0.5 w^T H w + c^T w + constant
/// subject to G w <= h
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd constraint_matrix;
  Eigen::VectorXd constraint_bound;
  // Constant objective offset; only affects the reported objective value.
  double constant = 0.0;
  std::optional<Eigen::VectorXd> warm_start;

  Eigen::Index num_variables() const { return linear.size(); }
  Eigen::Index num_constraints() const { return constraint_bound.size(); }

  /// Throws ConfigError on inconsistent dimensions, non-finite data or an asymmetric Hessian.
  void validate() const;
};

enum class QpStatus { kSolved, kMaxIterations, kInfeasible };

std::string_view to_string(QpStatus status);

/// First-order optimality diagnostics of a primal/dual pair.
struct KktReport {
  double stationarity = 0.0;           // ||H w + c + G^T duals||_inf
  double primal_infeasibility = 0.0;   // max(0, max(G w - h))
  double dual_infeasibility = 0.0;     // max(0, -min(duals))
  double complementarity = 0.0;        // max |duals_i (h_i - G_i w)|
  // Max of the four above, each normalized by the magnitude of the terms it
  // compares. Equals the absolute values for unit-scale data.
  double scaled_residual = 0.0;
};

struct QpSolution {
  Eigen::VectorXd w;
  Eigen::VectorXd duals;
  QpStatus status = QpStatus::kMaxIterations;
  double kkt_residual = 0.0;
  KktReport kkt;
  double objective = 0.0;
  int iterations = 0;
  // Constraints in the final working set, ascending.
  std::vector<int> active_set;
  // Objective after every feasible-phase iteration, if requested.
  std::vector<double> objective_history;
};

struct QpOptions {
  int max_iterations = 500;
  bool record_objective = false;
};

double qp_objective(const QpProblem& problem, const Eigen::VectorXd& w);

KktReport kkt_report(const QpProblem& problem, const Eigen::VectorXd& w, const Eigen::VectorXd& duals);

/// Dense primal active-set solver. Starts from the warm-start point when it is
/// feasible, otherwise from an elastic (exact-penalty) phase. Ties in entering
/// and leaving constraints go to the lowest index, so results are deterministic.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace pcac
