#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "pcac/error.hpp"
#include "pcac/oracles.hpp"
#include "pcac/qp.hpp"

namespace pcac {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

QpProblem scalar_problem(double h, double c, double upper) {
  QpProblem qp;
  qp.hessian = MatrixXd::Constant(1, 1, h);
  qp.linear = VectorXd::Constant(1, c);
  qp.constraint_matrix = MatrixXd::Constant(1, 1, 1.0);
  qp.constraint_bound = VectorXd::Constant(1, upper);
  return qp;
}

TEST(Qp, InactiveBoundGivesUnconstrainedMinimizer) {
  const QpSolution s = solve_qp(scalar_problem(2.0, -2.0, 5.0));
  ASSERT_EQ(s.status, QpStatus::kSolved);
  EXPECT_NEAR(s.w[0], 1.0, 1e-12);
  EXPECT_NEAR(s.duals[0], 0.0, 1e-12);
  EXPECT_TRUE(s.active_set.empty());
}

TEST(Qp, ActiveBound) {
  const QpSolution s = solve_qp(scalar_problem(1.0, -1.0, 0.5));
  ASSERT_EQ(s.status, QpStatus::kSolved);
  EXPECT_NEAR(s.w[0], 0.5, 1e-12);
  EXPECT_NEAR(s.duals[0], 0.5, 1e-12);
  EXPECT_EQ(s.active_set, std::vector<int>{0});
  EXPECT_NEAR(s.objective, -0.375, 1e-12);
}

TEST(Qp, NoConstraints) {
  QpProblem qp;
  qp.hessian = MatrixXd::Identity(3, 3) * 4.0;
  qp.linear = VectorXd::LinSpaced(3, 1.0, 3.0);
  qp.constraint_matrix.resize(0, 3);
  qp.constraint_bound.resize(0);
  const QpSolution s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::kSolved);
  EXPECT_LT((s.w + qp.linear / 4.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Qp, ConstantOnlyShiftsObjective) {
  QpProblem qp = scalar_problem(1.0, -1.0, 0.5);
  qp.constant = 10.0;
  EXPECT_NEAR(solve_qp(qp).objective, 9.625, 1e-12);
}

TEST(Qp, DetectsInfeasibility) {
  QpProblem qp;
  qp.hessian = MatrixXd::Identity(2, 2);
  qp.linear = VectorXd::Zero(2);
  qp.constraint_matrix.resize(2, 2);
  qp.constraint_matrix << 1, 1, -1, -1;
  qp.constraint_bound = VectorXd(2);
  qp.constraint_bound << -1, -1;  // x + y <= -1 and x + y >= 1
  EXPECT_EQ(solve_qp(qp).status, QpStatus::kInfeasible);
}

TEST(Qp, RejectsBadData) {
  QpProblem qp = scalar_problem(1.0, 0.0, 1.0);
  qp.linear = VectorXd::Zero(2);
  EXPECT_THROW(solve_qp(qp), ConfigError);
  qp = scalar_problem(1.0, 0.0, 1.0);
  qp.constraint_bound[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_qp(qp), ConfigError);
  QpProblem asym;
  asym.hessian = MatrixXd::Identity(2, 2);
  asym.hessian(0, 1) = 0.5;
  asym.linear = VectorXd::Zero(2);
  asym.constraint_matrix.resize(0, 2);
  asym.constraint_bound.resize(0);
  EXPECT_THROW(solve_qp(asym), ConfigError);
}

TEST(Qp, MatchesActiveSetEnumeration) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> nvar(2, 6), ncon(1, 10);
  for (int i = 0; i < 150; ++i) {
    const QpProblem qp = oracle::random_strictly_convex_qp(rng, nvar(rng), ncon(rng));
    const QpSolution s = solve_qp(qp);
    const oracle::EnumerationResult ref = oracle::enumerate_active_sets(qp);
    ASSERT_TRUE(ref.feasible);
    ASSERT_EQ(s.status, QpStatus::kSolved) << "instance " << i;
    EXPECT_LT(std::abs(s.objective - ref.objective), 1e-8 * std::max(1.0, std::abs(ref.objective)));
    EXPECT_LT((s.w - ref.w).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(s.kkt_residual, 1e-9);
  }
}

TEST(Qp, WarmAndColdStartAgree) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    QpProblem qp = oracle::random_strictly_convex_qp(rng, 5, 8);
    const QpSolution cold = solve_qp(qp);
    ASSERT_EQ(cold.status, QpStatus::kSolved);
    // Perturbed, possibly infeasible warm start.
    VectorXd guess = cold.w;
    std::normal_distribution<double> normal(0.0, 0.5);
    for (Eigen::Index j = 0; j < guess.size(); ++j) guess[j] += normal(rng);
    qp.warm_start = guess;
    const QpSolution warm = solve_qp(qp);
    ASSERT_EQ(warm.status, QpStatus::kSolved);
    EXPECT_NEAR(warm.objective, cold.objective, 1e-8 * std::max(1.0, std::abs(cold.objective)));
  }
}

TEST(Qp, WarmStartAtOptimumTakesNoSteps) {
  std::mt19937_64 rng(23);
  QpProblem qp = oracle::random_strictly_convex_qp(rng, 4, 6);
  const QpSolution cold = solve_qp(qp);
  qp.warm_start = cold.w;
  const QpSolution warm = solve_qp(qp);
  EXPECT_LE(warm.iterations, cold.iterations);
  EXPECT_LT((warm.w - cold.w).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Qp, ObjectiveScalingLeavesMinimizerUnchanged) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 30; ++i) {
    QpProblem qp = oracle::random_strictly_convex_qp(rng, 4, 7);
    const QpSolution base = solve_qp(qp);
    qp.hessian *= 1e3;
    qp.linear *= 1e3;
    const QpSolution scaled = solve_qp(qp);
    ASSERT_EQ(scaled.status, QpStatus::kSolved);
    EXPECT_LT((scaled.w - base.w).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((scaled.duals - 1e3 * base.duals).cwiseAbs().maxCoeff(), 1e-5 * (1.0 + 1e3 * base.duals.norm()));
  }
}

TEST(Qp, ObjectiveDecreasesFromFeasibleStart) {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 30; ++i) {
    QpProblem qp = oracle::random_strictly_convex_qp(rng, 6, 10);
    // Any solution of the same polytope is a feasible start.
    QpProblem shifted = qp;
    shifted.linear.setZero();
    const QpSolution feasible = solve_qp(shifted);
    ASSERT_EQ(feasible.status, QpStatus::kSolved);
    qp.warm_start = feasible.w;
    QpOptions opts;
    opts.record_objective = true;
    const QpSolution s = solve_qp(qp, opts);
    ASSERT_EQ(s.status, QpStatus::kSolved);
    ASSERT_FALSE(s.objective_history.empty());
    for (std::size_t k = 1; k < s.objective_history.size(); ++k) {
      EXPECT_LE(s.objective_history[k], s.objective_history[k - 1] + 1e-9 * (1.0 + std::abs(s.objective_history[k - 1])));
    }
  }
}

TEST(Qp, SemidefiniteHessian) {
  // min (x - 1)^2 with y free in [0, 2]: any y is optimal.
  QpProblem qp;
  qp.hessian = MatrixXd::Zero(2, 2);
  qp.hessian(0, 0) = 2.0;
  qp.linear = VectorXd(2);
  qp.linear << -2.0, 0.0;
  qp.constraint_matrix.resize(2, 2);
  qp.constraint_matrix << 0, 1, 0, -1;
  qp.constraint_bound = VectorXd(2);
  qp.constraint_bound << 2.0, 0.0;
  const QpSolution s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::kSolved);
  EXPECT_NEAR(s.w[0], 1.0, 1e-8);
  EXPECT_GE(s.w[1], -1e-9);
  EXPECT_LE(s.w[1], 2.0 + 1e-9);
}

TEST(Qp, RedundantConstraints) {
  // The same bound listed three times plus an implied one.
  QpProblem qp;
  qp.hessian = MatrixXd::Identity(2, 2);
  qp.linear = VectorXd::Constant(2, -5.0);
  qp.constraint_matrix.resize(4, 2);
  qp.constraint_matrix << 1, 0, 1, 0, 2, 0, 1, 1;
  qp.constraint_bound = VectorXd(4);
  qp.constraint_bound << 1, 1, 2, 10;
  const QpSolution s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::kSolved);
  EXPECT_NEAR(s.w[0], 1.0, 1e-12);
  EXPECT_NEAR(s.w[1], 5.0, 1e-12);
  EXPECT_LT(s.kkt_residual, 1e-10);
}

TEST(KktReport, ComponentsAtKnownPoint) {
  const QpProblem qp = scalar_problem(1.0, -1.0, 0.5);
  VectorXd w = VectorXd::Constant(1, 0.75);
  VectorXd d = VectorXd::Constant(1, -0.25);
  const KktReport r = kkt_report(qp, w, d);
  EXPECT_NEAR(r.stationarity, 0.5, 1e-15);
  EXPECT_NEAR(r.primal_infeasibility, 0.25, 1e-15);
  EXPECT_NEAR(r.dual_infeasibility, 0.25, 1e-15);
  EXPECT_NEAR(r.complementarity, 0.0625, 1e-15);
}

}  // namespace
}  // namespace pcac
