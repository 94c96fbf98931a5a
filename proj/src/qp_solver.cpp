#include "pcac/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "pcac/error.hpp"

namespace pcac {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void QpProblem::validate() const {
  const Index n = linear.size();
  const Index m = constraint_bound.size();
  if (hessian.rows() != n || hessian.cols() != n) {
    throw ConfigError("QP Hessian must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (constraint_matrix.rows() != m || (m > 0 && constraint_matrix.cols() != n)) {
    throw ConfigError("QP constraint matrix has inconsistent dimensions");
  }
  if (warm_start && warm_start->size() != n) {
    throw ConfigError("QP warm start has wrong length");
  }
  if (!hessian.allFinite() || !linear.allFinite() || !constraint_matrix.allFinite() ||
      !constraint_bound.allFinite()) {
    throw ConfigError("QP data contains non-finite values");
  }
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  if (n > 0 && (hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ConfigError("QP Hessian is not symmetric");
  }
}

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kSolved:
      return "solved";
    case QpStatus::kMaxIterations:
      return "max-iterations";
    case QpStatus::kInfeasible:
      return "infeasible-detected";
  }
  return "unknown";
}

double qp_objective(const QpProblem& problem, const VectorXd& w) {
  return 0.5 * w.dot(problem.hessian * w) + problem.linear.dot(w) + problem.constant;
}

namespace {

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

KktReport kkt_report(const QpProblem& problem, const VectorXd& w, const VectorXd& duals) {
  KktReport r;
  const VectorXd hw = problem.hessian * w;
  const Index m = problem.num_constraints();
  VectorXd gt_mu = VectorXd::Zero(w.size());
  VectorXd slack = VectorXd::Zero(m);
  if (m > 0) {
    gt_mu = problem.constraint_matrix.transpose() * duals;
    slack = problem.constraint_bound - problem.constraint_matrix * w;
  }
  r.stationarity = inf_norm(hw + problem.linear + gt_mu);
  r.primal_infeasibility = m > 0 ? std::max(0.0, -slack.minCoeff()) : 0.0;
  r.dual_infeasibility = m > 0 ? std::max(0.0, -duals.minCoeff()) : 0.0;
  r.complementarity = m > 0 ? inf_norm(duals.cwiseProduct(slack)) : 0.0;

  const double mu_scale = 1.0 + inf_norm(duals);
  const double bound_scale =
      1.0 + std::max(inf_norm(problem.constraint_bound), m > 0 ? inf_norm(problem.constraint_matrix * w) : 0.0);
  const double grad_scale = 1.0 + std::max({inf_norm(hw), inf_norm(problem.linear), inf_norm(gt_mu)});
  r.scaled_residual = std::max({r.stationarity / grad_scale, r.primal_infeasibility / bound_scale,
                                r.dual_infeasibility / mu_scale, r.complementarity / (mu_scale * bound_scale)});
  return r;
}

namespace {

constexpr double kFeasibilityTol = 1e-9;
constexpr double kStepTol = 1e-11;
constexpr double kDualTol = 1e-10;
constexpr double kDependenceTol = 1e-9;
constexpr int kDegenerateRun = 8;

// Core primal active-set iteration on a strictly convex problem that has
// already been equilibrated. Keeps the current point feasible at all times.
class ActiveSetCore {
 public:
  ActiveSetCore(const MatrixXd& h, const VectorXd& c, const MatrixXd& g, const VectorXd& b)
      : h_(h), c_(c), g_(g), b_(b), llt_(h) {}

  bool factorized() const { return llt_.info() == Eigen::Success; }

  void set_linear(const VectorXd& c) { c_ = c; }

  struct Result {
    bool converged = false;
    int iterations = 0;
  };

  // Iterates from (w, working) until optimal or the iteration budget runs out.
  // `history`, when non-null, receives the objective after each iteration.
  Result run(VectorXd& w, std::vector<int>& working, VectorXd& mu_working, int budget,
             std::vector<double>* history) {
    const Index n = w.size();
    const Index m = b_.size();
    if (z_.cols() != m) {
      z_ = llt_.matrixL().solve(g_.transpose());
    }
    std::vector<char> in_working(static_cast<std::size_t>(m), 0);
    for (int i : working) in_working[static_cast<std::size_t>(i)] = 1;

    Result res;
    bool at_subproblem_min = false;
    int degenerate_steps = 0;
    while (res.iterations < budget) {
      ++res.iterations;
      const VectorXd grad = h_ * w + c_;
      const VectorXd q = llt_.matrixL().solve(grad);
      const Index k = static_cast<Index>(working.size());

      VectorXd mu(k);
      VectorXd projected = q;
      MatrixXd zw(n, k);
      Eigen::HouseholderQR<MatrixXd> qr;
      if (k > 0) {
        for (Index j = 0; j < k; ++j) zw.col(j) = z_.col(working[static_cast<std::size_t>(j)]);
        qr.compute(zw);
        const VectorXd qtq = qr.householderQ().adjoint() * q;
        const auto r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
        mu = -r.solve(qtq.head(k));
        projected = q + zw * mu;
      }
      const VectorXd p = -llt_.matrixU().solve(projected);

      const double p_norm = inf_norm(p);
      if (at_subproblem_min || p_norm <= kStepTol * (1.0 + inf_norm(w))) {
        // Stationary on the current working set: check multiplier signs.
        // The most negative multiplier leaves, except during a long run of
        // zero-length steps where the lowest index leaves to rule out cycling.
        const double tol = kDualTol * (1.0 + inf_norm(grad));
        const bool lowest_index = degenerate_steps > kDegenerateRun;
        Index leave = -1;
        double most_negative = -tol;
        for (Index j = 0; j < k; ++j) {
          if (mu[j] < most_negative) {
            most_negative = mu[j];
            leave = j;
            if (lowest_index) break;
          }
        }
        if (leave < 0) {
          mu_working = mu;
          res.converged = true;
          record(history, w);
          return res;
        }
        in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(leave)])] = 0;
        working.erase(working.begin() + leave);
        at_subproblem_min = false;
        record(history, w);
        continue;
      }

      // Ratio test over constraints outside the working set. A row in the
      // span of the working set has g p = 0 up to rounding; letting it block
      // would make the working set rank deficient, so such rows are skipped.
      const VectorXd gp = g_ * p;
      const double dir_tol = 1e-14 * p_norm;
      std::vector<char> dependent(static_cast<std::size_t>(m), 0);
      double alpha = 1.0;
      Index blocking = -1;
      while (true) {
        alpha = 1.0;
        blocking = -1;
        for (Index i = 0; i < m; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          if (in_working[ui] || dependent[ui] || gp[i] <= dir_tol) continue;
          const double room = std::max(0.0, b_[i] - g_.row(i).dot(w));
          const double step = room / gp[i];
          if (step < alpha) {
            alpha = step;
            blocking = i;
          }
        }
        if (blocking < 0 || k == 0 || !in_span(qr, z_.col(blocking))) break;
        dependent[static_cast<std::size_t>(blocking)] = 1;
      }
      w += alpha * p;
      degenerate_steps = alpha > 0.0 ? 0 : degenerate_steps + 1;
      if (blocking >= 0) {
        // Keep the working set sorted so the leaving rule sees ascending indices.
        working.insert(std::upper_bound(working.begin(), working.end(), static_cast<int>(blocking)),
                       static_cast<int>(blocking));
        in_working[static_cast<std::size_t>(blocking)] = 1;
        at_subproblem_min = false;
      } else {
        at_subproblem_min = true;
      }
      record(history, w);
    }
    mu_working = VectorXd::Zero(static_cast<Index>(working.size()));
    return res;
  }

 private:
  // True if `v` lies in the column space of the factored working-set matrix.
  static bool in_span(const Eigen::HouseholderQR<MatrixXd>& qr, const VectorXd& v) {
    const Index k = qr.matrixQR().cols();
    VectorXd qtv = qr.householderQ().adjoint() * v;
    const double outside = qtv.tail(qtv.size() - k).norm();
    return outside <= kDependenceTol * v.norm();
  }

  void record(std::vector<double>* history, const VectorXd& w) const {
    if (history != nullptr) history->push_back(0.5 * w.dot(h_ * w) + c_.dot(w));
  }

  MatrixXd h_;
  VectorXd c_;
  MatrixXd g_;
  VectorXd b_;
  Eigen::LLT<MatrixXd> llt_;
  MatrixXd z_;
};

struct ScaledProblem {
  MatrixXd h;
  VectorXd c;
  MatrixXd g;
  VectorXd b;
  VectorXd col_scale;           // w = col_scale .* w_scaled
  VectorXd row_scale;           // kept rows: g = row_scale .* (G D)
  std::vector<Index> kept_rows; // original index of each scaled row
  bool trivially_infeasible = false;
};

ScaledProblem equilibrate(const QpProblem& p) {
  ScaledProblem s;
  const Index n = p.num_variables();
  const Index m = p.num_constraints();
  s.col_scale = VectorXd::Ones(n);
  for (Index j = 0; j < n; ++j) {
    const double d = p.hessian(j, j);
    if (d > 0.0) s.col_scale[j] = 1.0 / std::sqrt(d);
  }
  s.h = s.col_scale.asDiagonal() * p.hessian * s.col_scale.asDiagonal();
  s.h = 0.5 * (s.h + s.h.transpose());
  s.c = s.col_scale.cwiseProduct(p.linear);

  std::vector<Index> rows;
  std::vector<double> scales;
  for (Index i = 0; i < m; ++i) {
    const double norm = (p.constraint_matrix.row(i).transpose().cwiseProduct(s.col_scale)).cwiseAbs().maxCoeff();
    if (norm == 0.0) {
      if (p.constraint_bound[i] < -kFeasibilityTol) s.trivially_infeasible = true;
      continue;
    }
    rows.push_back(i);
    scales.push_back(1.0 / norm);
  }
  const Index kept = static_cast<Index>(rows.size());
  s.g.resize(kept, n);
  s.b.resize(kept);
  s.row_scale.resize(kept);
  for (Index r = 0; r < kept; ++r) {
    const Index i = rows[static_cast<std::size_t>(r)];
    const double rs = scales[static_cast<std::size_t>(r)];
    s.g.row(r) = rs * p.constraint_matrix.row(i).cwiseProduct(s.col_scale.transpose());
    s.b[r] = rs * p.constraint_bound[i];
    s.row_scale[r] = rs;
  }
  s.kept_rows = std::move(rows);
  return s;
}

double max_violation(const MatrixXd& g, const VectorXd& b, const VectorXd& w) {
  if (b.size() == 0) return 0.0;
  return std::max(0.0, (g * w - b).maxCoeff());
}

struct CoreOutcome {
  VectorXd w;
  std::vector<int> working;
  VectorXd mu_working;
  QpStatus status = QpStatus::kMaxIterations;
  int iterations = 0;
  std::vector<double> history;
};

// Solves the equilibrated, strictly convex problem from `start`.
CoreOutcome solve_strictly_convex(const ScaledProblem& s, const VectorXd& start, const QpOptions& options) {
  CoreOutcome out;
  const Index n = s.c.size();
  const Index m = s.b.size();
  ActiveSetCore core(s.h, s.c, s.g, s.b);
  if (!core.factorized()) {
    throw ConfigError("QP Hessian is not positive definite");
  }

  VectorXd w = start;
  std::vector<int> working;
  int used = 0;

  const double viol = max_violation(s.g, s.b, w);
  if (viol > kFeasibilityTol * (1.0 + inf_norm(s.b))) {
    // Elastic phase: one extra variable t >= 0 relaxes every row,
    // minimize f(w) + M t + t^2 / 2. A solution with t = 0 solves the original problem.
    MatrixXd ha = MatrixXd::Zero(n + 1, n + 1);
    ha.topLeftCorner(n, n) = s.h;
    ha(n, n) = 1.0;
    MatrixXd ga = MatrixXd::Zero(m + 1, n + 1);
    ga.topLeftCorner(m, n) = s.g;
    ga.block(0, n, m, 1).setConstant(-1.0);
    ga(m, n) = -1.0;
    VectorXd ba = VectorXd::Zero(m + 1);
    ba.head(m) = s.b;
    double penalty = 1e3 * std::max(1.0, inf_norm(s.c));
    VectorXd ca(n + 1);
    ca.head(n) = s.c;
    ca[n] = penalty;
    ActiveSetCore elastic(ha, ca, ga, ba);
    VectorXd wa(n + 1);
    wa.head(n) = w;
    wa[n] = viol;
    std::vector<int> working_a;
    VectorXd mu_a;
    bool feasible = false;
    // Beyond ~1e9 relative penalty the subproblem is dominated by rounding,
    // so a positive t there is taken as proof of infeasibility.
    const double max_penalty = 1e9 * std::max(1.0, inf_norm(s.c));
    while (used < options.max_iterations) {
      const auto r = elastic.run(wa, working_a, mu_a, options.max_iterations - used, nullptr);
      used += r.iterations;
      if (!r.converged) break;
      if (wa[n] <= kFeasibilityTol &&
          max_violation(s.g, s.b, wa.head(n)) <= kFeasibilityTol * (1.0 + inf_norm(s.b))) {
        feasible = true;
        break;
      }
      if (penalty >= max_penalty) break;
      penalty *= 1e3;
      ca[n] = penalty;
      elastic.set_linear(ca);
    }
    if (!feasible) {
      out.w = wa.head(n);
      out.iterations = used;
      out.status = used >= options.max_iterations ? QpStatus::kMaxIterations : QpStatus::kInfeasible;
      return out;
    }
    w = wa.head(n);
    // Rows that stayed tight with t = 0 are active in the original problem.
    const bool t_active = std::binary_search(working_a.begin(), working_a.end(), static_cast<int>(m));
    if (t_active) {
      for (int i : working_a) {
        if (i < m) working.push_back(i);
      }
    }
  }

  VectorXd mu;
  const auto r = core.run(w, working, mu, std::max(0, options.max_iterations - used),
                          options.record_objective ? &out.history : nullptr);
  used += r.iterations;
  out.w = std::move(w);
  out.working = std::move(working);
  out.mu_working = std::move(mu);
  out.iterations = used;
  out.status = r.converged ? QpStatus::kSolved : QpStatus::kMaxIterations;
  return out;
}

QpSolution finish(const QpProblem& problem, const ScaledProblem& s, const CoreOutcome& core) {
  QpSolution sol;
  sol.status = core.status;
  sol.iterations = core.iterations;
  sol.w = s.col_scale.cwiseProduct(core.w);
  sol.duals = VectorXd::Zero(problem.num_constraints());
  if (core.mu_working.size() == static_cast<Index>(core.working.size())) {
    for (std::size_t j = 0; j < core.working.size(); ++j) {
      const Index r = core.working[j];
      const Index original = s.kept_rows[static_cast<std::size_t>(r)];
      sol.duals[original] = s.row_scale[r] * core.mu_working[static_cast<Index>(j)];
      sol.active_set.push_back(static_cast<int>(original));
    }
  }
  std::sort(sol.active_set.begin(), sol.active_set.end());
  sol.objective = qp_objective(problem, sol.w);
  sol.kkt = kkt_report(problem, sol.w, sol.duals);
  sol.kkt_residual = sol.kkt.scaled_residual;
  const double offset = problem.constant;
  sol.objective_history.reserve(core.history.size());
  for (double v : core.history) sol.objective_history.push_back(v + offset);
  return sol;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  problem.validate();
  const Index n = problem.num_variables();
  ScaledProblem s = equilibrate(problem);
  if (s.trivially_infeasible) {
    QpSolution sol;
    sol.w = VectorXd::Zero(n);
    sol.duals = VectorXd::Zero(problem.num_constraints());
    sol.status = QpStatus::kInfeasible;
    sol.objective = qp_objective(problem, sol.w);
    sol.kkt = kkt_report(problem, sol.w, sol.duals);
    sol.kkt_residual = sol.kkt.scaled_residual;
    return sol;
  }

  VectorXd start = VectorXd::Zero(n);
  if (problem.warm_start) start = problem.warm_start->cwiseQuotient(s.col_scale);

  const Eigen::LLT<MatrixXd> probe(s.h);
  if (probe.info() == Eigen::Success) {
    return finish(problem, s, solve_strictly_convex(s, start, options));
  }

  // Positive semidefinite Hessian: proximal-point outer loop, each subproblem
  // strictly convex. Subproblem multipliers converge to those of the original
  // problem. The proximal weight is relative to the unit diagonal
  // produced by equilibration.
  constexpr double kProx = 1e-2;
  ScaledProblem prox = s;
  prox.h += kProx * MatrixXd::Identity(n, n);
  CoreOutcome outcome;
  outcome.status = QpStatus::kMaxIterations;
  VectorXd center = start;
  int used = 0;
  QpOptions inner = options;
  inner.record_objective = false;
  for (int outer = 0; outer < 2000; ++outer) {
    prox.c = s.c - kProx * center;
    outcome = solve_strictly_convex(prox, center, inner);
    used += outcome.iterations;
    outcome.iterations = used;
    if (outcome.status != QpStatus::kSolved) break;
    const double move = inf_norm(outcome.w - center);
    center = outcome.w;
    if (move <= 1e-12 * (1.0 + inf_norm(center))) {
      return finish(problem, s, outcome);
    }
  }
  if (outcome.status == QpStatus::kSolved) outcome.status = QpStatus::kMaxIterations;
  return finish(problem, s, outcome);
}

}  // namespace pcac
