#include "pcac/oracles.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "pcac/error.hpp"
#include "pcac/rls.hpp"

namespace pcac::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

ContinuousModel hover_jacobian(const VehicleParams& params, double step) {
  const StateVector x0 = StateVector::Zero();
  const InputVector u0(params.mass * params.gravity, 0.0, 0.0, 0.0);
  ContinuousModel m;
  for (int j = 0; j < kStateDim; ++j) {
    StateVector xp = x0, xm = x0;
    xp[j] += step;
    xm[j] -= step;
    m.a.col(j) = (state_derivative(xp, u0, params) - state_derivative(xm, u0, params)) / (2.0 * step);
  }
  for (int j = 0; j < kInputDim; ++j) {
    InputVector up = u0, um = u0;
    up[j] += step;
    um[j] -= step;
    m.b.col(j) = (state_derivative(x0, up, params) - state_derivative(x0, um, params)) / (2.0 * step);
  }
  return m;
}

DiscreteModel zoh_quadrature(const Mat12& a, const Mat12x4& b, double sample_time, int panels) {
  if (panels <= 0 || !(sample_time > 0.0)) throw ConfigError("quadrature needs positive panels and sample time");
  const double h = sample_time / panels;
  // Three-point Gauss-Legendre on [0, 1].
  const double r = std::sqrt(0.6) / 2.0;
  const double nodes[3] = {0.5 - r, 0.5, 0.5 + r};
  const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  Mat12 node_exp[3];
  for (int j = 0; j < 3; ++j) node_exp[j] = (a * (nodes[j] * h)).exp();
  const Mat12 panel_exp = (a * h).exp();

  // expm(A s_p) is advanced panel by panel; expm(A (s_p + c h)) = expm(A s_p) expm(A c h).
  Mat12 start = Mat12::Identity();
  Mat12 integral = Mat12::Zero();
  for (int p = 0; p < panels; ++p) {
    Mat12 panel_sum = Mat12::Zero();
    for (int j = 0; j < 3; ++j) panel_sum += weights[j] * node_exp[j];
    integral += start * panel_sum * h;
    start = start * panel_exp;
  }
  DiscreteModel d;
  d.ad = (a * sample_time).exp();
  d.bd = integral * b;
  return d;
}

ThetaVector batch_least_squares(const ThetaVector& theta0, double p0_scale, const std::vector<Mat12>& phis,
                                const std::vector<Vec12>& targets, const std::vector<double>& lambdas) {
  const std::size_t k = phis.size();
  if (targets.size() != k || lambdas.size() != k) throw ConfigError("batch data lengths differ");

  // weight[i] = lambda_{i+1} * ... * lambda_{k-1}; the prior carries all of them.
  std::vector<double> weight(k, 1.0);
  double tail = 1.0;
  for (std::size_t i = k; i-- > 0;) {
    weight[i] = tail;
    tail *= lambdas[i];
  }
  Mat12 normal = (tail / p0_scale) * Mat12::Identity();
  Vec12 rhs = (tail / p0_scale) * theta0;
  for (std::size_t i = 0; i < k; ++i) {
    normal += weight[i] * phis[i].transpose() * phis[i];
    rhs += weight[i] * phis[i].transpose() * targets[i];
  }
  return normal.colPivHouseholderQr().solve(rhs);
}

EnumerationResult enumerate_active_sets(const QpProblem& problem, double tolerance) {
  problem.validate();
  const int n = static_cast<int>(problem.num_variables());
  const int m = static_cast<int>(problem.num_constraints());
  if (m > 20) throw ConfigError("enumeration limited to 20 constraints");
  const Eigen::LLT<MatrixXd> chol(problem.hessian);
  if (chol.info() != Eigen::Success) throw ConfigError("enumeration needs a positive definite Hessian");

  const MatrixXd& g = problem.constraint_matrix;
  const VectorXd& h = problem.constraint_bound;
  const VectorXd hinv_c = chol.solve(problem.linear);
  const MatrixXd hinv_gt = chol.solve(g.transpose());
  const double scale = 1.0 + h.cwiseAbs().maxCoeff() + g.cwiseAbs().maxCoeff();

  EnumerationResult result;
  const std::uint32_t total = 1u << m;
  for (int size = 0; size <= std::min(n, m); ++size) {
    for (std::uint32_t mask = 0; mask < total; ++mask) {
      if (std::popcount(mask) != size) continue;
      std::vector<int> set;
      for (int i = 0; i < m; ++i) {
        if (mask & (1u << i)) set.push_back(i);
      }
      VectorXd w = -hinv_c;
      VectorXd mu;
      if (size > 0) {
        MatrixXd gs(size, n), hinv_gst(n, size);
        VectorXd hs(size);
        for (int r = 0; r < size; ++r) {
          gs.row(r) = g.row(set[r]);
          hinv_gst.col(r) = hinv_gt.col(set[r]);
          hs[r] = h[set[r]];
        }
        const MatrixXd schur = gs * hinv_gst;
        const Eigen::FullPivLU<MatrixXd> lu(schur);
        if (lu.rank() < size) continue;
        mu = lu.solve(-hs - gs * hinv_c);
        if (mu.minCoeff() < -tolerance * scale) continue;
        w = -hinv_c - hinv_gst * mu;
      }
      if (m > 0 && (g * w - h).maxCoeff() > tolerance * scale) continue;
      result.feasible = true;
      result.w = w;
      result.objective = qp_objective(problem, w);
      result.active_set = set;
      return result;
    }
  }
  return result;
}

QpProblem random_strictly_convex_qp(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto random_matrix = [&](int r, int c) {
    MatrixXd out(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) out(i, j) = normal(rng);
    return out;
  };
  QpProblem qp;
  const MatrixXd l = random_matrix(n, n);
  qp.hessian = l * l.transpose() + 0.1 * MatrixXd::Identity(n, n);
  // Large linear terms push the unconstrained minimizer outside the polytope.
  qp.linear = 5.0 * random_matrix(n, 1).col(0);
  qp.constraint_matrix = random_matrix(m, n);
  const VectorXd interior = random_matrix(n, 1).col(0);
  qp.constraint_bound = qp.constraint_matrix * interior;
  for (int i = 0; i < m; ++i) qp.constraint_bound[i] += uniform(rng);
  return qp;
}

namespace {

std::string format(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

}  // namespace

CheckResult check_discretization(int random_cases, std::uint64_t seed) {
  CheckResult out{"discretization-quadrature", true, 0.0, 1e-10, ""};
  auto compare = [&](const VehicleParams& params, double ts) {
    const ContinuousModel c = build_continuous(params);
    const DiscreteModel closed = discretize(c.a, c.b, ts);
    const DiscreteModel quad = zoh_quadrature(c.a, c.b, ts);
    const double err = std::max((closed.ad - quad.ad).cwiseAbs().maxCoeff(), (closed.bd - quad.bd).cwiseAbs().maxCoeff());
    out.max_error = std::max(out.max_error, err);
  };
  compare(VehicleParams{}, 0.1);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.5, 10.0), inertia(0.01, 1.0), ts(0.01, 0.5);
  for (int i = 0; i < random_cases; ++i) {
    VehicleParams p;
    p.mass = mass(rng);
    p.inertia = Vec3(inertia(rng), inertia(rng), inertia(rng));
    compare(p, ts(rng));
  }
  out.passed = out.max_error < out.tolerance;
  out.detail = format("%.0f parameter sets, max |closed form - quadrature| = %.3g", random_cases + 1.0, out.max_error);
  return out;
}

CheckResult check_rls_batch(int steps, std::uint64_t seed) {
  CheckResult out{"rls-batch-equivalence", true, 0.0, 1e-8, ""};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const LinearHoverModel model = make_hover_model(VehicleParams{}, 0.1);
  const ThetaVector truth = true_theta(model.bd);
  const ThetaVector theta0 = ThetaVector::Constant(1e-2);
  const double p0 = 1e6;

  RlsIdentifier identifier(theta0, p0, VrfConfig{});
  std::vector<Mat12> phis;
  std::vector<Vec12> targets;
  std::vector<double> lambdas;
  Vec12 y_prev = Vec12::Zero();
  for (int k = 0; k < steps; ++k) {
    InputVector u;
    for (int j = 0; j < kInputDim; ++j) u[j] = normal(rng);
    Vec12 noise;
    for (int j = 0; j < kStateDim; ++j) noise[j] = 1e-3 * normal(rng);
    // Keep the synthetic state bounded; only the increments matter to the estimator.
    const Vec12 y = 0.5 * model.ad * y_prev + regressor(u) * truth + noise;
    const auto step = identifier.update(y, y_prev, u, model.ad);
    phis.push_back(regressor(u));
    targets.push_back(y - model.ad * y_prev);
    lambdas.push_back(step.lambda);
    const ThetaVector batch = batch_least_squares(theta0, p0, phis, targets, lambdas);
    out.max_error = std::max(out.max_error, (batch - identifier.theta()).cwiseAbs().maxCoeff());
    y_prev = y;
  }
  out.passed = out.max_error < out.tolerance;
  out.detail = format("%.0f steps, max |recursive - batch| = %.3g", steps, out.max_error);
  return out;
}

CheckResult check_qp_enumeration(int instances, std::uint64_t seed) {
  CheckResult out{"qp-active-set-enumeration", true, 0.0, 1e-6, ""};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> nvar(1, 12), ncon(1, 15);
  int failures = 0;
  for (int i = 0; i < instances; ++i) {
    const QpProblem qp = random_strictly_convex_qp(rng, nvar(rng), ncon(rng));
    const QpSolution sol = solve_qp(qp);
    const EnumerationResult ref = enumerate_active_sets(qp);
    if (sol.status != QpStatus::kSolved || !ref.feasible) {
      ++failures;
      continue;
    }
    const double err = std::abs(sol.objective - ref.objective) / std::max(1.0, std::abs(ref.objective));
    out.max_error = std::max(out.max_error, err);
  }
  out.passed = failures == 0 && out.max_error < out.tolerance;
  out.detail = format("%.0f instances, max relative objective gap = %.3g", instances, out.max_error);
  if (failures) out.detail += ", " + std::to_string(failures) + " unsolved";
  return out;
}

std::vector<CheckResult> run_verify_suite() {
  return {check_discretization(), check_rls_batch(), check_qp_enumeration()};
}

}  // namespace pcac::oracle
