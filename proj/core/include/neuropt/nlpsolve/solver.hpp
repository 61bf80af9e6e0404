#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neuropt/linalg.hpp"
#include "neuropt/nlpsolve/problem.hpp"

namespace neuropt {

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 500;
  double mu_init = 0.1;
  std::optional<double> mu_min;  // tol / 10 when unset
  double kappa_mu = 0.2;
  double theta_mu = 1.5;
  double tau_min = 0.99;
  double reg_init = 1e-8;
  /// Keep a copy of x in every trace entry.
  bool record_iterates = false;
  /// Receives one "iter k | mu | f | ||g_viol|| | kkt | step" line per iterate.
  std::function<void(const std::string&)> log;

  double effective_mu_min() const { return mu_min ? *mu_min : tol / 10.0; }
  void validate() const;
};

enum class SolveStatus { Converged, MaxIterations, Diverged, RestorationFailed };

/// "converged", "max_iterations", "diverged", "restoration_failed".
std::string_view status_name(SolveStatus s);

/// Iterate of the barrier formulation. Each constraint row with gl == gu is an
/// equality residual g - gl; otherwise each finite side gets a residual with
/// its own slack: g - gl - s and gu - g - s, in row order, lower side first.
/// `y` holds one multiplier per residual, `v` one per slack. Bound duals are
/// length n, zero where the bound is infinite.
struct PrimalDualPoint {
  Vector x;
  Vector s;
  Vector y;
  Vector zl;
  Vector zu;
  Vector v;
};

/// Builds the point the solver starts from: x moved into the interior, slacks
/// from g(x) pushed off zero, bound and slack duals mu / slack, y zero.
PrimalDualPoint initial_point(const NlpProblem& p, const Vector& x, double mu);

/// Scaled optimality error: max of the dual residual divided by
/// max(100, mean |duals|) / 100, the residual norm, and the complementarity
/// residual against mu (all infinity norms).
double kkt_error(const NlpProblem& p, const PrimalDualPoint& point, double mu);

struct TraceEntry {
  int iteration = 0;  // 0 is the starting point
  double mu = 0.0;
  double objective = 0.0;
  double violation = 0.0;  // max violation of the original constraints and bounds
  double kkt_error = 0.0;  // at mu = 0
  double alpha_primal = 0.0;
  double alpha_dual = 0.0;
  double merit_before = 0.0;  // l1 merit at the previous iterate, same mu and penalty
  double merit_after = 0.0;
  double penalty = 0.0;
  double delta_w = 0.0;
  int backtracks = 0;
  Vector x;  // only with record_iterates
};

struct Solution {
  SolveStatus status = SolveStatus::MaxIterations;
  Vector x;
  /// lambda with grad f + J^T lambda - zl + zu = 0 at a stationary point.
  Vector constraint_duals;
  Vector lower_bound_duals;
  Vector upper_bound_duals;
  int iterations = 0;
  double kkt_error = 0.0;
  double objective_value = 0.0;
  double constraint_violation = 0.0;
  std::string message;
  PrimalDualPoint point;
  std::vector<TraceEntry> trace;
};

/// Primal-dual interior-point method: monotone barrier updates, Newton steps
/// on the regularized KKT system, fraction-to-boundary rule and an l1-merit
/// backtracking line search.
Solution solve(const NlpProblem& p, const SolverOptions& opts = {});

/// As solve(), starting from x_start with the first barrier parameter set to
/// mu_init.
Solution solve_warm(const NlpProblem& p, const Vector& x_start, double mu_init,
                    const SolverOptions& opts = {});

}  // namespace neuropt
