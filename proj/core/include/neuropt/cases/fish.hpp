#pragma once

#include <variant>

#include "neuropt/cases/fields.hpp"
#include "neuropt/learned/mlp.hpp"
#include "neuropt/nlpsolve/problem.hpp"
#include "neuropt/symgraph/function.hpp"

namespace neuropt::cases {

/// Fish crossing a river past a stone at the origin.
struct FishParams {
  Vector p0;    // start position
  Vector pf;    // goal position
  int N = 60;   // steps
  double dt = 0.15;
  Vector u_lo;  // input bounds, m/s
  Vector u_hi;
  Vector p_lo;  // river box
  Vector p_hi;
  double r_st = 0.35;

  void validate() const;
};

/// Default scenario. Upstream crossing against a 0.6 m/s stream with two
/// drifting counter-rotating vortices behind the stone.
FishParams default_fish_params();
FlowFieldParams default_flow_field();

/// A fitted network taking (t, p_x, p_y) to (v_x, v_y), or the analytic field.
using FlowModel = std::variant<MlpSpec, FlowFieldParams>;

/// Flow velocity expression at time `t` (1,1) and position `p` (2,1).
sym::ExprRef flow_model_expr(const FlowModel& flow, const sym::ExprRef& t, const sym::ExprRef& p);
Vector flow_model_value(const FlowModel& flow, double t, const Vector& p);

/// Decision vector layout: x_0..x_N, then u_0..u_{N-1}, two entries each.
inline int fish_state_offset(int k) { return 2 * k; }
inline int fish_input_offset(const FishParams& fp, int k) { return 2 * (fp.N + 1) + 2 * k; }
inline int fish_decision_size(const FishParams& fp) { return 2 * (fp.N + 1) + 2 * fp.N; }

/// Minimum input-rate transcription with explicit Euler dynamics, box bounds
/// and the stone as |x_k|^2 >= r_st^2. Constraint rows: x_0 = p0, x_N = pf,
/// then 2N dynamics residuals, then N+1 obstacle rows. The initial guess
/// bends the straight line around the stone and picks inputs consistent
/// with the dynamics. Throws ValidationError on an MLP of the wrong shape.
NlpProblem build_fish_nlp(const FishParams& fp, const FlowModel& flow);

/// x + dt * (u + v(t, x)) with inputs x (2,1), u (2,1), t (1,1).
sym::SymFunction fish_dynamics_function(const FlowModel& flow, double dt);

struct FishTrajectory {
  Matrix x;  // (N+1, 2)
  Matrix u;  // (N, 2)
};

FishTrajectory fish_trajectory(const FishParams& fp, const Vector& z);

/// Largest |x_{k+1} - x_k - dt (u_k + v(t_k, x_k))| under `flow`.
double fish_dynamics_residual(const FishParams& fp, const FishTrajectory& tr, const FlowModel& flow);
/// Smallest |x_k|^2 - r_st^2 over the knots.
double fish_obstacle_margin(const FishParams& fp, const FishTrajectory& tr);

}  // namespace neuropt::cases
