#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "neuropt/cases/fields.hpp"
#include "neuropt/error.hpp"
#include "neuropt/learned/mlp.hpp"
#include "neuropt/nlpsolve/problem.hpp"
#include "neuropt/nlpsolve/solver.hpp"

namespace neuropt::cases {

struct Waypoint {
  double time = 0.0;
  Vector position;  // 3
};

struct TrajParams {
  int degree = 9;
  Vector p0;  // 3
  Vector pf;  // 3
  double T = 8.0;
  int N = 40;  // samples t_k = k T / N, k = 0..N
  double rho_bar = 1.0;
  std::vector<Waypoint> waypoints;

  void validate() const;
};

inline constexpr double kWaypointWeight = 1e3;
inline constexpr double kDensityMargin = 1e-3;   // rho <= rho_bar - margin
inline constexpr double kPhase2Mu = 1e-4;

/// Standard scenario: one blob sitting across the straight line p0 -> pf.
TrajParams default_traj_params();
DensityFieldParams default_density_field();
/// Three start/goal variations of the standard scenario, with waypoints.
std::vector<TrajParams> traj_configurations();

/// Five waypoints evenly spaced in time on the straight line from p0 to pf,
/// each pushed radially out of any blob it falls in (to radius + clearance).
std::vector<Waypoint> default_waypoints(const Vector& p0, const Vector& pf, double T,
                                        const DensityFieldParams& obstacles, double clearance = 0.45);

/// A fitted network taking a 3D position to a density, or the analytic field.
using DensityModel = std::variant<MlpSpec, DensityFieldParams>;
sym::ExprRef density_model_expr(const DensityModel& density, const sym::ExprRef& p);
double density_model_value(const DensityModel& density, const Vector& p);

/// d-th time derivative of r(t) = sum_i C_i t^i, C one row per power.
Vector poly_eval(const Matrix& C, double t, int deriv);

/// The decision vector holds time-normalized coefficients, row-major over
/// (power, axis): z[3 i + a] = C(i, a) * T^i. This keeps the snap Hessian
/// well conditioned; the map is diagonal.
Vector coeffs_to_decision(const Matrix& C, double T);
Matrix decision_to_coeffs(const Vector& z, int degree, double T);

/// r^(d)(t) as a (3,1) expression of a normalized decision vector z.
sym::ExprRef poly_expr(const sym::ExprRef& z, int degree, double T, double t, int deriv);

/// sum_k |r''''(t_k)|^2 over the sample grid, for any degree.
sym::ExprRef snap_cost_expr(const sym::ExprRef& z, int degree, double T, int N);

/// Minimum-snap NLP over the normalized coefficients. Rows: position,
/// velocity and acceleration at t = 0 then at t = T (18 equalities), then,
/// with include_density, one density row per sample. Tracked waypoints add
/// kWaypointWeight * |r(t_w) - p_w|^2 to the objective.
NlpProblem build_min_snap_nlp(const TrajParams& tp, const DensityModel& density, bool include_density,
                              const std::optional<std::vector<Waypoint>>& tracked_waypoints);

/// Phase 2 was not started because the phase-1 trajectory already violates
/// the density bound at a sample.
class InfeasibleStartError : public Error {
 public:
  InfeasibleStartError(const std::string& what, int sample, double density)
      : Error(what), sample_(sample), density_(density) {}
  int sample() const { return sample_; }
  double density() const { return density_; }

 private:
  int sample_;
  double density_;
};

struct TwoPhaseResult {
  Solution phase1;
  std::optional<Solution> phase2;  // empty when phase 1 did not converge
};

/// Phase 1 tracks tp.waypoints without the density rows; phase 2 solves the
/// full problem warm-started from the phase-1 coefficients with the first
/// barrier parameter mu_phase2. Throws InfeasibleStartError when phase 1
/// ends inside the density bound.
TwoPhaseResult solve_two_phase(const TrajParams& tp, const DensityModel& density, const SolverOptions& opts,
                               double mu_phase2 = kPhase2Mu);

/// Density under `density` at every sample of a normalized decision vector.
Vector sampled_densities(const TrajParams& tp, const DensityModel& density, const Vector& z);

}  // namespace neuropt::cases
