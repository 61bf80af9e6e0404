#include "neuropt/cases/min_snap.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "neuropt/error.hpp"

namespace neuropt::cases {

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

double falling(int i, int d) {
  double f = 1.0;
  for (int j = 0; j < d; ++j) f *= i - j;
  return f;
}

// Rows mapping the normalized decision vector to r^(d)(t), (3, 3(degree+1)).
Matrix basis_rows(int degree, double T, double t, int deriv) {
  Matrix M = Matrix::Zero(3, 3 * (degree + 1));
  const double tau = t / T;
  const double scale = std::pow(T, -deriv);
  for (int i = deriv; i <= degree; ++i) {
    const double w = falling(i, deriv) * std::pow(tau, i - deriv) * scale;
    for (int a = 0; a < 3; ++a) M(a, 3 * i + a) = w;
  }
  return M;
}

Matrix stack(const std::vector<Matrix>& parts) {
  Eigen::Index rows = 0;
  for (const Matrix& m : parts) rows += m.rows();
  Matrix out(rows, parts.front().cols());
  Eigen::Index r = 0;
  for (const Matrix& m : parts) {
    out.middleRows(r, m.rows()) = m;
    r += m.rows();
  }
  return out;
}

void check_density_mlp(const MlpSpec& spec) {
  spec.validate();
  if (spec.in_features != 3 || spec.out_features() != 1) {
    throw ValidationError(fmt::format("density model must map a 3D position to 1 output, got {} -> {}",
                                      spec.in_features, spec.out_features()));
  }
}

double sample_time(const TrajParams& tp, int k) { return tp.T * k / tp.N; }

}  // namespace

void TrajParams::validate() const {
  if (degree != 9) throw ValidationError(fmt::format("degree must be 9, got {}", degree));
  if (p0.size() != 3 || !p0.allFinite()) throw ValidationError("p0 must be a finite 3-vector");
  if (pf.size() != 3 || !pf.allFinite()) throw ValidationError("pf must be a finite 3-vector");
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("T must be positive");
  if (N < degree + 1) throw ValidationError(fmt::format("N must be at least degree + 1 = {}, got {}", degree + 1, N));
  if (!std::isfinite(rho_bar)) throw ValidationError("rho_bar must be finite");
  for (std::size_t w = 0; w < waypoints.size(); ++w) {
    const Waypoint& wp = waypoints[w];
    if (!(wp.time >= 0.0 && wp.time <= T)) throw ValidationError(fmt::format("waypoint {} time outside [0, T]", w));
    if (wp.position.size() != 3 || !wp.position.allFinite()) {
      throw ValidationError(fmt::format("waypoint {} position must be a finite 3-vector", w));
    }
  }
}

DensityFieldParams default_density_field() {
  DensityFieldParams d;
  d.blobs.push_back(Blob{vec3(0.0, 0.2, 1.0), 0.6, 4.0, 10.0});
  return d;
}

std::vector<Waypoint> default_waypoints(const Vector& p0, const Vector& pf, double T,
                                        const DensityFieldParams& obstacles, double clearance) {
  const Vector dir = pf - p0;
  std::vector<Waypoint> out;
  for (int j = 1; j <= 5; ++j) {
    const double s = j / 6.0;
    Vector p = p0 + s * dir;
    for (const Blob& b : obstacles.blobs) {
      Vector d = p - b.center;
      const double reach = b.radius + clearance;
      if (d.norm() >= reach) continue;
      if (d.norm() < 1e-9) {
        d = vec3(dir(1), -dir(0), 0.0);  // horizontal normal
        if (d.norm() < 1e-9) d = vec3(0.0, 1.0, 0.0);
      }
      p = b.center + reach * d.normalized();
    }
    out.push_back(Waypoint{s * T, p});
  }
  return out;
}

TrajParams default_traj_params() {
  TrajParams tp;
  tp.p0 = vec3(-2.0, 0.0, 1.0);
  tp.pf = vec3(2.0, 0.0, 1.0);
  tp.waypoints = default_waypoints(tp.p0, tp.pf, tp.T, default_density_field());
  return tp;
}

std::vector<TrajParams> traj_configurations() {
  std::vector<TrajParams> out;
  const DensityFieldParams field = default_density_field();
  const std::pair<Vector, Vector> ends[] = {
      {vec3(-2.0, 0.0, 1.0), vec3(2.0, 0.0, 1.0)},
      {vec3(-2.0, -0.8, 0.8), vec3(2.0, 0.6, 1.2)},
      {vec3(-2.0, 0.5, 1.3), vec3(2.0, -0.5, 0.7)},
  };
  for (const auto& [a, b] : ends) {
    TrajParams tp;
    tp.p0 = a;
    tp.pf = b;
    tp.waypoints = default_waypoints(a, b, tp.T, field);
    out.push_back(tp);
  }
  return out;
}

sym::ExprRef density_model_expr(const DensityModel& density, const sym::ExprRef& p) {
  if (const auto* spec = std::get_if<MlpSpec>(&density)) {
    check_density_mlp(*spec);
    return embed_mlp(*spec, p);
  }
  return density_expr(p, std::get<DensityFieldParams>(density));
}

double density_model_value(const DensityModel& density, const Vector& p) {
  if (const auto* spec = std::get_if<MlpSpec>(&density)) return eval_mlp(*spec, p)(0);
  return analytic_density(p, std::get<DensityFieldParams>(density));
}

Vector poly_eval(const Matrix& C, double t, int deriv) {
  if (deriv < 0 || deriv > 4) throw ValidationError(fmt::format("derivative order must be in 0..4, got {}", deriv));
  Vector r = Vector::Zero(C.cols());
  for (int i = deriv; i < C.rows(); ++i) {
    r += falling(i, deriv) * std::pow(t, i - deriv) * C.row(i).transpose();
  }
  return r;
}

Vector coeffs_to_decision(const Matrix& C, double T) {
  if (C.cols() != 3) throw ShapeError(fmt::format("coefficients must have 3 columns, got {}", C.cols()));
  Vector z(C.size());
  for (int i = 0; i < C.rows(); ++i) {
    for (int a = 0; a < 3; ++a) z(3 * i + a) = C(i, a) * std::pow(T, i);
  }
  return z;
}

Matrix decision_to_coeffs(const Vector& z, int degree, double T) {
  if (z.size() != 3 * (degree + 1)) {
    throw ShapeError(fmt::format("decision vector must have length {}, got {}", 3 * (degree + 1), z.size()));
  }
  Matrix C(degree + 1, 3);
  for (int i = 0; i <= degree; ++i) {
    for (int a = 0; a < 3; ++a) C(i, a) = z(3 * i + a) / std::pow(T, i);
  }
  return C;
}

sym::ExprRef poly_expr(const sym::ExprRef& z, int degree, double T, double t, int deriv) {
  if (deriv < 0 || deriv > 4) throw ValidationError(fmt::format("derivative order must be in 0..4, got {}", deriv));
  if (z.rows() != 3 * (degree + 1) || z.cols() != 1) {
    throw ShapeError(fmt::format("decision vector must be ({},1), got {}", 3 * (degree + 1), sym::to_string(z.shape())));
  }
  return sym::matmul(z.graph().constant(basis_rows(degree, T, t, deriv)), z);
}

sym::ExprRef snap_cost_expr(const sym::ExprRef& z, int degree, double T, int N) {
  std::vector<Matrix> rows;
  for (int k = 0; k <= N; ++k) rows.push_back(basis_rows(degree, T, T * k / N, 4));
  return sym::sumsq(sym::matmul(z.graph().constant(stack(rows)), z));
}

NlpProblem build_min_snap_nlp(const TrajParams& tp, const DensityModel& density, bool include_density,
                              const std::optional<std::vector<Waypoint>>& tracked_waypoints) {
  tp.validate();
  if (const auto* spec = std::get_if<MlpSpec>(&density)) {
    check_density_mlp(*spec);
  } else {
    std::get<DensityFieldParams>(density).validate();
  }
  const int n = 3 * (tp.degree + 1);
  sym::ExprGraph g;
  const sym::ExprRef z = g.symbol("c", n);

  sym::ExprRef objective = snap_cost_expr(z, tp.degree, tp.T, tp.N);
  if (tracked_waypoints && !tracked_waypoints->empty()) {
    std::vector<Matrix> rows;
    Vector target(3 * static_cast<Eigen::Index>(tracked_waypoints->size()));
    for (std::size_t w = 0; w < tracked_waypoints->size(); ++w) {
      const Waypoint& wp = (*tracked_waypoints)[w];
      rows.push_back(basis_rows(tp.degree, tp.T, wp.time, 0));
      target.segment(3 * static_cast<Eigen::Index>(w), 3) = wp.position;
    }
    const sym::ExprRef miss = sym::matmul(g.constant(stack(rows)), z) - g.column(std::span<const double>(target.data(), target.size()));
    objective = objective + kWaypointWeight * sym::sumsq(miss);
  }

  std::vector<Matrix> ends;
  for (const double t : {0.0, tp.T}) {
    for (int d = 0; d <= 2; ++d) ends.push_back(basis_rows(tp.degree, tp.T, t, d));
  }
  Vector end_values = Vector::Zero(18);
  end_values.head(3) = tp.p0;
  end_values.segment(9, 3) = tp.pf;

  std::vector<sym::ExprRef> rows{sym::matmul(g.constant(stack(ends)), z)};
  if (include_density) {
    for (int k = 0; k <= tp.N; ++k) {
      rows.push_back(density_model_expr(density, poly_expr(z, tp.degree, tp.T, sample_time(tp, k), 0)));
    }
  }
  const int m = 18 + (include_density ? tp.N + 1 : 0);

  NlpDefinition def{.x = z, .objective = objective, .constraints = sym::vcat(rows)};
  def.constraint_lower = Vector::Constant(m, -std::numeric_limits<double>::infinity());
  def.constraint_upper = Vector::Constant(m, tp.rho_bar - kDensityMargin);
  def.constraint_lower.head(18) = end_values;
  def.constraint_upper.head(18) = end_values;
  // Straight line as the starting guess.
  Matrix C = Matrix::Zero(tp.degree + 1, 3);
  C.row(0) = tp.p0.transpose();
  C.row(1) = (tp.pf - tp.p0).transpose() / tp.T;
  def.x_init = coeffs_to_decision(C, tp.T);
  return assemble(std::move(def));
}

Vector sampled_densities(const TrajParams& tp, const DensityModel& density, const Vector& z) {
  const Matrix C = decision_to_coeffs(z, tp.degree, tp.T);
  Vector rho(tp.N + 1);
  for (int k = 0; k <= tp.N; ++k) rho(k) = density_model_value(density, poly_eval(C, sample_time(tp, k), 0));
  return rho;
}

TwoPhaseResult solve_two_phase(const TrajParams& tp, const DensityModel& density, const SolverOptions& opts,
                               double mu_phase2) {
  tp.validate();
  if (tp.waypoints.empty()) throw ValidationError("two-phase solve needs at least one waypoint");
  for (std::size_t w = 0; w < tp.waypoints.size(); ++w) {
    const double rho = density_model_value(density, tp.waypoints[w].position);
    if (!(rho < tp.rho_bar)) {
      throw ValidationError(fmt::format("waypoint {} is not collision-free: density {:.6g} >= {}", w, rho, tp.rho_bar));
    }
  }

  TwoPhaseResult out;
  const NlpProblem tracking = build_min_snap_nlp(tp, density, false, tp.waypoints);
  out.phase1 = solve(tracking, opts);
  if (out.phase1.status != SolveStatus::Converged) return out;

  const Vector rho = sampled_densities(tp, density, out.phase1.x);
  Eigen::Index worst = 0;
  const double peak = rho.maxCoeff(&worst);
  if (!(peak < tp.rho_bar - kDensityMargin)) {
    throw InfeasibleStartError(
        fmt::format("phase-1 trajectory reaches density {:.6g} at sample {} (limit {}); add denser waypoints "
                    "around the obstacle",
                    peak, worst, tp.rho_bar - kDensityMargin),
        static_cast<int>(worst), peak);
  }

  const NlpProblem full = build_min_snap_nlp(tp, density, true, std::nullopt);
  out.phase2 = solve_warm(full, out.phase1.x, mu_phase2, opts);
  return out;
}

}  // namespace neuropt::cases
