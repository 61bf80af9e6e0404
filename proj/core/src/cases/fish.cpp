#include "neuropt/cases/fish.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "neuropt/error.hpp"

namespace neuropt::cases {

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

void check_mlp_shape(const MlpSpec& spec) {
  spec.validate();
  if (spec.in_features != 3 || spec.out_features() != 2) {
    throw ValidationError(fmt::format("flow model must map (t, px, py) to 2 outputs, got {} -> {}", spec.in_features,
                                      spec.out_features()));
  }
}

sym::ExprRef column(sym::ExprGraph& g, const Vector& v) { return g.column(std::span<const double>(v.data(), v.size())); }

// Straight line from p0 to pf bent away from the stone, plus inputs that make
// the Euler steps consistent with the flow.
Vector initial_guess(const FishParams& fp, const FlowModel& flow) {
  const int N = fp.N;
  const Vector dir = fp.pf - fp.p0;
  const double len2 = dir.squaredNorm();
  const double s_star = std::clamp(-fp.p0.dot(dir) / len2, 0.0, 1.0);
  const Vector closest = fp.p0 + s_star * dir;
  Vector normal = closest;
  if (normal.norm() < 1e-12) normal = vec2(-dir(1), dir(0));
  normal.normalize();
  const double clearance = fp.r_st + 0.15;
  const double amp = std::max(0.0, clearance - closest.norm());

  Vector z = Vector::Zero(fish_decision_size(fp));
  for (int k = 0; k <= N; ++k) {
    const double s = static_cast<double>(k) / N;
    double phase = 0.0;  // maps s_star to 1/2
    if (s_star > 0.0 && s <= s_star) {
      phase = 0.5 * s / s_star;
    } else if (s_star < 1.0) {
      phase = 0.5 + 0.5 * (s - s_star) / (1.0 - s_star);
    }
    Vector p = fp.p0 + s * dir + amp * std::sin(std::numbers::pi * phase) * normal;
    p = p.cwiseMax(fp.p_lo).cwiseMin(fp.p_hi);
    z.segment(fish_state_offset(k), 2) = p;
  }
  for (int k = 0; k < N; ++k) {
    const Vector xk = z.segment(fish_state_offset(k), 2);
    const Vector xn = z.segment(fish_state_offset(k + 1), 2);
    const Vector u = (xn - xk) / fp.dt - flow_model_value(flow, k * fp.dt, xk);
    z.segment(fish_input_offset(fp, k), 2) = u.cwiseMax(fp.u_lo).cwiseMin(fp.u_hi);
  }
  return z;
}

}  // namespace

void FishParams::validate() const {
  auto two = [](const Vector& v, const char* name) {
    if (v.size() != 2 || !v.allFinite()) throw ValidationError(fmt::format("{} must be a finite 2-vector", name));
  };
  two(p0, "p0");
  two(pf, "pf");
  two(u_lo, "u_lo");
  two(u_hi, "u_hi");
  two(p_lo, "p_lo");
  two(p_hi, "p_hi");
  if (N < 2) throw ValidationError(fmt::format("N must be at least 2, got {}", N));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!(r_st >= 0.0) || !std::isfinite(r_st)) throw ValidationError("r_st must be nonnegative");
  if (!(u_lo.array() < u_hi.array()).all()) throw ValidationError("u_lo must be below u_hi");
  if (!(p_lo.array() < p_hi.array()).all()) throw ValidationError("p_lo must be below p_hi");
  for (const auto& [p, name] : {std::pair{&p0, "p0"}, std::pair{&pf, "pf"}}) {
    if (!(p->norm() > r_st)) throw ValidationError(fmt::format("{} lies inside the stone", name));
    if ((p->array() < p_lo.array()).any() || (p->array() > p_hi.array()).any()) {
      throw ValidationError(fmt::format("{} lies outside the river bounds", name));
    }
  }
}

FishParams default_fish_params() {
  FishParams fp;
  fp.p0 = vec2(3.0, -0.6);
  fp.pf = vec2(-3.0, 0.6);
  fp.N = 60;
  fp.dt = 0.15;
  fp.u_lo = vec2(-1.5, -1.5);
  fp.u_hi = vec2(1.5, 1.5);
  fp.p_lo = vec2(-4.0, -1.0);
  fp.p_hi = vec2(4.0, 1.0);
  fp.r_st = 0.35;
  return fp;
}

FlowFieldParams default_flow_field() {
  FlowFieldParams f;
  f.u_inf = vec2(0.6, 0.0);
  f.vortices.push_back(Vortex{vec2(0.8, 0.35), 0.8, 0.25, vec2(0.3, 0.0)});
  f.vortices.push_back(Vortex{vec2(0.8, -0.35), -0.8, 0.25, vec2(0.3, 0.0)});
  return f;
}

sym::ExprRef flow_model_expr(const FlowModel& flow, const sym::ExprRef& t, const sym::ExprRef& p) {
  if (const auto* spec = std::get_if<MlpSpec>(&flow)) {
    check_mlp_shape(*spec);
    return embed_mlp(*spec, sym::vcat({t, p}));
  }
  return flow_expr(t, p, std::get<FlowFieldParams>(flow));
}

Vector flow_model_value(const FlowModel& flow, double t, const Vector& p) {
  if (const auto* spec = std::get_if<MlpSpec>(&flow)) {
    Vector in(3);
    in << t, p(0), p(1);
    return eval_mlp(*spec, in);
  }
  return analytic_flow(t, p, std::get<FlowFieldParams>(flow));
}

NlpProblem build_fish_nlp(const FishParams& fp, const FlowModel& flow) {
  fp.validate();
  if (const auto* spec = std::get_if<MlpSpec>(&flow)) {
    check_mlp_shape(*spec);
  } else {
    std::get<FlowFieldParams>(flow).validate();
  }
  const int N = fp.N;
  const int n = fish_decision_size(fp);
  const double inf = std::numeric_limits<double>::infinity();

  sym::ExprGraph g;
  const sym::ExprRef z = g.symbol("z", n);
  auto state = [&](int k) { return sym::slice_rows(z, fish_state_offset(k), 2); };
  auto input = [&](int k) { return sym::slice_rows(z, fish_input_offset(fp, k), 2); };

  // Input rates as one difference operator.
  Matrix D = Matrix::Zero(2 * (N - 1), n);
  for (int k = 0; k + 1 < N; ++k) {
    for (int a = 0; a < 2; ++a) {
      D(2 * k + a, fish_input_offset(fp, k) + a) = -1.0 / fp.dt;
      D(2 * k + a, fish_input_offset(fp, k + 1) + a) = 1.0 / fp.dt;
    }
  }
  const sym::ExprRef objective = sym::sumsq(sym::matmul(g.constant(D), z));

  std::vector<sym::ExprRef> rows;
  rows.push_back(state(0) - column(g, fp.p0));
  rows.push_back(state(N) - column(g, fp.pf));
  for (int k = 0; k < N; ++k) {
    const sym::ExprRef xk = state(k);
    const sym::ExprRef v = flow_model_expr(flow, g.scalar(k * fp.dt), xk);
    rows.push_back(state(k + 1) - xk - fp.dt * (input(k) + v));
  }
  for (int k = 0; k <= N; ++k) rows.push_back(sym::sumsq(state(k)));

  const int n_eq = 4 + 2 * N;
  const int m = n_eq + N + 1;
  NlpDefinition def{.x = z, .objective = objective, .constraints = sym::vcat(rows)};
  def.constraint_lower = Vector::Zero(m);
  def.constraint_upper = Vector::Zero(m);
  def.constraint_lower.tail(N + 1).setConstant(fp.r_st * fp.r_st);
  def.constraint_upper.tail(N + 1).setConstant(inf);
  def.x_lower.resize(n);
  def.x_upper.resize(n);
  for (int k = 0; k <= N; ++k) {
    def.x_lower.segment(fish_state_offset(k), 2) = fp.p_lo;
    def.x_upper.segment(fish_state_offset(k), 2) = fp.p_hi;
  }
  for (int k = 0; k < N; ++k) {
    def.x_lower.segment(fish_input_offset(fp, k), 2) = fp.u_lo;
    def.x_upper.segment(fish_input_offset(fp, k), 2) = fp.u_hi;
  }
  def.x_init = initial_guess(fp, flow);
  return assemble(std::move(def));
}

sym::SymFunction fish_dynamics_function(const FlowModel& flow, double dt) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 2);
  const sym::ExprRef u = g.symbol("u", 2);
  const sym::ExprRef t = g.symbol("t", 1);
  const sym::ExprRef next = x + dt * (u + flow_model_expr(flow, t, x));
  return sym::SymFunction(sym::unique_function_name("fish_dynamics"), {x, u, t}, {next});
}

FishTrajectory fish_trajectory(const FishParams& fp, const Vector& z) {
  if (z.size() != fish_decision_size(fp)) {
    throw ShapeError(fmt::format("fish decision vector must have length {}, got {}", fish_decision_size(fp), z.size()));
  }
  FishTrajectory tr{Matrix(fp.N + 1, 2), Matrix(fp.N, 2)};
  for (int k = 0; k <= fp.N; ++k) tr.x.row(k) = z.segment(fish_state_offset(k), 2).transpose();
  for (int k = 0; k < fp.N; ++k) tr.u.row(k) = z.segment(fish_input_offset(fp, k), 2).transpose();
  return tr;
}

double fish_dynamics_residual(const FishParams& fp, const FishTrajectory& tr, const FlowModel& flow) {
  double worst = 0.0;
  for (int k = 0; k < fp.N; ++k) {
    const Vector xk = tr.x.row(k).transpose();
    const Vector pred = xk + fp.dt * (tr.u.row(k).transpose() + flow_model_value(flow, k * fp.dt, xk));
    worst = std::max(worst, (tr.x.row(k + 1).transpose() - pred).cwiseAbs().maxCoeff());
  }
  return worst;
}

double fish_obstacle_margin(const FishParams& fp, const FishTrajectory& tr) {
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= fp.N; ++k) margin = std::min(margin, tr.x.row(k).squaredNorm() - fp.r_st * fp.r_st);
  return margin;
}

}  // namespace neuropt::cases
