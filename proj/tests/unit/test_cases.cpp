#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "neuropt/cases/export.hpp"
#include "neuropt/cases/fields.hpp"
#include "neuropt/cases/fish.hpp"
#include "neuropt/cases/min_snap.hpp"
#include "neuropt/cases/scenario_io.hpp"
#include "neuropt/cases/training.hpp"
#include "neuropt/error.hpp"
#include "neuropt/symgraph/function.hpp"
#include "oracles.hpp"

namespace neuropt {
namespace {

using namespace cases;

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector v3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

TEST(Flow, FreeStreamWithoutVortices) {
  FlowFieldParams fp;
  fp.u_inf = v2(0.4, -0.1);
  Pcg32 rng(1);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(analytic_flow(rng.uniform(0, 5), testing::random_vector(rng, 2, -3, 3), fp), fp.u_inf);
  }
}

TEST(Flow, RegularizedCore) {
  FlowFieldParams fp;
  fp.u_inf = v2(0.5, 0.0);
  fp.vortices.push_back(Vortex{v2(1.0, 2.0), 3.0, 0.2, v2(0.5, -0.25)});
  const double t = 2.0;
  EXPECT_EQ(analytic_flow(t, v2(2.0, 1.5), fp), fp.u_inf);
}

TEST(Flow, SingleVortexFormula) {
  FlowFieldParams fp;
  fp.vortices.push_back(Vortex{v2(0.0, 0.0), 1.0, 0.1, v2(0.0, 0.0)});
  const Vector v = analytic_flow(0.0, v2(1.0, 0.0), fp);
  EXPECT_NEAR(v(0), 0.0, 1e-16);
  EXPECT_NEAR(v(1), 1.0 / (2.0 * std::numbers::pi) * (1.0 - std::exp(-100.0)), 1e-15);
}

TEST(Flow, ExpressionMatchesAnalytic) {
  const FlowFieldParams fp = default_flow_field();
  sym::ExprGraph g;
  const sym::ExprRef t = g.symbol("t", 1);
  const sym::ExprRef p = g.symbol("p", 2);
  const sym::SymFunction f(sym::unique_function_name("flow"), {t, p}, {flow_expr(t, p, fp)});
  Pcg32 rng(2);
  for (int i = 0; i < 200; ++i) {
    const double tv = rng.uniform(0, 9);
    const Vector pv = testing::random_vector(rng, 2, -4, 4);
    const Matrix out = sym::evaluate(f, {Matrix::Constant(1, 1, tv), Matrix(pv)})[0];
    EXPECT_LT((Vector(out) - analytic_flow(tv, pv, fp)).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Density, BlobValues) {
  DensityFieldParams dp;
  dp.blobs.push_back(Blob{v3(1, 2, 3), 0.5, 4.0, 200.0});
  EXPECT_NEAR(analytic_density(v3(1, 2, 3), dp), 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(analytic_density(v3(1.5, 2, 3), dp), 2.0);
  EXPECT_EQ(analytic_density(v3(0, 0, 0), DensityFieldParams{}), 0.0);

  sym::ExprGraph g;
  const sym::ExprRef p = g.symbol("p", 3);
  const sym::SymFunction f(sym::unique_function_name("rho"), {p}, {density_expr(p, default_density_field())});
  Pcg32 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vector pv = testing::random_vector(rng, 3, -1, 2);
    EXPECT_NEAR(sym::evaluate(f, {Matrix(pv)})[0](0), analytic_density(pv, default_density_field()), 1e-14);
  }
}

TEST(Fields, Validation) {
  FlowFieldParams fp;
  fp.vortices.push_back(Vortex{v2(0, 0), 1.0, 0.0, v2(0, 0)});
  EXPECT_THROW(fp.validate(), ValidationError);
  DensityFieldParams dp;
  dp.blobs.push_back(Blob{v2(0, 0), 1.0, 1.0, 1.0});
  EXPECT_THROW(dp.validate(), ValidationError);
}

FishParams small_fish(int N) {
  FishParams fp = default_fish_params();
  fp.N = N;
  return fp;
}

TEST(Fish, DecisionCount) {
  FishParams fp = small_fish(2);
  EXPECT_EQ(fish_decision_size(fp), 10);
  const NlpProblem p = build_fish_nlp(fp, FlowFieldParams{});
  EXPECT_EQ(p.n(), 10);
  EXPECT_EQ(p.m(), 4 + 2 * 2 + 3);
}

TEST(Fish, ZeroFlowStraightLine) {
  FishParams fp = default_fish_params();
  fp.p0 = v2(3.0, 0.7);
  fp.pf = v2(-3.0, 0.7);
  const Vector u = (fp.pf - fp.p0) / (fp.N * fp.dt);
  ASSERT_TRUE((u.array() >= fp.u_lo.array()).all() && (u.array() <= fp.u_hi.array()).all());
  FlowFieldParams still;
  const NlpProblem p = build_fish_nlp(fp, still);
  // The constant-input candidate is feasible with cost 0.
  Vector z(fish_decision_size(fp));
  for (int k = 0; k <= fp.N; ++k) z.segment(fish_state_offset(k), 2) = fp.p0 + k * fp.dt * u;
  for (int k = 0; k < fp.N; ++k) z.segment(fish_input_offset(fp, k), 2) = u;
  EXPECT_LT(p.max_violation(z, p.constraint_values(z)), 1e-12);
  EXPECT_LT(p.objective_value(z), 1e-20);

  const Solution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  EXPECT_LE(s.objective_value, 1e-10);
}

TEST(Fish, DefaultScenarioAvoidsStone) {
  const FishParams fp = default_fish_params();
  const FlowModel flow = default_flow_field();
  const Solution s = solve(build_fish_nlp(fp, flow));
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  const FishTrajectory tr = fish_trajectory(fp, s.x);
  for (int k = 0; k <= fp.N; ++k) EXPECT_GE(tr.x.row(k).norm(), fp.r_st - 1e-6);
  EXPECT_LE(fish_dynamics_residual(fp, tr, flow), 1e-6);
  EXPECT_GE(fish_obstacle_margin(fp, tr), -1e-6);
}

TEST(Fish, RejectsWrongModelShape) {
  Pcg32 rng(4);
  const MlpSpec bad = testing::random_mlp(rng, 2, {4}, 2, Activation::Tanh);
  EXPECT_THROW(build_fish_nlp(small_fish(3), bad), ValidationError);
  FishParams fp = small_fish(3);
  fp.dt = -1;
  EXPECT_THROW(build_fish_nlp(fp, FlowFieldParams{}), ValidationError);
}

TEST(Poly, Derivatives) {
  Matrix C = Matrix::Zero(10, 3);
  C.row(0) = v3(1, 2, 3).transpose();
  for (double t : {0.0, 0.7, 5.0}) {
    EXPECT_EQ(poly_eval(C, t, 0), v3(1, 2, 3));
    for (int d = 1; d <= 4; ++d) EXPECT_EQ(poly_eval(C, t, d), Vector::Zero(3));
  }
  C.setZero();
  C.row(4) = v3(0.5, -1, 2).transpose();
  for (double t : {0.0, 1.3, 4.0}) EXPECT_LT((poly_eval(C, t, 4) - 24.0 * v3(0.5, -1, 2)).cwiseAbs().maxCoeff(), 1e-12);
  C.setZero();
  C.row(1) = v3(3, -4, 0.25).transpose();
  EXPECT_EQ(poly_eval(C, 2.5, 1), v3(3, -4, 0.25));
}

TEST(Poly, NormalizedLayout) {
  Pcg32 rng(5);
  Matrix C(10, 3);
  for (Eigen::Index i = 0; i < C.size(); ++i) C.data()[i] = rng.uniform(-1, 1);
  const double T = 8.0;
  const Vector z = coeffs_to_decision(C, T);
  EXPECT_LT(testing::max_abs_diff(decision_to_coeffs(z, 9, T), C), 1e-15);
  sym::ExprGraph g;
  const sym::ExprRef zs = g.symbol("z", 30);
  for (int d = 0; d <= 4; ++d) {
    const sym::SymFunction f(sym::unique_function_name("poly"), {zs}, {poly_expr(zs, 9, T, 3.1, d)});
    const Vector expr = sym::evaluate(f, {Matrix(z)})[0];
    const Vector oracle = testing::normalized_poly(z, 9, T, 3.1, d);
    EXPECT_LT(testing::rel_error(expr, oracle), 1e-12) << "deriv " << d;
    EXPECT_LT(testing::rel_error(poly_eval(C, 3.1, d), oracle), 1e-12) << "deriv " << d;
  }
}

TEST(MinSnap, CubicHasNoSnap) {
  Pcg32 rng(6);
  sym::ExprGraph g;
  const sym::ExprRef z = g.symbol("z", 12);
  const sym::SymFunction f(sym::unique_function_name("snap"), {z}, {snap_cost_expr(z, 3, 4.0, 20)});
  for (int i = 0; i < 5; ++i) EXPECT_EQ(sym::evaluate(f, {Matrix(testing::random_vector(rng, 12, -5, 5))})[0](0), 0.0);
}

TEST(MinSnap, PlainQpMatchesOracle) {
  const TrajParams tp = default_traj_params();
  const NlpProblem p = build_min_snap_nlp(tp, DensityFieldParams{}, false, std::nullopt);
  const Solution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  const Vector oracle = testing::min_snap_qp_oracle(tp.degree, tp.T, tp.N, tp.p0, tp.pf);
  EXPECT_LT(testing::rel_error(s.x, oracle), 1e-6);
}

TEST(MinSnap, DefaultWaypointsAreClear) {
  const TrajParams tp = default_traj_params();
  ASSERT_EQ(tp.waypoints.size(), 5u);
  for (const Waypoint& w : tp.waypoints) EXPECT_LT(analytic_density(w.position, default_density_field()), 0.1);
  EXPECT_EQ(tp.rho_bar, 1.0);
  EXPECT_EQ(tp.degree, 9);
  EXPECT_EQ(kPhase2Mu, 1e-4);
}

TEST(MinSnap, TwoPhaseStandardScenario) {
  const TrajParams tp = default_traj_params();
  const DensityModel density = default_density_field();
  const TwoPhaseResult r = solve_two_phase(tp, density, SolverOptions{});
  ASSERT_EQ(r.phase1.status, SolveStatus::Converged);
  ASSERT_TRUE(r.phase2);
  ASSERT_EQ(r.phase2->status, SolveStatus::Converged) << r.phase2->message;
  for (int k = 0; k <= tp.N; ++k) {
    const Vector pos = testing::normalized_poly(r.phase2->x, tp.degree, tp.T, tp.T * k / tp.N, 0);
    EXPECT_LT(analytic_density(pos, default_density_field()), tp.rho_bar) << "sample " << k;
  }
}

TEST(MinSnap, NoBlobPhaseTwoIsTheQp) {
  TrajParams tp = default_traj_params();
  const TwoPhaseResult r = solve_two_phase(tp, DensityFieldParams{}, SolverOptions{});
  ASSERT_TRUE(r.phase2);
  ASSERT_EQ(r.phase2->status, SolveStatus::Converged);
  EXPECT_LT(testing::rel_error(r.phase2->x, testing::min_snap_qp_oracle(9, tp.T, tp.N, tp.p0, tp.pf)), 1e-6);
}

TEST(MinSnap, InfeasibleStartIsReported) {
  TrajParams tp = default_traj_params();
  // Waypoints on the straight line pull phase 1 through the blob.
  for (Waypoint& w : tp.waypoints) w.position = tp.p0 + (tp.pf - tp.p0) * (w.time / tp.T);
  tp.waypoints.erase(tp.waypoints.begin() + 2);
  DensityFieldParams dp = default_density_field();
  dp.blobs[0].center = v3(0.0, 0.0, 1.0);
  dp.blobs[0].radius = 0.3;
  try {
    solve_two_phase(tp, dp, SolverOptions{});
    FAIL() << "phase 1 crossing the blob was not reported";
  } catch (const InfeasibleStartError& e) {
    EXPECT_GE(e.density(), tp.rho_bar - kDensityMargin);
    EXPECT_GE(e.sample(), 0);
  }
}

TEST(MinSnap, RejectsBlockedWaypoint) {
  TrajParams tp = default_traj_params();
  tp.waypoints[2].position = default_density_field().blobs[0].center;
  EXPECT_THROW(solve_two_phase(tp, default_density_field(), SolverOptions{}), ValidationError);
}

TEST(Scenario, FishRoundTrip) {
  const FishScenario s = default_fish_scenario();
  const std::string text = format_fish_scenario(s);
  const FishScenario back = parse_fish_scenario(text);
  EXPECT_EQ(format_fish_scenario(back), text);
  EXPECT_EQ(back.params.N, s.params.N);
  EXPECT_EQ(back.flow.vortices.size(), s.flow.vortices.size());
}

TEST(Scenario, TrajRoundTripAndDefaults) {
  const TrajScenario s = default_traj_scenario();
  const std::string text = format_traj_scenario(s);
  EXPECT_EQ(format_traj_scenario(parse_traj_scenario(text)), text);
  const std::string minimal = R"({"format": "neuropt-traj-v1", "p0": [-2, 0, 1], "pf": [2, 0, 1], "T": 8, "N": 40,
    "rho_bar": 1, "density": {"blobs": [{"center": [0, 0.2, 1], "radius": 0.6, "amplitude": 4, "sharpness": 10}]},
    "domain": {"lower": [-2.5, -1.5, 0.3], "upper": [2.5, 1.5, 1.7]}})";
  const TrajScenario m = parse_traj_scenario(minimal);
  EXPECT_EQ(m.params.degree, 9);
  EXPECT_EQ(m.params.waypoints.size(), 5u);
}

TEST(Scenario, ErrorsNameTheField) {
  std::string text = format_fish_scenario(default_fish_scenario());
  text.replace(text.find("\"dt\""), 4, "\"dT\"");
  try {
    parse_fish_scenario(text);
    FAIL() << "bad key accepted";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("d"), std::string::npos);
  }
  EXPECT_THROW(parse_fish_scenario("{not json"), ParseError);
  EXPECT_THROW(load_traj_scenario("/nonexistent/traj.json"), IoError);
}

// Accuracy of the default fit is checked by the acceptance suite; here only
// that longer training helps and the report is consistent.
TEST(Training, SmallFlowFitImprovesWithEpochs) {
  ModelFitOptions o;
  o.samples = 1000;
  o.heldout_samples = 200;
  o.hidden = {16};
  o.train.epochs = 5;
  const FitReport early = fit_flow_model(default_fish_scenario(), o);
  o.train.epochs = 100;
  const FitReport late = fit_flow_model(default_fish_scenario(), o);
  EXPECT_LT(late.heldout_relative, early.heldout_relative);
  EXPECT_LT(late.heldout_relative, 1.0);
  EXPECT_LT(late.train_mse, early.train_mse);
  EXPECT_EQ(late.spec.in_features, 3);
  EXPECT_EQ(late.spec.out_features(), 2);
}

TEST(Training, UnitBoxScaling) {
  Box b{v3(-2, 0, 1), v3(2, 4, 1.5)};
  const AffineScaling s = unit_box_scaling(b);
  for (int a = 0; a < 3; ++a) {
    EXPECT_DOUBLE_EQ((b.lower(a) - s.offset(a)) * s.scale(a), -1.0);
    EXPECT_DOUBLE_EQ((b.upper(a) - s.offset(a)) * s.scale(a), 1.0);
  }
}

TEST(Export, FishCsvShape) {
  const FishParams fp = small_fish(3);
  Vector z = Vector::LinSpaced(fish_decision_size(fp), 0, 1);
  const std::string csv = fish_csv(fp, fish_trajectory(fp, z));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,t,px,py,ux,uy");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, fp.N + 1);
  EXPECT_EQ(last.substr(last.size() - 2), ",,");
}

TEST(Export, TrajCsvDensities) {
  const TrajParams tp = default_traj_params();
  const NlpProblem p = build_min_snap_nlp(tp, DensityFieldParams{}, false, std::nullopt);
  const std::string csv = traj_csv(tp, p.x_init(), default_density_field());
  EXPECT_EQ(csv.rfind("k,t,px,py,pz,rho\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), tp.N + 2);
}

}  // namespace
}  // namespace neuropt
