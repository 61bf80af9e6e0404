#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "neuropt/error.hpp"
#include "neuropt/nlpsolve/kkt_system.hpp"
#include "neuropt/nlpsolve/problem.hpp"
#include "neuropt/nlpsolve/solver.hpp"
#include "oracles.hpp"

namespace neuropt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

NlpProblem quadratic(double x0) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 1);
  NlpDefinition def{.x = x, .objective = sym::sumsq(x - 1.0)};
  def.x_init = vec({x0});
  return assemble(std::move(def));
}

NlpProblem hs071_problem(const Vector& x0) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 4);
  auto e = [&](int i) { return sym::slice_rows(x, i, 1); };
  const sym::ExprRef f = e(0) * e(3) * (e(0) + e(1) + e(2)) + e(2);
  const sym::ExprRef c = sym::vcat({e(0) * e(1) * e(2) * e(3), sym::sumsq(x)});
  NlpDefinition def{.x = x, .objective = f, .constraints = c};
  def.constraint_lower = vec({25, 40});
  def.constraint_upper = vec({kInf, 40});
  def.x_lower = Vector::Constant(4, 1.0);
  def.x_upper = Vector::Constant(4, 5.0);
  def.x_init = x0;
  return assemble(std::move(def));
}

TEST(Assemble, ValidProblems) {
  const NlpProblem p = quadratic(5.0);
  EXPECT_EQ(p.n(), 1);
  EXPECT_EQ(p.m(), 0);
  EXPECT_EQ(p.objective_value(vec({3})), 4.0);
  EXPECT_EQ(p.objective_gradient(vec({3}))(0), 4.0);
  EXPECT_EQ(p.lagrangian_hessian(vec({3}), Vector())(0, 0), 2.0);
}

TEST(Assemble, ForeignSymbolIsNamed) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 2);
  const sym::ExprRef t = g.symbol("t", 1);
  NlpDefinition def{.x = x, .objective = sym::sumsq(x), .constraints = sym::slice_rows(x, 0, 1) * t};
  def.constraint_lower = vec({0});
  def.constraint_upper = vec({0});
  try {
    assemble(def);
    FAIL() << "foreign symbol accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'t'"), std::string::npos) << e.what();
  }
}

TEST(Assemble, ShapeAndBoundChecks) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 2);
  NlpDefinition def{.x = x, .objective = sym::sumsq(x), .constraints = x};
  def.constraint_lower = vec({0});
  def.constraint_upper = vec({1, 1});
  EXPECT_THROW(assemble(def), ShapeError);
  def.constraint_lower = vec({2, 0});
  EXPECT_THROW(assemble(def), ValidationError);
  NlpDefinition vec_obj{.x = x, .objective = x};
  EXPECT_THROW(assemble(vec_obj), ShapeError);
}

TEST(Solve, UnconstrainedQuadratic) {
  const Solution s = solve(quadratic(5.0));
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  EXPECT_NEAR(s.x(0), 1.0, 1e-8);
  EXPECT_LT(s.kkt_error, 1e-8);
}

TEST(Solve, LowerBound) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 1);
  NlpDefinition def{.x = x, .objective = sym::sum(x)};
  def.x_lower = vec({2});
  def.x_upper = vec({kInf});
  def.x_init = vec({7});
  const Solution s = solve(assemble(def));
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  EXPECT_NEAR(s.x(0), 2.0, 1e-8);
  EXPECT_NEAR(s.lower_bound_duals(0), 1.0, 1e-6);
  EXPECT_EQ(s.upper_bound_duals(0), 0.0);
}

TEST(Solve, InequalityRow) {
  // min x s.t. x >= 2 written as a constraint row.
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 1);
  NlpDefinition def{.x = x, .objective = sym::sum(x), .constraints = x};
  def.constraint_lower = vec({2});
  def.constraint_upper = vec({kInf});
  const Solution s = solve(assemble(def));
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  EXPECT_NEAR(s.x(0), 2.0, 1e-8);
  // grad f + J^T lambda = 0 -> lambda = -1.
  EXPECT_NEAR(s.constraint_duals(0), -1.0, 1e-6);
}

TEST(Solve, EqualityConstrained) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 2);
  NlpDefinition def{.x = x, .objective = sym::sumsq(x), .constraints = sym::sum(x)};
  def.constraint_lower = vec({1});
  def.constraint_upper = vec({1});
  const Solution s = solve(assemble(def));
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  EXPECT_NEAR(s.x(0), 0.5, 1e-9);
  EXPECT_NEAR(s.x(1), 0.5, 1e-9);
  EXPECT_NEAR(s.constraint_duals(0), -1.0, 1e-8);
}

TEST(Solve, Hs071WithIndependentKktCheck) {
  const Solution s = solve(hs071_problem(vec({1, 5, 5, 1})));
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  EXPECT_LT(s.kkt_error, 1e-6);
  EXPECT_NEAR(s.objective_value, testing::hs071::kReferenceObjective, 1e-6);
  const testing::KktCheck k = testing::hs071_kkt_check(s.x);
  EXPECT_LT(k.stationarity, 1e-6) << k.describe();
  EXPECT_LT(k.feasibility, 1e-8) << k.describe();
  EXPECT_GT(k.min_inequality_multiplier, 0.0) << k.describe();
  EXPECT_LT(std::abs(testing::hs071::f(s.x) - s.objective_value), 1e-12);
}

TEST(Solve, Hs071CoarseGridOfStarts) {
  // No start on a coarse grid reaches a lower objective.
  double best = kInf;
  for (int mask = 0; mask < 16; ++mask) {
    Vector x0(4);
    for (int i = 0; i < 4; ++i) x0(i) = (mask >> i) & 1 ? 4.5 : 1.5;
    const Solution s = solve(hs071_problem(x0));
    if (s.status != SolveStatus::Converged) continue;
    best = std::min(best, s.objective_value);
    EXPECT_GE(s.objective_value, testing::hs071::kReferenceObjective - 1e-6) << "start mask " << mask;
  }
  EXPECT_NEAR(best, testing::hs071::kReferenceObjective, 1e-6);
}

TEST(Solve, KktErrorDecreasesOnAcceptedIterates) {
  const NlpProblem problems[] = {quadratic(5.0), hs071_problem(vec({1, 5, 5, 1}))};
  for (const NlpProblem& p : problems) {
    const Solution s = solve(p);
    ASSERT_EQ(s.status, SolveStatus::Converged);
    ASSERT_GE(s.trace.size(), 2u);
    for (std::size_t k = 1; k < s.trace.size(); ++k) {
      EXPECT_LE(s.trace[k].kkt_error, s.trace[k - 1].kkt_error) << "iteration " << k;
    }
  }
}

TEST(Solve, WarmStartAtOptimum) {
  const NlpProblem p = quadratic(5.0);
  const Solution s = solve_warm(p, vec({1.0}), 1e-4);
  ASSERT_EQ(s.status, SolveStatus::Converged) << s.message;
  EXPECT_LE(s.iterations, 3);
  EXPECT_NEAR(s.x(0), 1.0, 1e-12);
}

TEST(Solve, Deterministic) {
  const NlpProblem p = hs071_problem(vec({1, 5, 5, 1}));
  SolverOptions o;
  o.record_iterates = true;
  const Solution a = solve(p, o);
  const Solution b = solve(p, o);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    EXPECT_EQ(a.trace[k].x, b.trace[k].x);
    EXPECT_EQ(a.trace[k].mu, b.trace[k].mu);
  }
  EXPECT_EQ(a.x, b.x);
}

TEST(Solve, IterationLimit) {
  SolverOptions o;
  o.max_iter = 2;
  const Solution s = solve(hs071_problem(vec({1, 5, 5, 1})), o);
  EXPECT_EQ(s.status, SolveStatus::MaxIterations);
  EXPECT_EQ(s.iterations, 2);
  EXPECT_EQ(status_name(s.status), "max_iterations");
}

TEST(Solve, NonFiniteStartDiverges) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 1);
  NlpDefinition def{.x = x, .objective = sym::sum(sym::log(x))};
  def.x_init = vec({-1.0});
  const Solution s = solve(assemble(def));
  EXPECT_EQ(s.status, SolveStatus::Diverged);
  EXPECT_FALSE(s.message.empty());
}

TEST(Solve, RejectsFixedVariables) {
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 2);
  NlpDefinition def{.x = x, .objective = sym::sumsq(x)};
  def.x_lower = vec({1, -kInf});
  def.x_upper = vec({1, kInf});
  EXPECT_THROW(solve(assemble(def)), ValidationError);
}

TEST(Solve, LogLinesPerIterate) {
  SolverOptions o;
  int lines = 0;
  o.log = [&](const std::string& line) {
    ++lines;
    EXPECT_EQ(line.rfind("iter ", 0), 0u) << line;
  };
  const Solution s = solve(quadratic(5.0), o);
  EXPECT_EQ(lines, static_cast<int>(s.trace.size()));
}

TEST(Solve, OptionValidation) {
  SolverOptions o;
  o.tol = 0.0;
  EXPECT_THROW(solve(quadratic(1.0), o), ValidationError);
  o = SolverOptions{};
  o.kappa_mu = 1.5;
  EXPECT_THROW(o.validate(), ValidationError);
}

TEST(KktError, ZeroAtOptimumAndGradientElsewhere) {
  const NlpProblem p = quadratic(5.0);
  const PrimalDualPoint at = initial_point(p, vec({1.0}), 0.1);
  EXPECT_LE(kkt_error(p, at, 0.0), 1e-12);
  // Feasible (no constraints) but not stationary: only the gradient counts.
  const PrimalDualPoint off = initial_point(p, vec({1.75}), 0.1);
  EXPECT_DOUBLE_EQ(kkt_error(p, off, 0.0), 1.5);
}

TEST(Factorization, Inertia) {
  Eigen::MatrixXd k(3, 3);
  k << 4, 1, 0, 1, -3, 0, 0, 0, 2;
  SymmetricFactorization f;
  ASSERT_TRUE(f.factor(k));
  EXPECT_EQ(f.inertia().positive, 2);
  EXPECT_EQ(f.inertia().negative, 1);
  EXPECT_EQ(f.inertia().zero, 0);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(3, 1, 3);
  EXPECT_LT((k * f.solve(b) - b).cwiseAbs().maxCoeff(), 1e-14);

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
  s(0, 0) = 1.0;
  EXPECT_FALSE(f.factor(s));
  EXPECT_EQ(f.inertia().zero, 1);
}

}  // namespace
}  // namespace neuropt
