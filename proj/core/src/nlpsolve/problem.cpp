#include "neuropt/nlpsolve/problem.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/symgraph/derivatives.hpp"

namespace neuropt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_length(const Vector& v, int n, std::string_view what) {
  if (v.size() != n) throw ShapeError(fmt::format("{}: expected length {}, got {}", what, n, v.size()));
}

void check_ordered(const Vector& lo, const Vector& hi, std::string_view what) {
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i]) {
      throw ValidationError(fmt::format("{} {}: lower bound {} exceeds upper bound {}", what, i, lo[i], hi[i]));
    }
    if (lo[i] == kInf || hi[i] == -kInf) {
      throw ValidationError(fmt::format("{} {}: bounds [{}, {}] admit no value", what, i, lo[i], hi[i]));
    }
  }
}

std::string fresh_symbol_name(const sym::ExprGraph& g, std::string_view base) {
  std::string name(base);
  for (int k = 1; g.find_symbol(name); ++k) name = fmt::format("{}_{}", base, k);
  return name;
}

void copy_column(const Vector& v, Matrix& out) {
  out.resize(v.size(), 1);
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i, 0) = v[i];
}

}  // namespace

NlpProblem::NlpProblem(NlpDefinition def, sym::SymFunction values, sym::SymFunction derivatives,
                       sym::SymFunction hessian)
    : def_(std::move(def)),
      n_(def_.x.rows()),
      m_(def_.constraints ? def_.constraints->rows() : 0),
      values_(std::move(values)),
      derivatives_(std::move(derivatives)),
      hessian_(std::move(hessian)) {}

NlpProblem assemble(NlpDefinition def) {
  const sym::ExprRef& x = def.x;
  if (!x.is_symbol() || !x.shape().is_column()) {
    throw ValidationError("assemble: x must be a column Symbol");
  }
  if (!def.objective.same_graph(x)) throw ValidationError("assemble: objective is built on another graph");
  if (!def.objective.shape().is_scalar()) {
    throw ShapeError(fmt::format("assemble: objective must be scalar, got {}", sym::to_string(def.objective.shape())));
  }
  if (def.constraints) {
    if (!def.constraints->same_graph(x)) throw ValidationError("assemble: constraints are built on another graph");
    if (!def.constraints->shape().is_column()) {
      throw ShapeError(fmt::format("assemble: constraints must be a column, got {}",
                                   sym::to_string(def.constraints->shape())));
    }
  }

  std::vector<sym::ExprRef> roots{def.objective};
  if (def.constraints) roots.push_back(*def.constraints);
  for (const sym::ExprRef& s : sym::free_symbols(roots)) {
    if (!(s == x)) {
      throw ValidationError(fmt::format("assemble: symbol '{}' is reachable but is not the decision variable '{}'",
                                        s.symbol_name(), x.symbol_name()));
    }
  }

  const int n = x.rows();
  const int m = def.constraints ? def.constraints->rows() : 0;
  check_length(def.constraint_lower, m, "constraint_lower");
  check_length(def.constraint_upper, m, "constraint_upper");
  if (def.x_lower.size() == 0) def.x_lower = Vector::Constant(n, -kInf);
  if (def.x_upper.size() == 0) def.x_upper = Vector::Constant(n, kInf);
  if (def.x_init.size() == 0) def.x_init = Vector::Zero(n);
  check_length(def.x_lower, n, "x_lower");
  check_length(def.x_upper, n, "x_upper");
  check_length(def.x_init, n, "x_init");
  check_ordered(def.constraint_lower, def.constraint_upper, "constraint");
  check_ordered(def.x_lower, def.x_upper, "variable");

  sym::ExprGraph g = x.graph();
  const std::string base = sym::unique_function_name("nlp");

  std::vector<sym::ExprRef> value_outputs{def.objective};
  if (def.constraints) value_outputs.push_back(*def.constraints);
  sym::SymFunction values(base + "_values", {x}, value_outputs);

  std::vector<sym::ExprRef> deriv_outputs{sym::gradient(def.objective, x)};
  if (def.constraints) deriv_outputs.push_back(sym::jacobian(*def.constraints, x));
  sym::SymFunction derivatives(base + "_derivatives", {x}, deriv_outputs);

  std::vector<sym::ExprRef> hess_inputs{x};
  sym::ExprRef lagrangian = def.objective;
  if (def.constraints) {
    const sym::ExprRef lambda = g.symbol(fresh_symbol_name(g, "lambda"), m, 1);
    hess_inputs.push_back(lambda);
    lagrangian = lagrangian + sym::dot(lambda, *def.constraints);
  }
  sym::SymFunction hessian(base + "_hessian", hess_inputs, {sym::hessian(lagrangian, x).hess});

  return NlpProblem(std::move(def), std::move(values), std::move(derivatives), std::move(hessian));
}

void NlpProblem::eval_values(const Vector& x, double& f, Vector& g, NlpWorkspace& ws) const {
  copy_column(x, ws.x);
  sym::evaluate(values_, std::span<const Matrix>(&ws.x, 1), ws.values);
  f = ws.values.output(0)(0, 0);
  if (m_ > 0) {
    g = ws.values.output(1).col(0);
  } else {
    g.resize(0);
  }
}

void NlpProblem::eval_derivatives(const Vector& x, Vector& grad, Matrix& jac, NlpWorkspace& ws) const {
  copy_column(x, ws.x);
  sym::evaluate(derivatives_, std::span<const Matrix>(&ws.x, 1), ws.derivatives);
  grad = ws.derivatives.output(0).col(0);
  if (m_ > 0) {
    jac = ws.derivatives.output(1);
  } else {
    jac.resize(0, n_);
  }
}

void NlpProblem::eval_hessian(const Vector& x, const Vector& lambda, Matrix& hess, NlpWorkspace& ws) const {
  if (m_ > 0) {
    check_length(lambda, m_, "lambda");
    Matrix in[2];
    copy_column(x, in[0]);
    copy_column(lambda, in[1]);
    sym::evaluate(hessian_, std::span<const Matrix>(in, 2), ws.hessian);
  } else {
    copy_column(x, ws.x);
    sym::evaluate(hessian_, std::span<const Matrix>(&ws.x, 1), ws.hessian);
  }
  hess = ws.hessian.output(0);
}

double NlpProblem::objective_value(const Vector& x) const {
  NlpWorkspace ws;
  double f = 0.0;
  Vector g;
  eval_values(x, f, g, ws);
  return f;
}

Vector NlpProblem::constraint_values(const Vector& x) const {
  NlpWorkspace ws;
  double f = 0.0;
  Vector g;
  eval_values(x, f, g, ws);
  return g;
}

Vector NlpProblem::objective_gradient(const Vector& x) const {
  NlpWorkspace ws;
  Vector grad;
  Matrix jac;
  eval_derivatives(x, grad, jac, ws);
  return grad;
}

Matrix NlpProblem::constraint_jacobian(const Vector& x) const {
  NlpWorkspace ws;
  Vector grad;
  Matrix jac;
  eval_derivatives(x, grad, jac, ws);
  return jac;
}

Matrix NlpProblem::lagrangian_hessian(const Vector& x, const Vector& lambda) const {
  NlpWorkspace ws;
  Matrix h;
  eval_hessian(x, lambda, h, ws);
  return h;
}

double NlpProblem::max_violation(const Vector& x, const Vector& g) const {
  double v = 0.0;
  for (int i = 0; i < m_; ++i) {
    v = std::max({v, def_.constraint_lower[i] - g[i], g[i] - def_.constraint_upper[i]});
  }
  for (int j = 0; j < n_; ++j) v = std::max({v, def_.x_lower[j] - x[j], x[j] - def_.x_upper[j]});
  return v;
}

}  // namespace neuropt
