#pragma once

#include <memory>
#include <optional>

#include "neuropt/linalg.hpp"
#include "neuropt/symgraph/function.hpp"
#include "neuropt/symgraph/graph.hpp"

namespace neuropt {

/// Input to assemble(). Empty x_lower / x_upper mean unbounded; an empty
/// x_init means the origin.
struct NlpDefinition {
  sym::ExprRef x;
  sym::ExprRef objective;
  std::optional<sym::ExprRef> constraints{};
  Vector constraint_lower{};
  Vector constraint_upper{};
  Vector x_lower{};
  Vector x_upper{};
  Vector x_init{};
};

/// Scratch buffers for the numeric callbacks of one NlpProblem.
struct NlpWorkspace {
  sym::Workspace values;
  sym::Workspace derivatives;
  sym::Workspace hessian;
  Matrix x;
  Matrix lambda;
};

/// min f(x) s.t. gl <= g(x) <= gu, xl <= x <= xu. The gradient, the dense
/// constraint Jacobian and the Lagrangian Hessian of f + lambda^T g are built
/// symbolically once, in assemble(). Immutable afterwards.
class NlpProblem {
 public:
  int n() const { return n_; }
  int m() const { return m_; }

  const sym::ExprRef& x() const { return def_.x; }
  const sym::ExprRef& objective() const { return def_.objective; }
  const std::optional<sym::ExprRef>& constraints() const { return def_.constraints; }
  const Vector& constraint_lower() const { return def_.constraint_lower; }
  const Vector& constraint_upper() const { return def_.constraint_upper; }
  const Vector& x_lower() const { return def_.x_lower; }
  const Vector& x_upper() const { return def_.x_upper; }
  const Vector& x_init() const { return def_.x_init; }

  /// f(x) and g(x) (g left empty when m == 0).
  void eval_values(const Vector& x, double& f, Vector& g, NlpWorkspace& ws) const;
  /// grad f (n) and dg/dx (m, n).
  void eval_derivatives(const Vector& x, Vector& grad, Matrix& jac, NlpWorkspace& ws) const;
  /// Hessian of f + lambda^T g, (n, n).
  void eval_hessian(const Vector& x, const Vector& lambda, Matrix& hess, NlpWorkspace& ws) const;

  double objective_value(const Vector& x) const;
  Vector constraint_values(const Vector& x) const;
  Vector objective_gradient(const Vector& x) const;
  Matrix constraint_jacobian(const Vector& x) const;
  Matrix lagrangian_hessian(const Vector& x, const Vector& lambda) const;

  /// Largest violation of gl <= g(x) <= gu and xl <= x <= xu.
  double max_violation(const Vector& x, const Vector& g) const;

 private:
  friend NlpProblem assemble(NlpDefinition def);
  NlpProblem(NlpDefinition def, sym::SymFunction values, sym::SymFunction derivatives,
             sym::SymFunction hessian);

  NlpDefinition def_;
  int n_ = 0;
  int m_ = 0;
  sym::SymFunction values_;
  sym::SymFunction derivatives_;
  sym::SymFunction hessian_;
};

/// Validates the definition and builds the derivative functions. Throws
/// ValidationError (naming the symbol) when anything but x is reachable from
/// the objective or the constraints, ShapeError on length mismatches.
NlpProblem assemble(NlpDefinition def);

}  // namespace neuropt
