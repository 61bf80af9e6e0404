#pragma once

#include <span>
#include <utility>
#include <vector>

#include "neuropt/symgraph/graph.hpp"

namespace neuropt::sym {

/// Reverse-mode vector-Jacobian product: the adjoints of `wrt` (Symbols of
/// any shape) when `y` is seeded with `seed` (same shape as `y`). Symbols that
/// `y` does not depend on receive a zero constant.
std::vector<ExprRef> gradients(const ExprRef& y, const ExprRef& seed, std::span<const ExprRef> wrt);

/// Gradient of a scalar expression; shape of `x`.
ExprRef gradient(const ExprRef& f, const ExprRef& x);

/// Dense Jacobian (m,n) of a column expression f (m,1) with respect to a
/// column Symbol x (n,1), one reverse sweep per row of f.
ExprRef jacobian(const ExprRef& f, const ExprRef& x);

struct HessianResult {
  ExprRef hess;  // (n,n)
  ExprRef grad;  // (n,1)
};

/// hess = jacobian(grad, x) with grad = jacobian(f, x)^T, f scalar.
HessianResult hessian(const ExprRef& f, const ExprRef& x);

using Binding = std::pair<ExprRef, ExprRef>;

/// Rebuilds `roots` with each bound Symbol replaced by its expression. Nodes
/// that do not depend on a bound Symbol are shared, not copied.
std::vector<ExprRef> substitute(std::span<const ExprRef> roots, std::span<const Binding> bindings);
ExprRef substitute(const ExprRef& e, std::span<const Binding> bindings);
ExprRef substitute(const ExprRef& e, std::initializer_list<Binding> bindings);

}  // namespace neuropt::sym
