#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "neuropt/linalg.hpp"
#include "neuropt/symgraph/graph.hpp"

namespace neuropt::sym {

// Scalar value rules shared by the graph interpreter, constant folding and the
// tape interpreter, so all three agree bit for bit.

inline double sigmoid_value(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double relu_value(double x) { return x > 0.0 ? x : 0.0; }
inline double step_value(double x) { return x > 0.0 ? 1.0 : 0.0; }

/// Evaluates an elementwise unary kind. Returns false when `x` lies outside
/// the kernel's domain (Log of x <= 0, Sqrt of x < 0).
bool unary_scalar(OpKind kind, double x, double& out);

/// Evaluates Add/Sub/Mul/Div/Pow (b is the exponent for Pow). Returns false
/// on division by zero or a Pow with no real result.
bool binary_scalar(OpKind kind, double a, double b, double& out);

/// Evaluates one node given its operand values into `out`. Throws DomainError
/// tagged with `location` on a domain violation.
void evaluate_node(const Node& node, std::span<const Matrix* const> operands, Matrix& out,
                   std::int64_t location);

}  // namespace neuropt::sym
