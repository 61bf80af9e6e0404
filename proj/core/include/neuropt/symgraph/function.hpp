#pragma once

#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuropt/linalg.hpp"
#include "neuropt/symgraph/graph.hpp"

namespace neuropt::sym {

class SymFunction;

/// Caller-owned scratch buffers for evaluate(). One workspace per thread;
/// a workspace may be reused across calls and across functions.
class Workspace {
 public:
  /// Output `k` of the last evaluate() call. Valid until the next call on this
  /// workspace, and only while the input matrices passed to it are alive.
  const Matrix& output(std::size_t k) const { return *values_[outputs_[k]]; }
  std::size_t n_outputs() const { return outputs_.size(); }

 private:
  friend void evaluate(const SymFunction&, std::span<const Matrix>, Workspace&);
  std::vector<Matrix> storage_;
  std::vector<const Matrix*> values_;
  std::vector<std::int32_t> outputs_;
};

/// A named, finalized function of a graph: ordered Symbol inputs and ordered
/// outputs. On construction the reachable subgraph is copied into a compact
/// topologically ordered program, so the function is immutable and may be
/// evaluated concurrently (with one Workspace per thread) even if the source
/// graph keeps growing.
///
/// Names are unique among live functions in the process; copies of a
/// SymFunction share its name.
class SymFunction {
 public:
  SymFunction(std::string name, std::vector<ExprRef> inputs, std::vector<ExprRef> outputs);

  const std::string& name() const;
  const std::vector<ExprRef>& inputs() const;
  const std::vector<ExprRef>& outputs() const;
  ExprGraph graph() const;

  /// Compact program: operand indices refer to positions in this vector.
  const std::vector<Node>& program() const;
  /// Graph node index each program entry was copied from.
  const std::vector<std::int32_t>& source_indices() const;
  /// Program position of each input / output.
  const std::vector<std::int32_t>& input_positions() const;
  const std::vector<std::int32_t>& output_positions() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Forward interpretation in topological order. Throws ValidationError on
/// arity/shape mismatch and DomainError (tagged with the source node index)
/// on Log of x <= 0, Sqrt of x < 0 or division by zero.
void evaluate(const SymFunction& f, std::span<const Matrix> inputs, Workspace& ws);
std::vector<Matrix> evaluate(const SymFunction& f, std::span<const Matrix> inputs);
std::vector<Matrix> evaluate(const SymFunction& f, std::initializer_list<Matrix> inputs);

/// `prefix` followed by a process-wide counter; never collides with another
/// name produced by this function.
std::string unique_function_name(std::string_view prefix);

}  // namespace neuropt::sym
