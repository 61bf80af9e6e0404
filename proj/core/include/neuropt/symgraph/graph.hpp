#pragma once

#include <initializer_list>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuropt/linalg.hpp"

namespace neuropt::sym {

struct Shape {
  int rows = 1;
  int cols = 1;

  constexpr bool is_scalar() const { return rows == 1 && cols == 1; }
  constexpr bool is_column() const { return cols == 1; }
  constexpr int size() const { return rows * cols; }

  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

/// Closed set of node kinds. `Step` (Heaviside with H(0) = 0) only arises from
/// differentiating `Relu`; it has zero derivative everywhere.
enum class OpKind : std::uint8_t {
  Symbol,
  Constant,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,
  MatMul,
  Transpose,
  Concat,
  Tanh,
  Sigmoid,
  Relu,
  Step,
  Exp,
  Log,
  Sin,
  Cos,
  Sqrt,
  SumSq,
};

std::string_view op_name(OpKind kind);
bool is_elementwise_unary(OpKind kind);
bool is_elementwise_binary(OpKind kind);

struct Node {
  OpKind kind = OpKind::Constant;
  Shape shape;
  std::vector<std::int32_t> operands;
  std::shared_ptr<const Matrix> payload;  // Constant only
  double exponent = 0.0;                  // Pow only
  std::string name;                       // Symbol only
};

namespace detail {
struct GraphStore;
struct Access;
}

class ExprGraph;

/// Handle to one node of an ExprGraph. Nodes are immutable once created, so a
/// reference stays valid (and keeps the graph alive) for its whole lifetime.
class ExprRef {
 public:
  const Node& node() const;
  const Shape& shape() const { return node().shape; }
  int rows() const { return shape().rows; }
  int cols() const { return shape().cols; }
  OpKind kind() const { return node().kind; }
  std::int32_t index() const { return index_; }

  bool is_symbol() const { return kind() == OpKind::Symbol; }
  bool is_constant() const { return kind() == OpKind::Constant; }
  /// True for a Constant whose entries are all zero.
  bool is_zero() const;

  /// Payload of a Constant node; throws ValidationError otherwise.
  const Matrix& constant_value() const;
  /// Name of a Symbol node; throws ValidationError otherwise.
  const std::string& symbol_name() const;

  ExprGraph graph() const;
  bool same_graph(const ExprRef& other) const { return store_ == other.store_; }

  /// Identity comparison: same graph and same node.
  friend bool operator==(const ExprRef& a, const ExprRef& b) {
    return a.store_ == b.store_ && a.index_ == b.index_;
  }

 private:
  friend class ExprGraph;
  friend struct detail::GraphStore;
  friend struct detail::Access;
  ExprRef(std::shared_ptr<detail::GraphStore> store, std::int32_t index)
      : store_(std::move(store)), index_(index) {}

  std::shared_ptr<detail::GraphStore> store_;
  std::int32_t index_ = 0;
};

/// Append-only DAG of matrix-valued operations. Copies of an ExprGraph share
/// the same underlying store.
///
/// Construction is not synchronized: build a graph from one thread at a time.
class ExprGraph {
 public:
  ExprGraph();

  /// Declares a free variable. Names are unique within a graph.
  ExprRef symbol(std::string name, int rows, int cols = 1);
  ExprRef constant(const Matrix& value);
  /// Row-major nested list; rejects ragged or empty input.
  ExprRef constant(const std::vector<std::vector<double>>& rows);
  ExprRef constant(std::initializer_list<std::initializer_list<double>> rows);
  ExprRef column(std::span<const double> values);
  ExprRef scalar(double value);
  ExprRef zeros(int rows, int cols);
  ExprRef ones(int rows, int cols);

  std::size_t size() const;
  const Node& node(std::int32_t index) const;
  ExprRef ref(std::int32_t index) const;
  std::optional<ExprRef> find_symbol(std::string_view name) const;

  friend bool operator==(const ExprGraph& a, const ExprGraph& b) { return a.store_ == b.store_; }

 private:
  friend class ExprRef;
  friend struct detail::Access;
  explicit ExprGraph(std::shared_ptr<detail::GraphStore> store) : store_(std::move(store)) {}
  std::shared_ptr<detail::GraphStore> store_;
};

// Builders. Every builder folds its node into a Constant when all operands
// are Constant; no other simplification is performed.

ExprRef apply_binary(OpKind kind, const ExprRef& a, const ExprRef& b);
ExprRef apply_unary(OpKind kind, const ExprRef& a);

ExprRef add(const ExprRef& a, const ExprRef& b);
ExprRef sub(const ExprRef& a, const ExprRef& b);
ExprRef mul(const ExprRef& a, const ExprRef& b);
ExprRef div(const ExprRef& a, const ExprRef& b);
ExprRef neg(const ExprRef& a);
ExprRef pow(const ExprRef& a, double exponent);
ExprRef matmul(const ExprRef& a, const ExprRef& b);
ExprRef transpose(const ExprRef& a);
/// Vertical concatenation; all parts need the same column count.
ExprRef vcat(std::span<const ExprRef> parts);
ExprRef vcat(std::initializer_list<ExprRef> parts);

ExprRef tanh(const ExprRef& a);
ExprRef sigmoid(const ExprRef& a);
ExprRef relu(const ExprRef& a);
ExprRef step(const ExprRef& a);
ExprRef exp(const ExprRef& a);
ExprRef log(const ExprRef& a);
ExprRef sin(const ExprRef& a);
ExprRef cos(const ExprRef& a);
ExprRef sqrt(const ExprRef& a);
/// Scalar sum of squares of all entries.
ExprRef sumsq(const ExprRef& a);

/// Rows [start, start + count) of `a`, expressed as a product with a constant
/// selection matrix.
ExprRef slice_rows(const ExprRef& a, int start, int count);
/// Sum of all entries as a (1,1) node.
ExprRef sum(const ExprRef& a);
/// Inner product of two column vectors, (1,1).
ExprRef dot(const ExprRef& a, const ExprRef& b);

/// Rebuilds `node`'s operation over new operands of matching shapes.
ExprRef rebuild(const Node& node, std::span<const ExprRef> operands);

/// All Symbol nodes reachable from `roots`, ordered by node index.
std::vector<ExprRef> free_symbols(std::span<const ExprRef> roots);

inline ExprRef operator+(const ExprRef& a, const ExprRef& b) { return add(a, b); }
inline ExprRef operator-(const ExprRef& a, const ExprRef& b) { return sub(a, b); }
inline ExprRef operator*(const ExprRef& a, const ExprRef& b) { return mul(a, b); }
inline ExprRef operator/(const ExprRef& a, const ExprRef& b) { return div(a, b); }
inline ExprRef operator-(const ExprRef& a) { return neg(a); }

ExprRef operator+(const ExprRef& a, double b);
ExprRef operator+(double a, const ExprRef& b);
ExprRef operator-(const ExprRef& a, double b);
ExprRef operator-(double a, const ExprRef& b);
ExprRef operator*(const ExprRef& a, double b);
ExprRef operator*(double a, const ExprRef& b);
ExprRef operator/(const ExprRef& a, double b);
ExprRef operator/(double a, const ExprRef& b);

}  // namespace neuropt::sym
