#include "neuropt/symgraph/graph.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/symgraph/kernels.hpp"
#include "store.hpp"

namespace neuropt::sym {

namespace detail {

ExprRef GraphStore::append(Node node) {
  const auto next = static_cast<std::int32_t>(nodes.size());
  bool all_constant = !node.operands.empty();
  for (const std::int32_t op : node.operands) {
    if (op < 0 || op >= next) throw std::logic_error("graph acyclicity violated");
    all_constant = all_constant && nodes[op].kind == OpKind::Constant;
  }

  if (all_constant) {
    std::vector<const Matrix*> args;
    args.reserve(node.operands.size());
    for (const std::int32_t op : node.operands) args.push_back(nodes[op].payload.get());
    auto value = std::make_shared<Matrix>();
    try {
      evaluate_node(node, args, *value, next);
      Node folded;
      folded.kind = OpKind::Constant;
      folded.shape = node.shape;
      folded.payload = std::move(value);
      nodes.push_back(std::move(folded));
      return ref(next);
    } catch (const DomainError&) {
      // Leave the node unfolded; the error resurfaces at evaluation time.
    }
  }

  nodes.push_back(std::move(node));
  return ref(next);
}

}  // namespace detail

namespace {

using detail::GraphStore;

void require_same_graph(std::string_view op, const ExprRef& a, const ExprRef& b) {
  if (!a.same_graph(b)) {
    throw ValidationError(fmt::format("{}: operands belong to different graphs", op));
  }
}

Node make_node(OpKind kind, Shape shape, std::initializer_list<std::int32_t> operands) {
  Node n;
  n.kind = kind;
  n.shape = shape;
  n.operands.assign(operands);
  return n;
}

}  // namespace

std::string to_string(const Shape& shape) { return fmt::format("({},{})", shape.rows, shape.cols); }

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Symbol: return "Symbol";
    case OpKind::Constant: return "Constant";
    case OpKind::Add: return "Add";
    case OpKind::Sub: return "Sub";
    case OpKind::Mul: return "Mul";
    case OpKind::Div: return "Div";
    case OpKind::Neg: return "Neg";
    case OpKind::Pow: return "Pow";
    case OpKind::MatMul: return "MatMul";
    case OpKind::Transpose: return "Transpose";
    case OpKind::Concat: return "Concat";
    case OpKind::Tanh: return "Tanh";
    case OpKind::Sigmoid: return "Sigmoid";
    case OpKind::Relu: return "Relu";
    case OpKind::Step: return "Step";
    case OpKind::Exp: return "Exp";
    case OpKind::Log: return "Log";
    case OpKind::Sin: return "Sin";
    case OpKind::Cos: return "Cos";
    case OpKind::Sqrt: return "Sqrt";
    case OpKind::SumSq: return "SumSq";
  }
  return "?";
}

bool is_elementwise_unary(OpKind kind) {
  switch (kind) {
    case OpKind::Neg:
    case OpKind::Tanh:
    case OpKind::Sigmoid:
    case OpKind::Relu:
    case OpKind::Step:
    case OpKind::Exp:
    case OpKind::Log:
    case OpKind::Sin:
    case OpKind::Cos:
    case OpKind::Sqrt: return true;
    default: return false;
  }
}

bool is_elementwise_binary(OpKind kind) {
  return kind == OpKind::Add || kind == OpKind::Sub || kind == OpKind::Mul || kind == OpKind::Div;
}

// ---------------------------------------------------------------------------
// ExprRef

const Node& ExprRef::node() const { return store_->nodes[static_cast<std::size_t>(index_)]; }

bool ExprRef::is_zero() const {
  const Node& n = node();
  return n.kind == OpKind::Constant && (n.payload->array() == 0.0).all();
}

const Matrix& ExprRef::constant_value() const {
  if (!is_constant()) {
    throw ValidationError(fmt::format("node {} is {}, not a Constant", index_, op_name(kind())));
  }
  return *node().payload;
}

const std::string& ExprRef::symbol_name() const {
  if (!is_symbol()) {
    throw ValidationError(fmt::format("node {} is {}, not a Symbol", index_, op_name(kind())));
  }
  return node().name;
}

ExprGraph ExprRef::graph() const { return ExprGraph(store_); }

// ---------------------------------------------------------------------------
// ExprGraph

ExprGraph::ExprGraph() : store_(std::make_shared<GraphStore>()) {}

ExprRef ExprGraph::symbol(std::string name, int rows, int cols) {
  if (name.empty()) throw ValidationError("symbol name must be nonempty");
  if (rows < 1 || cols < 1) {
    throw ShapeError(fmt::format("symbol '{}': invalid shape ({},{})", name, rows, cols));
  }
  if (store_->symbols.contains(name)) {
    throw ValidationError(fmt::format("duplicate symbol name '{}'", name));
  }
  Node n;
  n.kind = OpKind::Symbol;
  n.shape = Shape{rows, cols};
  n.name = name;
  ExprRef r = store_->append(std::move(n));
  store_->symbols.emplace(std::move(name), r.index());
  return r;
}

ExprRef ExprGraph::constant(const Matrix& value) {
  if (value.rows() < 1 || value.cols() < 1) throw ShapeError("constant must be nonempty");
  Node n;
  n.kind = OpKind::Constant;
  n.shape = Shape{static_cast<int>(value.rows()), static_cast<int>(value.cols())};
  n.payload = std::make_shared<const Matrix>(value);
  return store_->append(std::move(n));
}

ExprRef ExprGraph::constant(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw ShapeError("constant must be nonempty");
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw ShapeError(fmt::format("ragged constant: row {} has {} entries, expected {}", i,
                                   rows[i].size(), cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return constant(m);
}

ExprRef ExprGraph::constant(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> v;
  for (const auto& r : rows) v.emplace_back(r);
  return constant(v);
}

ExprRef ExprGraph::column(std::span<const double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return constant(m);
}

ExprRef ExprGraph::scalar(double value) { return constant(Matrix::Constant(1, 1, value)); }
ExprRef ExprGraph::zeros(int rows, int cols) { return constant(Matrix::Zero(rows, cols)); }
ExprRef ExprGraph::ones(int rows, int cols) { return constant(Matrix::Ones(rows, cols)); }

std::size_t ExprGraph::size() const { return store_->nodes.size(); }

const Node& ExprGraph::node(std::int32_t index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= store_->nodes.size()) {
    throw ValidationError(fmt::format("node index {} out of range", index));
  }
  return store_->nodes[static_cast<std::size_t>(index)];
}

ExprRef ExprGraph::ref(std::int32_t index) const {
  (void)node(index);
  return store_->ref(index);
}

std::optional<ExprRef> ExprGraph::find_symbol(std::string_view name) const {
  const auto it = store_->symbols.find(std::string(name));
  if (it == store_->symbols.end()) return std::nullopt;
  return store_->ref(it->second);
}

// ---------------------------------------------------------------------------
// Builders


namespace {

ExprRef append(const ExprRef& anchor, Node node) {
  return detail::Access::store(anchor).append(std::move(node));
}

Shape broadcast_shape(OpKind kind, const ExprRef& a, const ExprRef& b) {
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  if (sa == sb) return sa;
  if (sa.is_scalar()) return sb;
  if (sb.is_scalar()) return sa;
  throw ShapeError(fmt::format("{}: incompatible shapes {} and {}", op_name(kind), to_string(sa),
                               to_string(sb)));
}

}  // namespace

ExprRef apply_binary(OpKind kind, const ExprRef& a, const ExprRef& b) {
  if (!is_elementwise_binary(kind)) {
    throw ValidationError(fmt::format("apply_binary: {} is not Add/Sub/Mul/Div", op_name(kind)));
  }
  require_same_graph(op_name(kind), a, b);
  const Shape shape = broadcast_shape(kind, a, b);
  return append(a, make_node(kind, shape, {a.index(), b.index()}));
}

ExprRef apply_unary(OpKind kind, const ExprRef& a) {
  if (!is_elementwise_unary(kind)) {
    throw ValidationError(fmt::format("apply_unary: {} is not an elementwise kind", op_name(kind)));
  }
  return append(a, make_node(kind, a.shape(), {a.index()}));
}

ExprRef add(const ExprRef& a, const ExprRef& b) { return apply_binary(OpKind::Add, a, b); }
ExprRef sub(const ExprRef& a, const ExprRef& b) { return apply_binary(OpKind::Sub, a, b); }
ExprRef mul(const ExprRef& a, const ExprRef& b) { return apply_binary(OpKind::Mul, a, b); }
ExprRef div(const ExprRef& a, const ExprRef& b) { return apply_binary(OpKind::Div, a, b); }
ExprRef neg(const ExprRef& a) { return apply_unary(OpKind::Neg, a); }
ExprRef tanh(const ExprRef& a) { return apply_unary(OpKind::Tanh, a); }
ExprRef sigmoid(const ExprRef& a) { return apply_unary(OpKind::Sigmoid, a); }
ExprRef relu(const ExprRef& a) { return apply_unary(OpKind::Relu, a); }
ExprRef step(const ExprRef& a) { return apply_unary(OpKind::Step, a); }
ExprRef exp(const ExprRef& a) { return apply_unary(OpKind::Exp, a); }
ExprRef log(const ExprRef& a) { return apply_unary(OpKind::Log, a); }
ExprRef sin(const ExprRef& a) { return apply_unary(OpKind::Sin, a); }
ExprRef cos(const ExprRef& a) { return apply_unary(OpKind::Cos, a); }
ExprRef sqrt(const ExprRef& a) { return apply_unary(OpKind::Sqrt, a); }

ExprRef pow(const ExprRef& a, double exponent) {
  if (!std::isfinite(exponent)) throw ValidationError("pow: exponent must be finite");
  Node n = make_node(OpKind::Pow, a.shape(), {a.index()});
  n.exponent = exponent;
  return append(a, std::move(n));
}

ExprRef matmul(const ExprRef& a, const ExprRef& b) {
  require_same_graph("MatMul", a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError(fmt::format("MatMul: inner dimensions differ, {} x {}", to_string(a.shape()),
                                 to_string(b.shape())));
  }
  return append(a, make_node(OpKind::MatMul, Shape{a.rows(), b.cols()}, {a.index(), b.index()}));
}

ExprRef transpose(const ExprRef& a) {
  return append(a, make_node(OpKind::Transpose, Shape{a.cols(), a.rows()}, {a.index()}));
}

ExprRef vcat(std::span<const ExprRef> parts) {
  if (parts.empty()) throw ShapeError("Concat: no parts");
  if (parts.size() == 1) return parts.front();
  Node n;
  n.kind = OpKind::Concat;
  n.shape = Shape{0, parts.front().cols()};
  n.operands.reserve(parts.size());
  for (const ExprRef& p : parts) {
    require_same_graph("Concat", parts.front(), p);
    if (p.cols() != n.shape.cols) {
      throw ShapeError(fmt::format("Concat: column mismatch, {} vs {}", to_string(parts.front().shape()),
                                   to_string(p.shape())));
    }
    n.shape.rows += p.rows();
    n.operands.push_back(p.index());
  }
  return append(parts.front(), std::move(n));
}

ExprRef vcat(std::initializer_list<ExprRef> parts) {
  return vcat(std::span<const ExprRef>(parts.begin(), parts.size()));
}

ExprRef sumsq(const ExprRef& a) {
  return append(a, make_node(OpKind::SumSq, Shape{1, 1}, {a.index()}));
}

ExprRef slice_rows(const ExprRef& a, int start, int count) {
  if (start < 0 || count < 1 || start + count > a.rows()) {
    throw ShapeError(fmt::format("slice_rows: rows [{}, {}) outside {}", start, start + count,
                                 to_string(a.shape())));
  }
  if (start == 0 && count == a.rows()) return a;
  Matrix sel = Matrix::Zero(count, a.rows());
  for (int i = 0; i < count; ++i) sel(i, start + i) = 1.0;
  return matmul(a.graph().constant(sel), a);
}

ExprRef sum(const ExprRef& a) {
  ExprGraph g = a.graph();
  ExprRef r = a;
  if (r.rows() > 1) r = matmul(g.ones(1, r.rows()), r);
  if (r.cols() > 1) r = matmul(r, g.ones(r.cols(), 1));
  return r;
}

ExprRef dot(const ExprRef& a, const ExprRef& b) {
  if (!a.shape().is_column() || a.shape() != b.shape()) {
    throw ShapeError(fmt::format("dot: need equal column vectors, got {} and {}", to_string(a.shape()),
                                 to_string(b.shape())));
  }
  return matmul(transpose(a), b);
}

ExprRef rebuild(const Node& node, std::span<const ExprRef> ops) {
  switch (node.kind) {
    case OpKind::Symbol:
    case OpKind::Constant:
      throw ValidationError("rebuild: leaf nodes cannot be rebuilt");
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Mul:
    case OpKind::Div: return apply_binary(node.kind, ops[0], ops[1]);
    case OpKind::Pow: return pow(ops[0], node.exponent);
    case OpKind::MatMul: return matmul(ops[0], ops[1]);
    case OpKind::Transpose: return transpose(ops[0]);
    case OpKind::Concat: return vcat(ops);
    case OpKind::SumSq: return sumsq(ops[0]);
    default: return apply_unary(node.kind, ops[0]);
  }
}

std::vector<ExprRef> free_symbols(std::span<const ExprRef> roots) {
  if (roots.empty()) return {};
  auto& s = detail::Access::store(roots.front());
  std::int32_t top = 0;
  for (const ExprRef& r : roots) {
    require_same_graph("free_symbols", roots.front(), r);
    top = std::max(top, r.index());
  }
  std::vector<char> seen(static_cast<std::size_t>(top) + 1, 0);
  std::vector<std::int32_t> stack;
  for (const ExprRef& r : roots) stack.push_back(r.index());
  std::vector<std::int32_t> found;
  while (!stack.empty()) {
    const std::int32_t i = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(i)]) continue;
    seen[static_cast<std::size_t>(i)] = 1;
    const Node& n = s.nodes[static_cast<std::size_t>(i)];
    if (n.kind == OpKind::Symbol) found.push_back(i);
    for (const std::int32_t op : n.operands) stack.push_back(op);
  }
  std::sort(found.begin(), found.end());
  std::vector<ExprRef> out;
  out.reserve(found.size());
  for (const std::int32_t i : found) out.push_back(s.ref(i));
  return out;
}

ExprRef operator+(const ExprRef& a, double b) { return add(a, a.graph().scalar(b)); }
ExprRef operator+(double a, const ExprRef& b) { return add(b.graph().scalar(a), b); }
ExprRef operator-(const ExprRef& a, double b) { return sub(a, a.graph().scalar(b)); }
ExprRef operator-(double a, const ExprRef& b) { return sub(b.graph().scalar(a), b); }
ExprRef operator*(const ExprRef& a, double b) { return mul(a, a.graph().scalar(b)); }
ExprRef operator*(double a, const ExprRef& b) { return mul(b.graph().scalar(a), b); }
ExprRef operator/(const ExprRef& a, double b) { return div(a, a.graph().scalar(b)); }
ExprRef operator/(double a, const ExprRef& b) { return div(b.graph().scalar(a), b); }

}  // namespace neuropt::sym
