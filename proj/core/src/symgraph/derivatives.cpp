#include "neuropt/symgraph/derivatives.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "store.hpp"

namespace neuropt::sym {

namespace {

using detail::GraphStore;

// Reverse sweep over the subgraph below `y`, restricted to nodes that depend
// on one of the `wrt` symbols. Reusable for several seeds (Jacobian rows).
class Sweep {
 public:
  Sweep(const ExprRef& y, std::span<const ExprRef> wrt)
      : store_(detail::Access::store(y)), graph_(y.graph()), top_(y.index()) {
    for (const ExprRef& w : wrt) {
      if (!w.same_graph(y)) throw ValidationError("differentiation across graphs");
      if (!w.is_symbol()) {
        throw ValidationError(fmt::format("cannot differentiate with respect to node {} ({})",
                                          w.index(), op_name(w.kind())));
      }
      wrt_.push_back(w.index());
    }
    const auto n = static_cast<std::size_t>(top_) + 1;
    dep_.assign(n, 0);
    for (std::int32_t i = 0; i <= top_; ++i) {
      const Node& node = store_.nodes[static_cast<std::size_t>(i)];
      if (node.kind == OpKind::Symbol) {
        dep_[static_cast<std::size_t>(i)] =
            std::find(wrt_.begin(), wrt_.end(), i) != wrt_.end() ? 1 : 0;
        continue;
      }
      for (const std::int32_t op : node.operands) {
        if (dep_[static_cast<std::size_t>(op)]) {
          dep_[static_cast<std::size_t>(i)] = 1;
          break;
        }
      }
    }
  }

  std::vector<ExprRef> run(const ExprRef& seed) {
    adj_.assign(static_cast<std::size_t>(top_) + 1, -1);
    if (!seed.is_zero() && dep_[static_cast<std::size_t>(top_)]) adj_[static_cast<std::size_t>(top_)] = seed.index();

    for (std::int32_t i = top_; i >= 0; --i) {
      const std::int32_t a = adj_[static_cast<std::size_t>(i)];
      if (a < 0) continue;
      const Node& node = store_.nodes[static_cast<std::size_t>(i)];
      if (node.kind == OpKind::Symbol) continue;
      propagate(i, node, store_.ref(a));
    }

    std::vector<ExprRef> out;
    out.reserve(wrt_.size());
    for (const std::int32_t w : wrt_) {
      const std::int32_t a = w <= top_ ? adj_[static_cast<std::size_t>(w)] : -1;
      if (a >= 0) {
        out.push_back(store_.ref(a));
      } else {
        const Shape s = store_.nodes[static_cast<std::size_t>(w)].shape;
        out.push_back(graph_.zeros(s.rows, s.cols));
      }
    }
    return out;
  }

 private:
  bool wants(std::int32_t op) const { return dep_[static_cast<std::size_t>(op)] != 0; }
  ExprRef at(std::int32_t op) const { return store_.ref(op); }

  void accumulate(std::int32_t op, ExprRef contribution) {
    if (contribution.is_zero()) return;
    const Shape target = store_.nodes[static_cast<std::size_t>(op)].shape;
    if (target.is_scalar() && !contribution.shape().is_scalar()) contribution = sum(contribution);
    std::int32_t& slot = adj_[static_cast<std::size_t>(op)];
    slot = slot < 0 ? contribution.index() : add(at(slot), contribution).index();
  }

  void propagate(std::int32_t self, const Node& node, const ExprRef& adj) {
    const ExprRef y = at(self);
    const auto& ops = node.operands;
    auto unary = [&](auto&& local) {
      if (wants(ops[0])) accumulate(ops[0], local());
    };

    switch (node.kind) {
      case OpKind::Symbol:
      case OpKind::Constant:
      case OpKind::Step: return;
      case OpKind::Add:
        if (wants(ops[0])) accumulate(ops[0], adj);
        if (wants(ops[1])) accumulate(ops[1], adj);
        return;
      case OpKind::Sub:
        if (wants(ops[0])) accumulate(ops[0], adj);
        if (wants(ops[1])) accumulate(ops[1], -adj);
        return;
      case OpKind::Mul:
        if (wants(ops[0])) accumulate(ops[0], adj * at(ops[1]));
        if (wants(ops[1])) accumulate(ops[1], adj * at(ops[0]));
        return;
      case OpKind::Div:
        if (wants(ops[0])) accumulate(ops[0], adj / at(ops[1]));
        if (wants(ops[1])) accumulate(ops[1], -(adj * y) / at(ops[1]));
        return;
      case OpKind::Neg: unary([&] { return -adj; }); return;
      case OpKind::Pow: {
        const double p = node.exponent;
        if (p == 0.0) return;
        unary([&] {
          const ExprRef a = at(ops[0]);
          if (p == 1.0) return adj;
          if (p == 2.0) return adj * (2.0 * a);
          return adj * (p * pow(a, p - 1.0));
        });
        return;
      }
      case OpKind::MatMul:
        if (wants(ops[0])) accumulate(ops[0], matmul(adj, transpose(at(ops[1]))));
        if (wants(ops[1])) accumulate(ops[1], matmul(transpose(at(ops[0])), adj));
        return;
      case OpKind::Transpose: unary([&] { return transpose(adj); }); return;
      case OpKind::Concat: {
        int offset = 0;
        for (const std::int32_t op : ops) {
          const int rows = store_.nodes[static_cast<std::size_t>(op)].shape.rows;
          if (wants(op)) {
            if (adj.is_constant()) {
              const Matrix block = adj.constant_value().middleRows(offset, rows);
              if (!(block.array() == 0.0).all()) accumulate(op, graph_.constant(block));
            } else {
              accumulate(op, slice_rows(adj, offset, rows));
            }
          }
          offset += rows;
        }
        return;
      }
      case OpKind::Tanh: unary([&] { return adj * (1.0 - y * y); }); return;
      case OpKind::Sigmoid: unary([&] { return adj * (y * (1.0 - y)); }); return;
      case OpKind::Relu: unary([&] { return adj * step(at(ops[0])); }); return;
      case OpKind::Exp: unary([&] { return adj * y; }); return;
      case OpKind::Log: unary([&] { return adj / at(ops[0]); }); return;
      case OpKind::Sin: unary([&] { return adj * cos(at(ops[0])); }); return;
      case OpKind::Cos: unary([&] { return adj * -sin(at(ops[0])); }); return;
      case OpKind::Sqrt: unary([&] { return adj / (2.0 * y); }); return;
      case OpKind::SumSq: unary([&] { return (adj * 2.0) * at(ops[0]); }); return;
    }
  }

  GraphStore& store_;
  ExprGraph graph_;
  std::int32_t top_;
  std::vector<std::int32_t> wrt_;
  std::vector<char> dep_;
  std::vector<std::int32_t> adj_;
};

void require_column_symbol(std::string_view what, const ExprRef& x) {
  if (!x.is_symbol()) {
    throw ValidationError(fmt::format("{}: x must be a Symbol, got {} (node {})", what,
                                      op_name(x.kind()), x.index()));
  }
  if (!x.shape().is_column()) {
    throw ShapeError(fmt::format("{}: x must be a column, got {}", what, to_string(x.shape())));
  }
}

}  // namespace

std::vector<ExprRef> gradients(const ExprRef& y, const ExprRef& seed, std::span<const ExprRef> wrt) {
  if (!seed.same_graph(y)) throw ValidationError("gradients: seed belongs to another graph");
  if (seed.shape() != y.shape()) {
    throw ShapeError(fmt::format("gradients: seed shape {} differs from output shape {}",
                                 to_string(seed.shape()), to_string(y.shape())));
  }
  Sweep sweep(y, wrt);
  return sweep.run(seed);
}

ExprRef gradient(const ExprRef& f, const ExprRef& x) {
  if (!f.shape().is_scalar()) {
    throw ShapeError(fmt::format("gradient: f must be scalar, got {}", to_string(f.shape())));
  }
  const ExprRef wrt[] = {x};
  return gradients(f, f.graph().scalar(1.0), wrt).front();
}

ExprRef jacobian(const ExprRef& f, const ExprRef& x) {
  require_column_symbol("jacobian", x);
  if (!f.same_graph(x)) throw ValidationError("jacobian: f and x belong to different graphs");
  if (!f.shape().is_column()) {
    throw ShapeError(fmt::format("jacobian: f must be a column, got {}", to_string(f.shape())));
  }
  ExprGraph g = f.graph();
  const ExprRef wrt[] = {x};
  Sweep sweep(f, wrt);
  const int m = f.rows();
  std::vector<ExprRef> rows;
  rows.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Matrix e = Matrix::Zero(m, 1);
    e(i, 0) = 1.0;
    rows.push_back(transpose(sweep.run(g.constant(e)).front()));
  }
  return vcat(rows);
}

HessianResult hessian(const ExprRef& f, const ExprRef& x) {
  require_column_symbol("hessian", x);
  if (!f.shape().is_scalar()) {
    throw ShapeError(fmt::format("hessian: f must be scalar, got {}", to_string(f.shape())));
  }
  const ExprRef grad = transpose(jacobian(f, x));
  return HessianResult{jacobian(grad, x), grad};
}

std::vector<ExprRef> substitute(std::span<const ExprRef> roots, std::span<const Binding> bindings) {
  if (roots.empty()) return {};
  GraphStore& store = detail::Access::store(roots.front());
  std::int32_t top = 0;
  for (const ExprRef& r : roots) {
    if (!r.same_graph(roots.front())) throw ValidationError("substitute: roots span graphs");
    top = std::max(top, r.index());
  }

  std::vector<std::int32_t> mapped(static_cast<std::size_t>(top) + 1, -1);
  for (const auto& [sym, value] : bindings) {
    if (!sym.same_graph(roots.front()) || !value.same_graph(roots.front())) {
      throw ValidationError("substitute: binding from another graph");
    }
    if (!sym.is_symbol()) {
      throw ValidationError(fmt::format("substitute: node {} is {}, not a Symbol", sym.index(),
                                        op_name(sym.kind())));
    }
    if (sym.shape() != value.shape()) {
      throw ShapeError(fmt::format("substitute: '{}' has shape {}, replacement has {}",
                                   sym.symbol_name(), to_string(sym.shape()),
                                   to_string(value.shape())));
    }
    if (sym.index() <= top) mapped[static_cast<std::size_t>(sym.index())] = value.index();
  }

  std::vector<ExprRef> ops;
  for (std::int32_t i = 0; i <= top; ++i) {
    auto& slot = mapped[static_cast<std::size_t>(i)];
    const Node& node = store.nodes[static_cast<std::size_t>(i)];
    if (slot >= 0 || node.kind == OpKind::Symbol || node.kind == OpKind::Constant) {
      if (slot < 0) slot = i;
      continue;
    }
    bool changed = false;
    ops.clear();
    for (const std::int32_t op : node.operands) {
      const std::int32_t m = mapped[static_cast<std::size_t>(op)];
      changed = changed || m != op;
      ops.push_back(store.ref(m));
    }
    slot = changed ? rebuild(node, ops).index() : i;
  }

  std::vector<ExprRef> out;
  out.reserve(roots.size());
  for (const ExprRef& r : roots) out.push_back(store.ref(mapped[static_cast<std::size_t>(r.index())]));
  return out;
}

ExprRef substitute(const ExprRef& e, std::span<const Binding> bindings) {
  const ExprRef roots[] = {e};
  return substitute(roots, bindings).front();
}

ExprRef substitute(const ExprRef& e, std::initializer_list<Binding> bindings) {
  return substitute(e, std::span<const Binding>(bindings.begin(), bindings.size()));
}

}  // namespace neuropt::sym
