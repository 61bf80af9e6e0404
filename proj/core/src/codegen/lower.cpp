#include "neuropt/codegen/lower.hpp"

#include <bit>
#include <unordered_map>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/symgraph/kernels.hpp"

namespace neuropt::codegen {

namespace {

using sym::OpKind;

// A scalar element during lowering: either known now or held in a register.
struct Val {
  bool is_const = true;
  double c = 0.0;
  std::int32_t reg = -1;
};

Val known(double c) { return Val{true, c, -1}; }
Val in_reg(std::int32_t r) { return Val{false, 0.0, r}; }

Opcode opcode_for(OpKind kind) {
  switch (kind) {
    case OpKind::Add: return Opcode::Add;
    case OpKind::Sub: return Opcode::Sub;
    case OpKind::Mul: return Opcode::Mul;
    case OpKind::Div: return Opcode::Div;
    case OpKind::Neg: return Opcode::Neg;
    case OpKind::Pow: return Opcode::Pow;
    case OpKind::Tanh: return Opcode::Tanh;
    case OpKind::Sigmoid: return Opcode::Sigmoid;
    case OpKind::Relu: return Opcode::Relu;
    case OpKind::Step: return Opcode::Step;
    case OpKind::Exp: return Opcode::Exp;
    case OpKind::Log: return Opcode::Log;
    case OpKind::Sin: return Opcode::Sin;
    case OpKind::Cos: return Opcode::Cos;
    case OpKind::Sqrt: return Opcode::Sqrt;
    default: break;
  }
  throw Error(fmt::format("no scalar opcode for {}", sym::op_name(kind)));
}

class Builder {
 public:
  Tape tape;

  std::int32_t pool(double c) {
    const auto bits = std::bit_cast<std::uint64_t>(c);
    const auto it = pool_index_.find(bits);
    if (it != pool_index_.end()) return it->second;
    const auto idx = static_cast<std::int32_t>(tape.constants.size());
    tape.constants.push_back(c);
    pool_index_.emplace(bits, idx);
    return idx;
  }

  std::int32_t emit(Opcode op, std::initializer_list<Arg> args) {
    Instr in;
    in.op = op;
    in.dst = tape.n_registers++;
    for (const Arg& a : args) in.args[in.n_args++] = a;
    tape.instructions.push_back(in);
    return in.dst;
  }

  std::int32_t fresh_input() { return tape.n_registers++; }

  Arg arg(const Val& v) { return v.is_const ? Arg::pool(pool(v.c)) : Arg::reg(v.reg); }

  std::int32_t materialize(const Val& v) {
    if (!v.is_const) return v.reg;
    const std::int32_t idx = pool(v.c);
    const auto it = loaded_.find(idx);
    if (it != loaded_.end()) return it->second;
    const std::int32_t r = emit(Opcode::LoadConst, {Arg::pool(idx)});
    loaded_.emplace(idx, r);
    return r;
  }

  Val unary(OpKind kind, const Val& a) {
    if (a.is_const) {
      double out = 0.0;
      if (sym::unary_scalar(kind, a.c, out)) return known(out);
    }
    return in_reg(emit(opcode_for(kind), {Arg::reg(materialize(a))}));
  }

  Val binary(OpKind kind, const Val& a, const Val& b) {
    if (a.is_const && b.is_const) {
      double out = 0.0;
      if (sym::binary_scalar(kind, a.c, b.c, out)) return known(out);
    }
    if (kind == OpKind::Pow) return in_reg(emit(Opcode::Pow, {Arg::reg(materialize(a)), Arg::pool(pool(b.c))}));
    if (a.is_const && !b.is_const && (kind == OpKind::Add || kind == OpKind::Mul)) {
      return in_reg(emit(opcode_for(kind), {Arg::reg(b.reg), arg(a)}));
    }
    return in_reg(emit(opcode_for(kind), {Arg::reg(materialize(a)), arg(b)}));
  }

  // acc + a * b with the graph kernel's rounding.
  Val mac(const Val& acc, const Val& a, const Val& b) {
    if (a.is_const && b.is_const) {
      const double p = a.c * b.c;
      if (acc.is_const) return known(acc.c + p);
      return in_reg(emit(Opcode::Add, {Arg::reg(acc.reg), Arg::pool(pool(p))}));
    }
    const Val& k = a.is_const ? a : b;  // constant factor, if any
    const Val& r = a.is_const ? b : a;  // register factor
    if (k.is_const && k.c == 0.0) return acc;
    if (k.is_const && k.c == 1.0) {
      if (acc.is_const) {
        if (acc.c == 0.0) return r;
        return in_reg(emit(Opcode::Add, {Arg::reg(r.reg), Arg::pool(pool(acc.c))}));
      }
      return in_reg(emit(Opcode::Add, {Arg::reg(acc.reg), Arg::reg(r.reg)}));
    }
    const Arg other = a.is_const || b.is_const ? arg(k) : Arg::reg(b.reg);
    if (acc.is_const && acc.c == 0.0) return in_reg(emit(Opcode::Mul, {Arg::reg(r.reg), other}));
    return in_reg(emit(Opcode::FMA, {Arg::reg(materialize(acc)), Arg::reg(r.reg), other}));
  }

 private:
  std::unordered_map<std::uint64_t, std::int32_t> pool_index_;
  std::unordered_map<std::int32_t, std::int32_t> loaded_;
};

// Drops instructions no output depends on, renumbers registers densely and
// compacts the constant pool in first-use order.
Tape prune(const Tape& t) {
  std::vector<char> live(static_cast<std::size_t>(t.n_registers), 0);
  for (const Block& b : t.outputs) {
    for (int i = 0; i < b.size(); ++i) live[static_cast<std::size_t>(b.start + i)] = 1;
  }
  for (auto it = t.instructions.rbegin(); it != t.instructions.rend(); ++it) {
    if (!live[static_cast<std::size_t>(it->dst)]) continue;
    for (std::uint8_t a = 0; a < it->n_args; ++a) {
      if (!it->args[a].is_const) live[static_cast<std::size_t>(it->args[a].index)] = 1;
    }
  }

  Tape out;
  out.inputs = t.inputs;
  std::vector<std::int32_t> remap(static_cast<std::size_t>(t.n_registers), -1);
  for (const Block& b : t.inputs) {
    for (int i = 0; i < b.size(); ++i) remap[static_cast<std::size_t>(b.start + i)] = out.n_registers++;
  }
  std::vector<std::int32_t> const_remap(t.constants.size(), -1);
  for (const Instr& in : t.instructions) {
    if (!live[static_cast<std::size_t>(in.dst)]) continue;
    Instr n = in;
    for (std::uint8_t a = 0; a < n.n_args; ++a) {
      Arg& arg = n.args[a];
      if (arg.is_const) {
        auto& c = const_remap[static_cast<std::size_t>(arg.index)];
        if (c < 0) {
          c = static_cast<std::int32_t>(out.constants.size());
          out.constants.push_back(t.constants[static_cast<std::size_t>(arg.index)]);
        }
        arg.index = c;
      } else {
        arg.index = remap[static_cast<std::size_t>(arg.index)];
      }
    }
    n.dst = remap[static_cast<std::size_t>(in.dst)] = out.n_registers++;
    out.instructions.push_back(n);
  }
  for (const Block& b : t.outputs) {
    out.outputs.push_back(Block{remap[static_cast<std::size_t>(b.start)], b.rows, b.cols});
  }
  return out;
}

}  // namespace

Tape lower(const sym::SymFunction& f) {
  const auto& program = f.program();
  Builder bld;
  std::vector<std::vector<Val>> vals(program.size());

  for (const std::int32_t pos : f.input_positions()) {
    const sym::Node& n = program[static_cast<std::size_t>(pos)];
    const Block b{bld.tape.n_registers, n.shape.rows, n.shape.cols};
    auto& v = vals[static_cast<std::size_t>(pos)];
    for (int i = 0; i < b.size(); ++i) v.push_back(in_reg(bld.fresh_input()));
    bld.tape.inputs.push_back(b);
  }

  for (std::size_t i = 0; i < program.size(); ++i) {
    const sym::Node& n = program[i];
    auto& out = vals[i];
    auto operand = [&](int k) -> const std::vector<Val>& {
      return vals[static_cast<std::size_t>(n.operands[static_cast<std::size_t>(k)])];
    };
    const int size = n.shape.size();

    switch (n.kind) {
      case OpKind::Symbol: break;
      case OpKind::Constant:
        for (int e = 0; e < size; ++e) out.push_back(known(n.payload->data()[e]));
        break;
      case OpKind::Add:
      case OpKind::Sub:
      case OpKind::Mul:
      case OpKind::Div: {
        const auto& a = operand(0);
        const auto& b = operand(1);
        for (int e = 0; e < size; ++e) {
          out.push_back(bld.binary(n.kind, a.size() == 1 ? a[0] : a[static_cast<std::size_t>(e)],
                                   b.size() == 1 ? b[0] : b[static_cast<std::size_t>(e)]));
        }
        break;
      }
      case OpKind::Pow:
        for (const Val& a : operand(0)) out.push_back(bld.binary(OpKind::Pow, a, known(n.exponent)));
        break;
      case OpKind::MatMul: {
        const auto& a = operand(0);
        const auto& b = operand(1);
        const sym::Shape sa = program[static_cast<std::size_t>(n.operands[0])].shape;
        const int inner = sa.cols;
        const int cols = n.shape.cols;
        for (int r = 0; r < n.shape.rows; ++r) {
          for (int c = 0; c < cols; ++c) {
            Val acc = known(0.0);
            for (int k = 0; k < inner; ++k) {
              acc = bld.mac(acc, a[static_cast<std::size_t>(r * inner + k)], b[static_cast<std::size_t>(k * cols + c)]);
            }
            out.push_back(acc);
          }
        }
        break;
      }
      case OpKind::Transpose: {
        const auto& a = operand(0);
        const int rows = n.shape.rows;  // = operand cols
        const int cols = n.shape.cols;
        out.resize(static_cast<std::size_t>(size));
        for (int r = 0; r < cols; ++r) {
          for (int c = 0; c < rows; ++c) {
            out[static_cast<std::size_t>(c * cols + r)] = a[static_cast<std::size_t>(r * rows + c)];
          }
        }
        break;
      }
      case OpKind::Concat:
        for (std::size_t k = 0; k < n.operands.size(); ++k) {
          const auto& part = operand(static_cast<int>(k));
          out.insert(out.end(), part.begin(), part.end());
        }
        break;
      case OpKind::SumSq: {
        Val acc = known(0.0);
        for (const Val& a : operand(0)) acc = bld.mac(acc, a, a);
        out.push_back(acc);
        break;
      }
      default:
        for (const Val& a : operand(0)) out.push_back(bld.unary(n.kind, a));
        break;
    }
  }

  for (const std::int32_t pos : f.output_positions()) {
    const sym::Node& n = program[static_cast<std::size_t>(pos)];
    const auto& v = vals[static_cast<std::size_t>(pos)];
    bool contiguous = !v.front().is_const;
    for (std::size_t e = 0; contiguous && e < v.size(); ++e) {
      contiguous = !v[e].is_const && v[e].reg == v.front().reg + static_cast<std::int32_t>(e);
    }
    Block b{0, n.shape.rows, n.shape.cols};
    if (contiguous) {
      b.start = v.front().reg;
    } else {
      b.start = bld.tape.n_registers;
      for (const Val& e : v) {
        if (e.is_const) {
          bld.emit(Opcode::LoadConst, {Arg::pool(bld.pool(e.c))});
        } else {
          bld.emit(Opcode::Copy, {Arg::reg(e.reg)});
        }
      }
    }
    bld.tape.outputs.push_back(b);
  }

  Tape t = prune(bld.tape);
  t.finalize();
  return t;
}

}  // namespace neuropt::codegen
