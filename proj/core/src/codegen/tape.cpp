#include "neuropt/codegen/tape.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/symgraph/kernels.hpp"

namespace neuropt::codegen {

namespace {

constexpr std::array<std::string_view, 18> kNames = {
    "LoadConst", "Copy", "Add", "Sub", "Mul",  "Div", "Neg", "Pow",  "Tanh",
    "Sigmoid",   "Relu", "Step", "Exp", "Log", "Sin", "Cos", "Sqrt", "FMA"};

enum class Form { Load, Unary, Binary, PowForm, Fma };

Form form_of(Opcode op) {
  switch (op) {
    case Opcode::LoadConst: return Form::Load;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div: return Form::Binary;
    case Opcode::Pow: return Form::PowForm;
    case Opcode::FMA: return Form::Fma;
    default: return Form::Unary;
  }
}

sym::OpKind kind_of(Opcode op) {
  switch (op) {
    case Opcode::Add: return sym::OpKind::Add;
    case Opcode::Sub: return sym::OpKind::Sub;
    case Opcode::Mul: return sym::OpKind::Mul;
    case Opcode::Div: return sym::OpKind::Div;
    case Opcode::Neg: return sym::OpKind::Neg;
    case Opcode::Pow: return sym::OpKind::Pow;
    case Opcode::Tanh: return sym::OpKind::Tanh;
    case Opcode::Sigmoid: return sym::OpKind::Sigmoid;
    case Opcode::Relu: return sym::OpKind::Relu;
    case Opcode::Step: return sym::OpKind::Step;
    case Opcode::Exp: return sym::OpKind::Exp;
    case Opcode::Log: return sym::OpKind::Log;
    case Opcode::Sin: return sym::OpKind::Sin;
    case Opcode::Cos: return sym::OpKind::Cos;
    case Opcode::Sqrt: return sym::OpKind::Sqrt;
    default: break;
  }
  throw Error(fmt::format("opcode {} has no graph kind", opcode_name(op)));
}

}  // namespace

std::string_view opcode_name(Opcode op) { return kNames[static_cast<std::size_t>(op)]; }

std::optional<Opcode> parse_opcode(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

void Tape::validate() const {
  auto fail = [](std::string msg) { throw ValidationError(fmt::format("invalid tape: {}", msg)); };
  if (n_registers < 0) fail("negative register count");
  std::vector<char> written(static_cast<std::size_t>(n_registers), 0);

  std::int32_t next = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Block& b = inputs[k];
    if (b.rows < 1 || b.cols < 1) fail(fmt::format("input {} has an empty shape", k));
    if (b.start != next) fail(fmt::format("input {} starts at r{}, expected r{}", k, b.start, next));
    next += b.size();
    if (next > n_registers) fail(fmt::format("input {} exceeds the register count", k));
  }
  std::fill(written.begin(), written.begin() + next, 1);

  auto check_read = [&](std::size_t k, const Arg& a, bool allow_const, bool allow_reg) {
    if (a.is_const) {
      if (!allow_const) fail(fmt::format("instruction {}: constant operand not allowed here", k));
      if (a.index < 0 || static_cast<std::size_t>(a.index) >= constants.size()) {
        fail(fmt::format("instruction {}: constant c{} out of range", k, a.index));
      }
    } else {
      if (!allow_reg) fail(fmt::format("instruction {}: register operand not allowed here", k));
      if (a.index < 0 || a.index >= n_registers) fail(fmt::format("instruction {}: register r{} out of range", k, a.index));
      if (!written[static_cast<std::size_t>(a.index)]) {
        fail(fmt::format("instruction {}: r{} read before it is written", k, a.index));
      }
    }
  };

  for (std::size_t k = 0; k < instructions.size(); ++k) {
    const Instr& in = instructions[k];
    const Form f = form_of(in.op);
    const int want = f == Form::Load || f == Form::Unary ? 1 : f == Form::Fma ? 3 : 2;
    if (in.n_args != want) fail(fmt::format("instruction {}: {} takes {} operands", k, opcode_name(in.op), want));
    switch (f) {
      case Form::Load: check_read(k, in.args[0], true, false); break;
      case Form::Unary: check_read(k, in.args[0], false, true); break;
      case Form::Binary:
        check_read(k, in.args[0], false, true);
        check_read(k, in.args[1], true, true);
        break;
      case Form::PowForm:
        check_read(k, in.args[0], false, true);
        check_read(k, in.args[1], true, false);
        break;
      case Form::Fma:
        check_read(k, in.args[0], false, true);
        check_read(k, in.args[1], false, true);
        check_read(k, in.args[2], true, true);
        break;
    }
    if (in.dst < 0 || in.dst >= n_registers) fail(fmt::format("instruction {}: destination r{} out of range", k, in.dst));
    if (written[static_cast<std::size_t>(in.dst)]) fail(fmt::format("instruction {}: r{} written twice", k, in.dst));
    written[static_cast<std::size_t>(in.dst)] = 1;
  }
  for (std::int32_t r = 0; r < n_registers; ++r) {
    if (!written[static_cast<std::size_t>(r)]) fail(fmt::format("r{} is never written", r));
  }
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const Block& b = outputs[k];
    if (b.rows < 1 || b.cols < 1) fail(fmt::format("output {} has an empty shape", k));
    if (b.start < 0 || b.start + b.size() > n_registers) fail(fmt::format("output {} is out of range", k));
  }
}

void Tape::finalize() {
  validate();
  // Linear scan over last uses. Outputs stay live to the end; inputs are
  // live from the start.
  const auto n = static_cast<std::size_t>(n_registers);
  const auto end = static_cast<std::int64_t>(instructions.size());
  std::vector<std::int64_t> last(n, -1);
  for (std::size_t k = 0; k < instructions.size(); ++k) {
    const Instr& in = instructions[k];
    for (std::uint8_t a = 0; a < in.n_args; ++a) {
      if (!in.args[a].is_const) last[static_cast<std::size_t>(in.args[a].index)] = static_cast<std::int64_t>(k);
    }
  }
  for (const Block& b : outputs) {
    for (int i = 0; i < b.size(); ++i) last[static_cast<std::size_t>(b.start + i)] = end;
  }

  slots.assign(n, -1);
  n_slots = 0;
  std::vector<std::int32_t> free_list;
  std::int32_t input_regs = 0;
  for (const Block& b : inputs) input_regs += b.size();
  for (std::int32_t r = 0; r < input_regs; ++r) slots[static_cast<std::size_t>(r)] = n_slots++;
  // Inputs never read and not outputs can be recycled right away.
  for (std::int32_t r = input_regs - 1; r >= 0; --r) {
    if (last[static_cast<std::size_t>(r)] < 0) free_list.push_back(slots[static_cast<std::size_t>(r)]);
  }

  for (std::size_t k = 0; k < instructions.size(); ++k) {
    const Instr& in = instructions[k];
    // Operands dying here release their slots before the result is placed;
    // the interpreter reads all operands before writing.
    for (std::uint8_t a = 0; a < in.n_args; ++a) {
      const Arg& arg = in.args[a];
      if (arg.is_const) continue;
      const auto r = static_cast<std::size_t>(arg.index);
      if (last[r] == static_cast<std::int64_t>(k)) {
        last[r] = -2;  // released
        free_list.push_back(slots[r]);
      }
    }
    std::int32_t slot;
    if (!free_list.empty()) {
      slot = free_list.back();
      free_list.pop_back();
    } else {
      slot = n_slots++;
    }
    slots[static_cast<std::size_t>(in.dst)] = slot;
    if (last[static_cast<std::size_t>(in.dst)] < 0) free_list.push_back(slot);  // dead result
  }
}

std::size_t Tape::arithmetic_count() const {
  return static_cast<std::size_t>(std::count_if(instructions.begin(), instructions.end(), [](const Instr& in) {
    return in.op != Opcode::LoadConst && in.op != Opcode::Copy;
  }));
}

void eval_tape(const Tape& t, std::span<const Matrix> inputs, std::vector<Matrix>& outputs, TapeScratch& scratch) {
  if (t.slots.size() != static_cast<std::size_t>(t.n_registers)) {
    throw ValidationError("eval_tape: tape is not finalized");
  }
  if (inputs.size() != t.inputs.size()) {
    throw ShapeError(fmt::format("eval_tape: expected {} inputs, got {}", t.inputs.size(), inputs.size()));
  }
  auto& v = scratch.values;
  v.resize(static_cast<std::size_t>(t.n_slots));
  const auto* slot = t.slots.data();

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Block& b = t.inputs[k];
    if (inputs[k].rows() != b.rows || inputs[k].cols() != b.cols) {
      throw ShapeError(fmt::format("eval_tape: input {} is ({},{}), expected ({},{})", k, inputs[k].rows(),
                                   inputs[k].cols(), b.rows, b.cols));
    }
    for (int i = 0; i < b.size(); ++i) v[static_cast<std::size_t>(slot[b.start + i])] = inputs[k].data()[i];
  }

  auto read = [&](const Arg& a) {
    return a.is_const ? t.constants[static_cast<std::size_t>(a.index)] : v[static_cast<std::size_t>(slot[a.index])];
  };

  for (std::size_t k = 0; k < t.instructions.size(); ++k) {
    const Instr& in = t.instructions[k];
    double out = 0.0;
    bool ok = true;
    switch (in.op) {
      case Opcode::LoadConst:
      case Opcode::Copy: out = read(in.args[0]); break;
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::Div:
      case Opcode::Pow: ok = sym::binary_scalar(kind_of(in.op), read(in.args[0]), read(in.args[1]), out); break;
      case Opcode::FMA: {
        const double product = read(in.args[1]) * read(in.args[2]);
        out = read(in.args[0]) + product;
        break;
      }
      default: ok = sym::unary_scalar(kind_of(in.op), read(in.args[0]), out); break;
    }
    if (!ok) {
      throw DomainError(fmt::format("{} domain error at instruction {}", opcode_name(in.op), k),
                        static_cast<std::int64_t>(k));
    }
    v[static_cast<std::size_t>(slot[in.dst])] = out;
  }

  outputs.resize(t.outputs.size());
  for (std::size_t k = 0; k < t.outputs.size(); ++k) {
    const Block& b = t.outputs[k];
    outputs[k].resize(b.rows, b.cols);
    for (int i = 0; i < b.size(); ++i) outputs[k].data()[i] = v[static_cast<std::size_t>(slot[b.start + i])];
  }
}

std::vector<Matrix> eval_tape(const Tape& t, std::span<const Matrix> inputs) {
  TapeScratch scratch;
  std::vector<Matrix> out;
  eval_tape(t, inputs, out, scratch);
  return out;
}

std::vector<Matrix> eval_tape(const Tape& t, std::initializer_list<Matrix> inputs) {
  return eval_tape(t, std::span<const Matrix>(inputs.begin(), inputs.size()));
}

}  // namespace neuropt::codegen
