#include <cctype>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "neuropt/codegen/emit.hpp"
#include "neuropt/error.hpp"

namespace neuropt::codegen {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (const char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

// Round-trippable C double literal; negatives are parenthesized so they can
// follow a binary operator.
std::string literal(double v) {
  if (std::isnan(v)) return "NAN";
  if (std::isinf(v)) return v > 0 ? "INFINITY" : "(-INFINITY)";
  std::string s = fmt::format("{:.17g}", v);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return std::signbit(v) ? "(" + s + ")" : s;
}

}  // namespace

std::string emit_source(const Tape& t, std::string_view name, const SourceOptions& opts) {
  if (!is_identifier(name)) throw ValidationError(fmt::format("'{}' is not a valid C identifier", name));
  t.validate();

  auto operand = [&](const Arg& a) {
    return a.is_const ? literal(t.constants[static_cast<std::size_t>(a.index)]) : fmt::format("r{}", a.index);
  };

  std::string out;
  out += "#include <math.h>\n\n";
  if (opts.fp_contract_pragma) out += "#pragma STDC FP_CONTRACT OFF\n\n";
  std::int32_t n_in = 0;
  for (const Block& b : t.inputs) n_in += b.size();
  std::int32_t n_out = 0;
  for (const Block& b : t.outputs) n_out += b.size();
  out += fmt::format("/* in[{}], out[{}] */\n", n_in, n_out);
  out += fmt::format("void {}(const double* in, double* out) {{\n", name);

  for (std::int32_t r = 0; r < n_in; ++r) out += fmt::format("  const double r{} = in[{}];\n", r, r);
  for (const Instr& in : t.instructions) {
    const std::string a = in.n_args > 0 ? operand(in.args[0]) : std::string();
    const std::string b = in.n_args > 1 ? operand(in.args[1]) : std::string();
    std::string rhs;
    switch (in.op) {
      case Opcode::LoadConst:
      case Opcode::Copy: rhs = a; break;
      case Opcode::Add: rhs = a + " + " + b; break;
      case Opcode::Sub: rhs = a + " - " + b; break;
      case Opcode::Mul: rhs = a + " * " + b; break;
      case Opcode::Div: rhs = a + " / " + b; break;
      case Opcode::Neg: rhs = "-" + a; break;
      case Opcode::Pow: rhs = fmt::format("pow({}, {})", a, b); break;
      case Opcode::Tanh: rhs = fmt::format("tanh({})", a); break;
      case Opcode::Sigmoid: rhs = fmt::format("1.0 / (1.0 + exp(-{}))", a); break;
      case Opcode::Relu: rhs = fmt::format("{0} > 0.0 ? {0} : 0.0", a); break;
      case Opcode::Step: rhs = fmt::format("{} > 0.0 ? 1.0 : 0.0", a); break;
      case Opcode::Exp: rhs = fmt::format("exp({})", a); break;
      case Opcode::Log: rhs = fmt::format("log({})", a); break;
      case Opcode::Sin: rhs = fmt::format("sin({})", a); break;
      case Opcode::Cos: rhs = fmt::format("cos({})", a); break;
      case Opcode::Sqrt: rhs = fmt::format("sqrt({})", a); break;
      case Opcode::FMA: rhs = fmt::format("{} + {} * {}", a, b, operand(in.args[2])); break;
    }
    out += fmt::format("  const double r{} = {};\n", in.dst, rhs);
  }

  std::int32_t k = 0;
  for (const Block& blk : t.outputs) {
    for (int i = 0; i < blk.size(); ++i) out += fmt::format("  out[{}] = r{};\n", k++, blk.start + i);
  }
  out += "}\n";
  return out;
}

}  // namespace neuropt::codegen
