#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "neuropt/codegen/emit.hpp"
#include "neuropt/error.hpp"

namespace neuropt::codegen {

namespace {

constexpr std::string_view kHeader = "neuropt-tape v1";

std::string arg_text(const Arg& a) { return fmt::format("{}{}", a.is_const ? 'c' : 'r', a.index); }

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(std::string_view msg) const {
    throw ParseError(fmt::format("tape IR line {}: {}", line_, msg));
  }

  std::int32_t integer(std::string_view tok) const {
    std::int32_t v = 0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || end != tok.data() + tok.size()) fail(fmt::format("expected an integer, got '{}'", tok));
    return v;
  }

  double real(std::string_view tok) const {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || end != tok.data() + tok.size()) fail(fmt::format("expected a number, got '{}'", tok));
    return v;
  }

  Arg operand(std::string_view tok) const {
    if (tok.size() < 2 || (tok[0] != 'r' && tok[0] != 'c')) fail(fmt::format("expected r<n> or c<n>, got '{}'", tok));
    return tok[0] == 'r' ? Arg::reg(integer(tok.substr(1))) : Arg::pool(integer(tok.substr(1)));
  }

  Block block(const std::vector<std::string_view>& tok) const {
    if (tok.size() != 4) fail(fmt::format("'{}' takes <start> <rows> <cols>", tok[0]));
    return Block{integer(tok[1]), integer(tok[2]), integer(tok[3])};
  }

 private:
  std::size_t line_;
};

}  // namespace

std::string emit_ir_text(const Tape& t) {
  std::string out;
  out += kHeader;
  out += '\n';
  for (std::size_t i = 0; i < t.constants.size(); ++i) out += fmt::format("const {} {:.17g}\n", i, t.constants[i]);
  for (const Block& b : t.inputs) out += fmt::format("in {} {} {}\n", b.start, b.rows, b.cols);
  for (const Instr& in : t.instructions) {
    out += opcode_name(in.op);
    out += fmt::format(" r{}", in.dst);
    for (std::uint8_t a = 0; a < in.n_args; ++a) {
      out += ' ';
      out += arg_text(in.args[a]);
    }
    out += '\n';
  }
  for (const Block& b : t.outputs) out += fmt::format("out {} {} {}\n", b.start, b.rows, b.cols);
  out += "end\n";
  return out;
}

Tape parse_ir_text(std::string_view text) {
  Tape t;
  std::int32_t declared_regs = -1;
  std::size_t line_no = 0;
  bool ended = false;
  std::int32_t input_regs = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const Parser p(line_no);
    const auto tok = split(line);

    if (line_no == 1) {
      if (line != kHeader) p.fail(fmt::format("expected header '{}'", kHeader));
      continue;
    }
    if (tok.empty()) continue;
    if (ended) p.fail("content after 'end'");

    const std::string_view head = tok[0];
    if (head == "end") {
      if (tok.size() != 1) p.fail("'end' takes no operands");
      ended = true;
    } else if (head == "regs") {
      if (tok.size() != 2) p.fail("'regs' takes one count");
      declared_regs = p.integer(tok[1]);
    } else if (head == "const") {
      if (tok.size() != 3) p.fail("'const' takes <idx> <value>");
      if (p.integer(tok[1]) != static_cast<std::int32_t>(t.constants.size())) {
        p.fail(fmt::format("constants must be numbered in order; expected {}", t.constants.size()));
      }
      t.constants.push_back(p.real(tok[2]));
    } else if (head == "in") {
      const Block b = p.block(tok);
      t.inputs.push_back(b);
      input_regs += b.size();
    } else if (head == "out") {
      t.outputs.push_back(p.block(tok));
    } else {
      const auto op = parse_opcode(head);
      if (!op) p.fail(fmt::format("unknown opcode '{}'", head));
      if (tok.size() < 3 || tok.size() > 5) p.fail(fmt::format("{} needs a destination and 1 to 3 operands", head));
      Instr in;
      in.op = *op;
      const Arg dst = p.operand(tok[1]);
      if (dst.is_const) p.fail("destination must be a register");
      in.dst = dst.index;
      for (std::size_t k = 2; k < tok.size(); ++k) in.args[in.n_args++] = p.operand(tok[k]);
      t.instructions.push_back(in);
    }
  }
  if (line_no == 0) throw ParseError("tape IR line 1: empty document");
  if (!ended) throw ParseError(fmt::format("tape IR line {}: missing 'end'", line_no));

  t.n_registers = declared_regs >= 0 ? declared_regs : input_regs + static_cast<std::int32_t>(t.instructions.size());
  t.finalize();
  return t;
}

}  // namespace neuropt::codegen
