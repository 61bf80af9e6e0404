#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "neuropt/linalg.hpp"

namespace neuropt::codegen {

/// Scalar instruction set. Copy, Pow and Step extend the minimal set: Copy
/// gathers scattered outputs into a contiguous block, Pow carries a constant
/// exponent, Step is the derivative of Relu.
enum class Opcode : std::uint8_t {
  LoadConst,
  Copy,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,
  Tanh,
  Sigmoid,
  Relu,
  Step,
  Exp,
  Log,
  Sin,
  Cos,
  Sqrt,
  FMA,  // acc + a * b, rounded twice (no fused hardware instruction)
};

std::string_view opcode_name(Opcode op);
std::optional<Opcode> parse_opcode(std::string_view name);

/// A register or a constant-pool entry.
struct Arg {
  bool is_const = false;
  std::int32_t index = -1;

  static Arg reg(std::int32_t r) { return {false, r}; }
  static Arg pool(std::int32_t c) { return {true, c}; }
  friend bool operator==(const Arg&, const Arg&) = default;
};

/// Operand forms by opcode:
///   LoadConst d c            Copy/unary d a
///   binary d a (b|c)         Pow d a c
///   FMA d acc a (b|c)
struct Instr {
  Opcode op = Opcode::Copy;
  std::int32_t dst = -1;
  std::array<Arg, 3> args{};
  std::uint8_t n_args = 0;

  friend bool operator==(const Instr&, const Instr&) = default;
};

/// Registers [start, start + rows*cols) hold a matrix in row-major order.
struct Block {
  std::int32_t start = 0;
  int rows = 1;
  int cols = 1;
  int size() const { return rows * cols; }
  friend bool operator==(const Block&, const Block&) = default;
};

/// Flat single-assignment program. Inputs occupy the first registers in
/// order; every other register is written by exactly one instruction. The
/// slot map (filled by finalize()) packs registers with disjoint live ranges
/// into shared scratch slots for the interpreter.
struct Tape {
  std::int32_t n_registers = 0;
  std::vector<Block> inputs;
  std::vector<Block> outputs;
  std::vector<double> constants;
  std::vector<Instr> instructions;

  std::vector<std::int32_t> slots;
  std::int32_t n_slots = 0;

  /// Structural checks: single assignment, reads after writes, operand forms,
  /// valid constant indices, outputs written. Throws ValidationError.
  void validate() const;
  /// validate() plus linear-scan slot assignment.
  void finalize();

  std::size_t arithmetic_count() const;  // instructions other than LoadConst/Copy
};

/// Interpreter scratch; one per thread.
struct TapeScratch {
  std::vector<double> values;
};

/// Sequential interpretation with the same scalar kernels as the graph
/// evaluator. ShapeError on input mismatch, DomainError tagged with the
/// instruction index.
void eval_tape(const Tape& t, std::span<const Matrix> inputs, std::vector<Matrix>& outputs, TapeScratch& scratch);
std::vector<Matrix> eval_tape(const Tape& t, std::span<const Matrix> inputs);
std::vector<Matrix> eval_tape(const Tape& t, std::initializer_list<Matrix> inputs);

}  // namespace neuropt::codegen
