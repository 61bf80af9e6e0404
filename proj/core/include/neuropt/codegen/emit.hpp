#pragma once

#include <string>
#include <string_view>

#include "neuropt/codegen/tape.hpp"

namespace neuropt::codegen {

/// Canonical line-oriented text form of a tape:
///
///   neuropt-tape v1
///   const <idx> <17 significant digits>     (one per pool entry)
///   in <start> <rows> <cols>
///   <Opcode> r<dst> <operand>...            (r<reg> or c<pool index>)
///   out <start> <rows> <cols>
///   end
///
/// Identical tapes give identical bytes.
std::string emit_ir_text(const Tape& t);

/// Inverse of emit_ir_text; also accepts an optional "regs <n>" line after the
/// header. The result is finalized. Throws ParseError naming the line on
/// malformed text and ValidationError if the tape breaks single assignment.
Tape parse_ir_text(std::string_view text);

struct SourceOptions {
  /// Emit `#pragma STDC FP_CONTRACT OFF` so compilers that honour it keep
  /// multiply-add as two roundings.
  bool fp_contract_pragma = true;
};

/// C source defining `void <name>(const double* in, double* out)`. Inputs are
/// read from `in` as the concatenation of the input blocks (row-major), and
/// outputs are written to `out` the same way. Only <math.h> is included.
/// Throws ValidationError if `name` is not a C identifier.
std::string emit_source(const Tape& t, std::string_view name, const SourceOptions& opts = {});

}  // namespace neuropt::codegen
