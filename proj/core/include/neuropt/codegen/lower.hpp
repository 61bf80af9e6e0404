#pragma once

#include "neuropt/codegen/tape.hpp"
#include "neuropt/symgraph/function.hpp"

namespace neuropt::codegen {

/// Scalarizes `f` into a finalized tape. Matrix products become multiply-add
/// chains in the graph evaluator's accumulation order, so the tape reproduces
/// evaluate() to rounding (bit for bit barring signed zeros). Elements that
/// are constant at lowering time are folded; instructions whose results no
/// output needs are dropped.
Tape lower(const sym::SymFunction& f);

}  // namespace neuropt::codegen
