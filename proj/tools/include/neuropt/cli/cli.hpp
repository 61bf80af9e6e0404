#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "neuropt/nlpsolve/solver.hpp"

namespace neuropt::cli {

/// Exit codes: 0 success, 1 solver did not converge (or a check failed),
/// 2 bad input.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitInput = 2;

int exit_code(SolveStatus status);

/// {"status":..., "iterations":..., "objective":..., "kkt_error":...} on one line.
std::string emit_solution_summary(const Solution& sol);

/// Runs one command. `args` excludes the program name. Summaries go to
/// `out`, diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace neuropt::cli
