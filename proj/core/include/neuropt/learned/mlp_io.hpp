#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "neuropt/learned/mlp.hpp"

namespace neuropt {

/// Reads a "neuropt-mlp-v1" weights file. ParseError names the bad field,
/// ValidationError the bad layer, IoError an unreadable file.
MlpSpec load_mlp(const std::filesystem::path& path);
MlpSpec parse_mlp(std::string_view json_text);

/// Numbers are written with 17 significant digits.
void save_mlp(const MlpSpec& spec, const std::filesystem::path& path);
std::string format_mlp(const MlpSpec& spec);

}  // namespace neuropt
