#include "neuropt/learned/mlp_io.hpp"

#include <fmt/format.h>

#include "../json_util.hpp"

namespace neuropt {

namespace {

constexpr std::string_view kFormat = "neuropt-mlp-v1";

AffineScaling parse_scaling(const detail::Json& v, std::string_view where) {
  detail::check_keys(v, where, {"offset", "scale"});
  return AffineScaling{detail::get_vector(v["offset"], detail::field(where, "offset")),
                       detail::get_vector(v["scale"], detail::field(where, "scale"))};
}

std::string format_scaling(const AffineScaling& s) {
  return fmt::format("{{\"offset\": {}, \"scale\": {}}}", detail::vector17(s.offset),
                     detail::vector17(s.scale));
}

}  // namespace

MlpSpec parse_mlp(std::string_view text) {
  using detail::Json;
  const Json doc = detail::parse_json(text, "weights file");
  detail::check_keys(doc, "weights file",
                     {"format", "in_features", "hidden_activation", "output_activation", "layers"},
                     {"input_scaling", "output_scaling"});
  const std::string format = detail::get_string(doc["format"], "format");
  if (format != kFormat) {
    throw ParseError(fmt::format("format: expected '{}', got '{}'", kFormat, format));
  }

  MlpSpec spec;
  spec.in_features = static_cast<int>(detail::get_integer(doc["in_features"], "in_features"));
  try {
    spec.hidden_activation = parse_activation(detail::get_string(doc["hidden_activation"], "hidden_activation"));
    spec.output_activation = parse_activation(detail::get_string(doc["output_activation"], "output_activation"));
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }

  const Json& layers = doc["layers"];
  if (!layers.is_array()) throw ParseError("layers: expected an array");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string where = fmt::format("layers[{}]", k);
    detail::check_keys(layers[k], where, {"weights", "biases"});
    DenseLayer l;
    l.weights = detail::get_matrix(layers[k]["weights"], detail::field(where, "weights"));
    l.biases = detail::get_vector(layers[k]["biases"], detail::field(where, "biases"));
    spec.layers.push_back(std::move(l));
  }
  if (doc.contains("input_scaling")) spec.input_scaling = parse_scaling(doc["input_scaling"], "input_scaling");
  if (doc.contains("output_scaling")) spec.output_scaling = parse_scaling(doc["output_scaling"], "output_scaling");

  spec.validate();
  return spec;
}

MlpSpec load_mlp(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  try {
    return parse_mlp(text);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string format_mlp(const MlpSpec& spec) {
  spec.validate();
  std::string out = "{\n";
  out += fmt::format("  \"format\": \"{}\",\n", kFormat);
  out += fmt::format("  \"in_features\": {},\n", spec.in_features);
  out += fmt::format("  \"hidden_activation\": \"{}\",\n", activation_name(spec.hidden_activation));
  out += fmt::format("  \"output_activation\": \"{}\",\n", activation_name(spec.output_activation));
  if (spec.input_scaling) out += fmt::format("  \"input_scaling\": {},\n", format_scaling(*spec.input_scaling));
  if (spec.output_scaling) out += fmt::format("  \"output_scaling\": {},\n", format_scaling(*spec.output_scaling));
  out += "  \"layers\": [\n";
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    const DenseLayer& l = spec.layers[k];
    out += "    {\"weights\": [\n";
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      out += "      " + detail::vector17(l.weights.row(i));
      out += i + 1 < l.weights.rows() ? ",\n" : "\n";
    }
    out += "    ], \"biases\": " + detail::vector17(l.biases) + "}";
    out += k + 1 < spec.layers.size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

void save_mlp(const MlpSpec& spec, const std::filesystem::path& path) {
  detail::write_text_file(path, format_mlp(spec));
}

}  // namespace neuropt
