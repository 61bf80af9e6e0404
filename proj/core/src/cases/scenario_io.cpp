#include "neuropt/cases/scenario_io.hpp"

#include <fmt/format.h>

#include "../json_util.hpp"

namespace neuropt::cases {

namespace {

using detail::Json;
using detail::field;
using detail::get_integer;
using detail::get_number;
using detail::get_vector;
using detail::number17;
using detail::vector17;

constexpr std::string_view kFishFormat = "neuropt-fish-v1";
constexpr std::string_view kTrajFormat = "neuropt-traj-v1";

void check_format(const Json& doc, std::string_view expected) {
  const std::string format = detail::get_string(doc["format"], "format");
  if (format != expected) throw ParseError(fmt::format("format: expected '{}', got '{}'", expected, format));
}

FlowFieldParams parse_flow(const Json& v, const std::string& where) {
  detail::check_keys(v, where, {"u_inf"}, {"vortices"});
  FlowFieldParams f;
  f.u_inf = get_vector(v["u_inf"], field(where, "u_inf"), 2);
  if (v.contains("vortices")) {
    const Json& list = v["vortices"];
    if (!list.is_array()) throw ParseError(fmt::format("{}: expected an array", field(where, "vortices")));
    for (std::size_t j = 0; j < list.size(); ++j) {
      const std::string w = fmt::format("{}.vortices[{}]", where, j);
      detail::check_keys(list[j], w, {"center", "circulation", "core_radius"}, {"drift"});
      Vortex vx;
      vx.center = get_vector(list[j]["center"], field(w, "center"), 2);
      vx.circulation = get_number(list[j]["circulation"], field(w, "circulation"));
      vx.core_radius = get_number(list[j]["core_radius"], field(w, "core_radius"));
      vx.drift = list[j].contains("drift") ? get_vector(list[j]["drift"], field(w, "drift"), 2) : Vector::Zero(2);
      f.vortices.push_back(vx);
    }
  }
  return f;
}

DensityFieldParams parse_density(const Json& v, const std::string& where) {
  detail::check_keys(v, where, {}, {"blobs"});
  DensityFieldParams d;
  if (v.contains("blobs")) {
    const Json& list = v["blobs"];
    if (!list.is_array()) throw ParseError(fmt::format("{}: expected an array", field(where, "blobs")));
    for (std::size_t j = 0; j < list.size(); ++j) {
      const std::string w = fmt::format("{}.blobs[{}]", where, j);
      detail::check_keys(list[j], w, {"center", "radius", "amplitude", "sharpness"});
      d.blobs.push_back(Blob{get_vector(list[j]["center"], field(w, "center"), 3),
                             get_number(list[j]["radius"], field(w, "radius")),
                             get_number(list[j]["amplitude"], field(w, "amplitude")),
                             get_number(list[j]["sharpness"], field(w, "sharpness"))});
    }
  }
  return d;
}

// Validation failures inside a document are reported as parse errors of it.
template <typename F>
void validated(F&& check) {
  try {
    check();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

template <typename T, typename Parse>
T load_with_path(const std::filesystem::path& path, Parse parse) {
  const std::string text = detail::read_text_file(path);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

FishScenario default_fish_scenario() { return FishScenario{default_fish_params(), default_flow_field()}; }

TrajScenario default_traj_scenario() {
  TrajScenario s;
  s.params = default_traj_params();
  s.density = default_density_field();
  s.domain.lower = Vector(3);
  s.domain.upper = Vector(3);
  s.domain.lower << -2.5, -1.5, 0.3;
  s.domain.upper << 2.5, 1.5, 1.7;
  return s;
}

Box flow_domain(const FishParams& fp) {
  Box b{Vector(3), Vector(3)};
  b.lower << 0.0, fp.p_lo(0), fp.p_lo(1);
  b.upper << fp.N * fp.dt, fp.p_hi(0), fp.p_hi(1);
  return b;
}

FishScenario parse_fish_scenario(std::string_view text) {
  const Json doc = detail::parse_json(text, "fish scenario");
  detail::check_keys(doc, "fish scenario", {"format", "p0", "pf", "N", "dt", "u_lo", "u_hi", "p_lo", "p_hi", "r_st", "flow"});
  check_format(doc, kFishFormat);
  FishScenario s;
  FishParams& p = s.params;
  p.p0 = get_vector(doc["p0"], "p0", 2);
  p.pf = get_vector(doc["pf"], "pf", 2);
  p.N = static_cast<int>(get_integer(doc["N"], "N"));
  p.dt = get_number(doc["dt"], "dt");
  p.u_lo = get_vector(doc["u_lo"], "u_lo", 2);
  p.u_hi = get_vector(doc["u_hi"], "u_hi", 2);
  p.p_lo = get_vector(doc["p_lo"], "p_lo", 2);
  p.p_hi = get_vector(doc["p_hi"], "p_hi", 2);
  p.r_st = get_number(doc["r_st"], "r_st");
  s.flow = parse_flow(doc["flow"], "flow");
  validated([&] {
    s.params.validate();
    s.flow.validate();
  });
  return s;
}

FishScenario load_fish_scenario(const std::filesystem::path& path) {
  return load_with_path<FishScenario>(path, parse_fish_scenario);
}

std::string format_fish_scenario(const FishScenario& s) {
  const FishParams& p = s.params;
  std::string out = "{\n";
  out += fmt::format("  \"format\": \"{}\",\n", kFishFormat);
  out += fmt::format("  \"p0\": {},\n  \"pf\": {},\n", vector17(p.p0), vector17(p.pf));
  out += fmt::format("  \"N\": {},\n  \"dt\": {},\n", p.N, number17(p.dt));
  out += fmt::format("  \"u_lo\": {},\n  \"u_hi\": {},\n", vector17(p.u_lo), vector17(p.u_hi));
  out += fmt::format("  \"p_lo\": {},\n  \"p_hi\": {},\n", vector17(p.p_lo), vector17(p.p_hi));
  out += fmt::format("  \"r_st\": {},\n", number17(p.r_st));
  out += fmt::format("  \"flow\": {{\n    \"u_inf\": {},\n    \"vortices\": [", vector17(s.flow.u_inf));
  for (std::size_t j = 0; j < s.flow.vortices.size(); ++j) {
    const Vortex& v = s.flow.vortices[j];
    out += j ? ",\n" : "\n";
    out += fmt::format("      {{\"center\": {}, \"circulation\": {}, \"core_radius\": {}, \"drift\": {}}}",
                       vector17(v.center), number17(v.circulation), number17(v.core_radius), vector17(v.drift));
  }
  out += s.flow.vortices.empty() ? "]\n  }\n}\n" : "\n    ]\n  }\n}\n";
  return out;
}

TrajScenario parse_traj_scenario(std::string_view text) {
  const Json doc = detail::parse_json(text, "trajectory scenario");
  detail::check_keys(doc, "trajectory scenario", {"format", "p0", "pf", "T", "N", "rho_bar", "density", "domain"},
                     {"degree", "waypoints"});
  check_format(doc, kTrajFormat);
  TrajScenario s;
  TrajParams& p = s.params;
  if (doc.contains("degree")) p.degree = static_cast<int>(get_integer(doc["degree"], "degree"));
  p.p0 = get_vector(doc["p0"], "p0", 3);
  p.pf = get_vector(doc["pf"], "pf", 3);
  p.T = get_number(doc["T"], "T");
  p.N = static_cast<int>(get_integer(doc["N"], "N"));
  p.rho_bar = get_number(doc["rho_bar"], "rho_bar");
  s.density = parse_density(doc["density"], "density");

  const Json& dom = doc["domain"];
  detail::check_keys(dom, "domain", {"lower", "upper"});
  s.domain.lower = get_vector(dom["lower"], "domain.lower", 3);
  s.domain.upper = get_vector(dom["upper"], "domain.upper", 3);
  if (!(s.domain.lower.array() < s.domain.upper.array()).all()) {
    throw ParseError("domain: lower must be below upper on every axis");
  }

  validated([&] { s.density.validate(); });
  if (doc.contains("waypoints")) {
    const Json& list = doc["waypoints"];
    if (!list.is_array()) throw ParseError("waypoints: expected an array");
    for (std::size_t w = 0; w < list.size(); ++w) {
      const std::string where = fmt::format("waypoints[{}]", w);
      detail::check_keys(list[w], where, {"time", "position"});
      p.waypoints.push_back(Waypoint{get_number(list[w]["time"], field(where, "time")),
                                     get_vector(list[w]["position"], field(where, "position"), 3)});
    }
  } else {
    validated([&] { p.validate(); });
    p.waypoints = default_waypoints(p.p0, p.pf, p.T, s.density);
  }
  validated([&] { p.validate(); });
  return s;
}

TrajScenario load_traj_scenario(const std::filesystem::path& path) {
  return load_with_path<TrajScenario>(path, parse_traj_scenario);
}

std::string format_traj_scenario(const TrajScenario& s) {
  const TrajParams& p = s.params;
  std::string out = "{\n";
  out += fmt::format("  \"format\": \"{}\",\n", kTrajFormat);
  out += fmt::format("  \"degree\": {},\n", p.degree);
  out += fmt::format("  \"p0\": {},\n  \"pf\": {},\n", vector17(p.p0), vector17(p.pf));
  out += fmt::format("  \"T\": {},\n  \"N\": {},\n  \"rho_bar\": {},\n", number17(p.T), p.N, number17(p.rho_bar));
  out += "  \"waypoints\": [";
  for (std::size_t w = 0; w < p.waypoints.size(); ++w) {
    out += w ? ",\n" : "\n";
    out += fmt::format("    {{\"time\": {}, \"position\": {}}}", number17(p.waypoints[w].time),
                       vector17(p.waypoints[w].position));
  }
  out += p.waypoints.empty() ? "],\n" : "\n  ],\n";
  out += "  \"density\": {\"blobs\": [";
  for (std::size_t j = 0; j < s.density.blobs.size(); ++j) {
    const Blob& b = s.density.blobs[j];
    out += j ? ",\n" : "\n";
    out += fmt::format("    {{\"center\": {}, \"radius\": {}, \"amplitude\": {}, \"sharpness\": {}}}", vector17(b.center),
                       number17(b.radius), number17(b.amplitude), number17(b.sharpness));
  }
  out += s.density.blobs.empty() ? "]},\n" : "\n  ]},\n";
  out += fmt::format("  \"domain\": {{\"lower\": {}, \"upper\": {}}}\n}}\n", vector17(s.domain.lower),
                     vector17(s.domain.upper));
  return out;
}

}  // namespace neuropt::cases
