#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "neuropt/cases/fish.hpp"
#include "neuropt/cases/min_snap.hpp"

namespace neuropt::cases {

/// Axis-aligned sampling region for model fitting.
struct Box {
  Vector lower;
  Vector upper;
};

/// "neuropt-fish-v1": FishParams fields at the top level plus "flow".
struct FishScenario {
  FishParams params;
  FlowFieldParams flow;
};

/// "neuropt-traj-v1": TrajParams fields, "density" and the fitting "domain".
/// "waypoints" may be omitted, in which case default_waypoints() places them.
struct TrajScenario {
  TrajParams params;
  DensityFieldParams density;
  Box domain;
};

FishScenario default_fish_scenario();
TrajScenario default_traj_scenario();

/// Region the flow model must cover: (t, p_x, p_y) over [0, N dt] x river box.
Box flow_domain(const FishParams& fp);

FishScenario parse_fish_scenario(std::string_view json_text);
FishScenario load_fish_scenario(const std::filesystem::path& path);
std::string format_fish_scenario(const FishScenario& s);

TrajScenario parse_traj_scenario(std::string_view json_text);
TrajScenario load_traj_scenario(const std::filesystem::path& path);
std::string format_traj_scenario(const TrajScenario& s);

}  // namespace neuropt::cases
