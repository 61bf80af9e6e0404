#pragma once

#include <string>

#include "neuropt/cases/fish.hpp"
#include "neuropt/cases/min_snap.hpp"

namespace neuropt::cases {

/// "k,t,px,py,ux,uy", one row per knot; the final knot has no input so its
/// ux,uy cells are empty. 17 significant digits.
std::string fish_csv(const FishParams& fp, const FishTrajectory& tr);

/// "k,t,px,py,pz,rho" at the N+1 samples, rho under `density`.
std::string traj_csv(const TrajParams& tp, const Vector& z, const DensityModel& density);

}  // namespace neuropt::cases
