#pragma once

#include <cstdint>
#include <vector>

#include "neuropt/cases/scenario_io.hpp"
#include "neuropt/learned/train.hpp"

namespace neuropt::cases {

struct ModelFitOptions {
  int samples = 5000;
  int heldout_samples = 1000;  // drawn with seed + 1
  std::uint64_t seed = 1;
  std::vector<int> hidden{64, 64};
  TrainConfig train;
};

struct FitReport {
  MlpSpec spec;
  double train_mse = 0.0;
  double heldout_mse = 0.0;
  /// Held-out MSE over output variance, worst output.
  double heldout_relative = 0.0;
};

/// Uniform samples of the analytic fields over the fitting region; one row
/// per sample, inputs (t, p_x, p_y) for the flow and (x, y, z) for density.
Dataset sample_flow_dataset(const FishScenario& s, int samples, std::uint64_t seed);
Dataset sample_density_dataset(const TrajScenario& s, int samples, std::uint64_t seed);

/// Maps the box onto [-1, 1] per axis.
AffineScaling unit_box_scaling(const Box& box);

/// Tanh networks with inputs scaled to the unit box and standardized targets.
FitReport fit_flow_model(const FishScenario& s, const ModelFitOptions& opts);
FitReport fit_density_model(const TrajScenario& s, const ModelFitOptions& opts);

}  // namespace neuropt::cases
