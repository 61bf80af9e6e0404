#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "neuropt/learned/mlp.hpp"

namespace neuropt {

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 1;
};

struct MlpArch {
  std::vector<int> hidden;  // widths of the hidden layers, may be empty
  Activation hidden_activation = Activation::Tanh;
  Activation output_activation = Activation::Identity;
  /// Attached to the returned spec. Training runs on the scaled inputs and on
  /// targets mapped through the inverse output scaling.
  std::optional<AffineScaling> input_scaling;
  std::optional<AffineScaling> output_scaling;
};

/// One sample per row.
struct Dataset {
  Matrix inputs;
  Matrix targets;
};

struct FitResult {
  MlpSpec spec;
  double train_mse = 0.0;  // mean over samples and outputs, in target units
};

/// Mini-batch gradient descent on the mean squared error. Gradients come from
/// the symbolic graph with the weights as Symbols. Deterministic for a given
/// seed. Throws ValidationError on bad dimensions or a non-finite loss.
FitResult fit_mlp(const Dataset& data, const MlpArch& arch, const TrainConfig& cfg);

/// Mean squared error of `spec` on `data`, averaged over samples and outputs.
double mlp_mse(const MlpSpec& spec, const Dataset& data);

}  // namespace neuropt
