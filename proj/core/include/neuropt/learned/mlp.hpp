#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "neuropt/linalg.hpp"
#include "neuropt/symgraph/graph.hpp"

namespace neuropt {

enum class Activation { Tanh, Relu, Sigmoid, Identity };

std::string_view activation_name(Activation a);  // "tanh", "relu", ...
/// Throws ValidationError on an unknown name.
Activation parse_activation(std::string_view name);

struct DenseLayer {
  Matrix weights;  // (out, in)
  Vector biases;   // (out)
};

/// Elementwise affine map. As input scaling it computes (x - offset) * scale;
/// as output scaling it computes y * scale + offset.
struct AffineScaling {
  Vector offset;
  Vector scale;
};

struct MlpSpec {
  int in_features = 0;
  std::vector<DenseLayer> layers;
  Activation hidden_activation = Activation::Tanh;
  Activation output_activation = Activation::Identity;
  std::optional<AffineScaling> input_scaling;
  std::optional<AffineScaling> output_scaling;

  int out_features() const;
  /// Dimension chain, finiteness, scaling lengths. Layers are numbered from 1
  /// in messages.
  void validate() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&);
};

/// Plain loop forward pass, kept independent of the graph machinery.
Vector eval_mlp(const MlpSpec& spec, const Vector& x);

/// Recreates the network in `x`'s graph from Constant, MatMul, Add and
/// activation nodes. `x` must be (in_features, 1).
sym::ExprRef embed_mlp(const MlpSpec& spec, const sym::ExprRef& x);

}  // namespace neuropt
