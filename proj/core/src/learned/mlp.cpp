#include "neuropt/learned/mlp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/symgraph/kernels.hpp"

namespace neuropt {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (Activation a : {Activation::Tanh, Activation::Relu, Activation::Sigmoid, Activation::Identity}) {
    if (activation_name(a) == name) return a;
  }
  throw ValidationError(fmt::format("unknown activation '{}'", name));
}

int MlpSpec::out_features() const {
  return layers.empty() ? 0 : static_cast<int>(layers.back().weights.rows());
}

namespace {

void check_scaling(const AffineScaling& s, Eigen::Index n, std::string_view which) {
  if (s.offset.size() != n || s.scale.size() != n) {
    throw ValidationError(fmt::format("{}: expected {} offsets and scales, got {} and {}", which, n,
                                      s.offset.size(), s.scale.size()));
  }
  if (!s.offset.allFinite() || !s.scale.allFinite()) {
    throw ValidationError(fmt::format("{}: non-finite value", which));
  }
}

double activate(Activation a, double v) {
  switch (a) {
    case Activation::Tanh: return std::tanh(v);
    case Activation::Relu: return sym::relu_value(v);
    case Activation::Sigmoid: return sym::sigmoid_value(v);
    case Activation::Identity: return v;
  }
  return v;
}

sym::ExprRef activate(Activation a, const sym::ExprRef& v) {
  switch (a) {
    case Activation::Tanh: return sym::tanh(v);
    case Activation::Relu: return sym::relu(v);
    case Activation::Sigmoid: return sym::sigmoid(v);
    case Activation::Identity: return v;
  }
  return v;
}

}  // namespace

void MlpSpec::validate() const {
  if (in_features < 1) throw ValidationError(fmt::format("in_features must be >= 1, got {}", in_features));
  if (layers.empty()) throw ValidationError("MLP has no layers");
  Eigen::Index fan_in = in_features;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const DenseLayer& l = layers[k];
    if (l.weights.rows() < 1) throw ValidationError(fmt::format("layer {}: empty weights", k + 1));
    if (l.weights.cols() != fan_in) {
      throw ValidationError(fmt::format("layer {}: expects {} inputs but previous width is {}", k + 1,
                                        l.weights.cols(), fan_in));
    }
    if (l.biases.size() != l.weights.rows()) {
      throw ValidationError(fmt::format("layer {}: {} biases for {} outputs", k + 1, l.biases.size(),
                                        l.weights.rows()));
    }
    if (!l.weights.allFinite() || !l.biases.allFinite()) {
      throw ValidationError(fmt::format("layer {}: non-finite weight or bias", k + 1));
    }
    fan_in = l.weights.rows();
  }
  if (input_scaling) check_scaling(*input_scaling, in_features, "input_scaling");
  if (output_scaling) check_scaling(*output_scaling, fan_in, "output_scaling");
}

bool operator==(const MlpSpec& a, const MlpSpec& b) {
  auto same_scaling = [](const std::optional<AffineScaling>& x, const std::optional<AffineScaling>& y) {
    if (x.has_value() != y.has_value()) return false;
    return !x || (x->offset == y->offset && x->scale == y->scale);
  };
  if (a.in_features != b.in_features || a.hidden_activation != b.hidden_activation ||
      a.output_activation != b.output_activation || a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    const auto& la = a.layers[k];
    const auto& lb = b.layers[k];
    if (la.weights.rows() != lb.weights.rows() || la.weights.cols() != lb.weights.cols()) return false;
    if (la.weights != lb.weights || la.biases != lb.biases) return false;
  }
  return same_scaling(a.input_scaling, b.input_scaling) && same_scaling(a.output_scaling, b.output_scaling);
}

Vector eval_mlp(const MlpSpec& spec, const Vector& x) {
  if (x.size() != spec.in_features) {
    throw ShapeError(fmt::format("eval_mlp: input has {} entries, expected {}", x.size(), spec.in_features));
  }
  Vector h = x;
  if (spec.input_scaling) {
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      h[i] = (h[i] - spec.input_scaling->offset[i]) * spec.input_scaling->scale[i];
    }
  }
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    const DenseLayer& l = spec.layers[k];
    const Activation act = k + 1 == spec.layers.size() ? spec.output_activation : spec.hidden_activation;
    Vector z(l.weights.rows());
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) acc += l.weights(i, j) * h[j];
      z[i] = activate(act, acc + l.biases[i]);
    }
    h = std::move(z);
  }
  if (spec.output_scaling) {
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      h[i] = h[i] * spec.output_scaling->scale[i] + spec.output_scaling->offset[i];
    }
  }
  return h;
}

sym::ExprRef embed_mlp(const MlpSpec& spec, const sym::ExprRef& x) {
  if (x.shape() != sym::Shape{spec.in_features, 1}) {
    throw ShapeError(fmt::format("embed_mlp: input is {}, expected ({},1)", sym::to_string(x.shape()),
                                 spec.in_features));
  }
  sym::ExprGraph g = x.graph();
  auto column = [&](const Vector& v) { return g.constant(Matrix(v)); };

  sym::ExprRef h = x;
  if (spec.input_scaling) {
    h = (h - column(spec.input_scaling->offset)) * column(spec.input_scaling->scale);
  }
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    const DenseLayer& l = spec.layers[k];
    const Activation act = k + 1 == spec.layers.size() ? spec.output_activation : spec.hidden_activation;
    h = activate(act, sym::matmul(g.constant(l.weights), h) + column(l.biases));
  }
  if (spec.output_scaling) {
    h = h * column(spec.output_scaling->scale) + column(spec.output_scaling->offset);
  }
  return h;
}

}  // namespace neuropt
