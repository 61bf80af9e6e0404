#include "neuropt/learned/train.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/random.hpp"
#include "neuropt/symgraph/derivatives.hpp"
#include "neuropt/symgraph/function.hpp"

namespace neuropt {

namespace {

sym::ExprRef activate(Activation a, const sym::ExprRef& v) {
  switch (a) {
    case Activation::Tanh: return sym::tanh(v);
    case Activation::Relu: return sym::relu(v);
    case Activation::Sigmoid: return sym::sigmoid(v);
    case Activation::Identity: return v;
  }
  return v;
}

// Loss and parameter gradients for one batch size. Inputs: X (in,B), T (out,B),
// then W_1, b_1, ..., W_L, b_L. Outputs: loss, then the gradients in the same
// order as the parameters.
sym::SymFunction batch_step(const std::vector<int>& widths, const MlpArch& arch, int batch) {
  sym::ExprGraph g;
  const int layers = static_cast<int>(widths.size()) - 1;
  const sym::ExprRef X = g.symbol("X", widths.front(), batch);
  const sym::ExprRef T = g.symbol("T", widths.back(), batch);
  const sym::ExprRef ones = g.ones(1, batch);

  std::vector<sym::ExprRef> params;
  sym::ExprRef h = X;
  for (int k = 0; k < layers; ++k) {
    const auto W = g.symbol(fmt::format("W{}", k + 1), widths[k + 1], widths[k]);
    const auto b = g.symbol(fmt::format("b{}", k + 1), widths[k + 1], 1);
    params.push_back(W);
    params.push_back(b);
    const Activation act = k + 1 == layers ? arch.output_activation : arch.hidden_activation;
    h = activate(act, sym::matmul(W, h) + sym::matmul(b, ones));
  }
  const sym::ExprRef loss = sym::sumsq(h - T) * (1.0 / (static_cast<double>(batch) * widths.back()));

  std::vector<sym::ExprRef> inputs{X, T};
  inputs.insert(inputs.end(), params.begin(), params.end());
  std::vector<sym::ExprRef> outputs{loss};
  const auto grads = sym::gradients(loss, g.scalar(1.0), params);
  outputs.insert(outputs.end(), grads.begin(), grads.end());
  return sym::SymFunction(sym::unique_function_name("mlp_batch_step"), inputs, outputs);
}

}  // namespace

double mlp_mse(const MlpSpec& spec, const Dataset& data) {
  double total = 0.0;
  for (Eigen::Index s = 0; s < data.inputs.rows(); ++s) {
    const Vector y = eval_mlp(spec, data.inputs.row(s).transpose());
    total += (y - data.targets.row(s).transpose()).squaredNorm();
  }
  return total / (static_cast<double>(data.inputs.rows()) * static_cast<double>(data.targets.cols()));
}

FitResult fit_mlp(const Dataset& data, const MlpArch& arch, const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  const Eigen::Index n = data.inputs.rows();
  if (n < 1) throw ValidationError("fit_mlp needs at least one sample");
  if (data.targets.rows() != n) {
    throw ValidationError(fmt::format("{} inputs but {} targets", n, data.targets.rows()));
  }
  if (data.inputs.cols() < 1 || data.targets.cols() < 1) throw ValidationError("empty sample vectors");
  for (int w : arch.hidden) {
    if (w < 1) throw ValidationError(fmt::format("hidden width {} is not positive", w));
  }

  std::vector<int> widths{static_cast<int>(data.inputs.cols())};
  widths.insert(widths.end(), arch.hidden.begin(), arch.hidden.end());
  widths.push_back(static_cast<int>(data.targets.cols()));

  MlpSpec spec;
  spec.in_features = widths.front();
  spec.hidden_activation = arch.hidden_activation;
  spec.output_activation = arch.output_activation;
  spec.input_scaling = arch.input_scaling;
  spec.output_scaling = arch.output_scaling;

  // Training data in network coordinates, one sample per column.
  Matrix X = data.inputs.transpose();
  Matrix T = data.targets.transpose();
  if (arch.input_scaling) {
    if (arch.input_scaling->offset.size() != X.rows()) throw ValidationError("input_scaling length mismatch");
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      X.row(i) = (X.row(i).array() - arch.input_scaling->offset[i]) * arch.input_scaling->scale[i];
    }
  }
  if (arch.output_scaling) {
    if (arch.output_scaling->offset.size() != T.rows()) throw ValidationError("output_scaling length mismatch");
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      T.row(i) = (T.row(i).array() - arch.output_scaling->offset[i]) / arch.output_scaling->scale[i];
    }
  }

  Pcg32 rng(cfg.seed);
  std::vector<Matrix> params;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const double a = 1.0 / std::sqrt(static_cast<double>(widths[k]));
    Matrix W(widths[k + 1], widths[k]);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = rng.uniform(-a, a);
    }
    params.push_back(std::move(W));
    params.push_back(Matrix::Zero(widths[k + 1], 1));
  }

  std::map<int, sym::SymFunction> steps;
  auto step_for = [&](int batch) -> const sym::SymFunction& {
    auto it = steps.find(batch);
    if (it == steps.end()) it = steps.emplace(batch, batch_step(widths, arch, batch)).first;
    return it->second;
  };

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::vector<Matrix> inputs(2 + params.size());
  sym::Workspace ws;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const int batch = static_cast<int>(std::min<Eigen::Index>(cfg.batch_size, n - start));
      Matrix& xb = inputs[0];
      Matrix& tb = inputs[1];
      xb.resize(X.rows(), batch);
      tb.resize(T.rows(), batch);
      for (int c = 0; c < batch; ++c) {
        xb.col(c) = X.col(order[static_cast<std::size_t>(start + c)]);
        tb.col(c) = T.col(order[static_cast<std::size_t>(start + c)]);
      }
      for (std::size_t p = 0; p < params.size(); ++p) inputs[2 + p] = params[p];

      sym::evaluate(step_for(batch), inputs, ws);
      const double loss = ws.output(0)(0, 0);
      if (!std::isfinite(loss)) {
        throw ValidationError(fmt::format(
            "training diverged in epoch {} (non-finite loss); try a smaller learning_rate than {}",
            epoch + 1, cfg.learning_rate));
      }
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= cfg.learning_rate * ws.output(1 + p);
    }
  }

  for (std::size_t p = 0; p < params.size(); p += 2) {
    spec.layers.push_back(DenseLayer{params[p], Vector(params[p + 1].col(0))});
  }
  spec.validate();
  return FitResult{spec, mlp_mse(spec, data)};
}

}  // namespace neuropt
