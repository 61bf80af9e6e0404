#include "neuropt/cases/training.hpp"

#include <cmath>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/random.hpp"

namespace neuropt::cases {

namespace {

Matrix sample_box(const Box& box, int samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError(fmt::format("sample count must be positive, got {}", samples));
  Pcg32 rng(seed);
  Matrix X(samples, box.lower.size());
  for (int i = 0; i < samples; ++i) {
    for (Eigen::Index a = 0; a < X.cols(); ++a) X(i, a) = rng.uniform(box.lower(a), box.upper(a));
  }
  return X;
}

AffineScaling standardizing(const Matrix& targets) {
  const Vector mean = targets.colwise().mean().transpose();
  Vector scale(targets.cols());
  for (Eigen::Index j = 0; j < targets.cols(); ++j) {
    const double var = (targets.col(j).array() - mean(j)).square().mean();
    scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return AffineScaling{mean, scale};
}

double worst_relative(const MlpSpec& spec, const Dataset& data) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < data.targets.cols(); ++j) {
    double err = 0.0;
    for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
      const double d = eval_mlp(spec, data.inputs.row(i).transpose())(j) - data.targets(i, j);
      err += d * d;
    }
    err /= static_cast<double>(data.inputs.rows());
    const auto col = data.targets.col(j).array();
    const double var = (col - col.mean()).square().mean();
    worst = std::max(worst, var > 0.0 ? err / var : err);
  }
  return worst;
}

FitReport fit(const Dataset& train, const Dataset& heldout, const Box& box, const ModelFitOptions& opts) {
  MlpArch arch;
  arch.hidden = opts.hidden;
  arch.input_scaling = unit_box_scaling(box);
  arch.output_scaling = standardizing(train.targets);
  FitResult r = fit_mlp(train, arch, opts.train);
  FitReport out;
  out.train_mse = r.train_mse;
  out.heldout_mse = mlp_mse(r.spec, heldout);
  out.heldout_relative = worst_relative(r.spec, heldout);
  out.spec = std::move(r.spec);
  return out;
}

}  // namespace

AffineScaling unit_box_scaling(const Box& box) {
  const Vector center = 0.5 * (box.lower + box.upper);
  const Vector scale = 2.0 * (box.upper - box.lower).cwiseInverse();
  return AffineScaling{center, scale};
}

Dataset sample_flow_dataset(const FishScenario& s, int samples, std::uint64_t seed) {
  const Box box = flow_domain(s.params);
  Dataset d{sample_box(box, samples, seed), Matrix(samples, 2)};
  for (int i = 0; i < samples; ++i) {
    const Vector p = d.inputs.row(i).tail(2).transpose();
    d.targets.row(i) = analytic_flow(d.inputs(i, 0), p, s.flow).transpose();
  }
  return d;
}

Dataset sample_density_dataset(const TrajScenario& s, int samples, std::uint64_t seed) {
  Dataset d{sample_box(s.domain, samples, seed), Matrix(samples, 1)};
  for (int i = 0; i < samples; ++i) d.targets(i, 0) = analytic_density(d.inputs.row(i).transpose(), s.density);
  return d;
}

FitReport fit_flow_model(const FishScenario& s, const ModelFitOptions& opts) {
  return fit(sample_flow_dataset(s, opts.samples, opts.seed), sample_flow_dataset(s, opts.heldout_samples, opts.seed + 1),
             flow_domain(s.params), opts);
}

FitReport fit_density_model(const TrajScenario& s, const ModelFitOptions& opts) {
  return fit(sample_density_dataset(s, opts.samples, opts.seed),
             sample_density_dataset(s, opts.heldout_samples, opts.seed + 1), s.domain, opts);
}

}  // namespace neuropt::cases
