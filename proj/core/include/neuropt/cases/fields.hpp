#pragma once

#include <vector>

#include "neuropt/linalg.hpp"
#include "neuropt/symgraph/graph.hpp"

namespace neuropt::cases {

/// Lamb-Oseen vortex whose center moves as center + t * drift.
struct Vortex {
  Vector center;           // 2
  double circulation = 0;  // m^2/s
  double core_radius = 1;  // m
  Vector drift;            // 2, m/s
};

struct FlowFieldParams {
  Vector u_inf = Vector::Zero(2);
  std::vector<Vortex> vortices;

  void validate() const;
};

/// Logistic blob: amplitude * sigmoid(sharpness * (radius^2 - |p - center|^2)).
struct Blob {
  Vector center;  // 3
  double radius = 1;
  double amplitude = 1;
  double sharpness = 1;
};

struct DensityFieldParams {
  std::vector<Blob> blobs;

  void validate() const;
};

/// Free stream plus regularized vortices; finite everywhere and equal to
/// u_inf at a vortex center.
Vector analytic_flow(double t, const Vector& p, const FlowFieldParams& fp);
double analytic_density(const Vector& p, const DensityFieldParams& dp);

/// The same fields as graph expressions. `t` is (1,1), `p` is (2,1) for the
/// flow (result (2,1)) and (3,1) for the density (result (1,1)). The symbolic
/// flow divides by |p - c|^2 and so is undefined exactly at a vortex center.
sym::ExprRef flow_expr(const sym::ExprRef& t, const sym::ExprRef& p, const FlowFieldParams& fp);
sym::ExprRef density_expr(const sym::ExprRef& p, const DensityFieldParams& dp);

}  // namespace neuropt::cases
