#include "neuropt/cases/fields.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "neuropt/error.hpp"

namespace neuropt::cases {

namespace {

void require_length(const Vector& v, int n, const std::string& what) {
  if (v.size() != n) throw ValidationError(fmt::format("{} must have length {}, got {}", what, n, v.size()));
  if (!v.allFinite()) throw ValidationError(fmt::format("{} must be finite", what));
}

}  // namespace

void FlowFieldParams::validate() const {
  require_length(u_inf, 2, "u_inf");
  for (std::size_t j = 0; j < vortices.size(); ++j) {
    const Vortex& v = vortices[j];
    require_length(v.center, 2, fmt::format("vortex {} center", j));
    require_length(v.drift, 2, fmt::format("vortex {} drift", j));
    if (!std::isfinite(v.circulation)) throw ValidationError(fmt::format("vortex {} circulation must be finite", j));
    if (!(v.core_radius > 0.0) || !std::isfinite(v.core_radius)) {
      throw ValidationError(fmt::format("vortex {} core_radius must be positive", j));
    }
  }
}

void DensityFieldParams::validate() const {
  for (std::size_t j = 0; j < blobs.size(); ++j) {
    const Blob& b = blobs[j];
    require_length(b.center, 3, fmt::format("blob {} center", j));
    auto positive = [&](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(fmt::format("blob {} {} must be positive", j, name));
    };
    positive(b.radius, "radius");
    positive(b.amplitude, "amplitude");
    positive(b.sharpness, "sharpness");
  }
}

Vector analytic_flow(double t, const Vector& p, const FlowFieldParams& fp) {
  Vector v = fp.u_inf;
  for (const Vortex& vx : fp.vortices) {
    const Vector d = p - (vx.center + t * vx.drift);
    const double r2 = d.squaredNorm();
    if (r2 == 0.0) continue;
    const double k = vx.circulation / (2.0 * std::numbers::pi) / r2 * -std::expm1(-r2 / (vx.core_radius * vx.core_radius));
    v(0) += -k * d(1);
    v(1) += k * d(0);
  }
  return v;
}

double analytic_density(const Vector& p, const DensityFieldParams& dp) {
  double rho = 0.0;
  for (const Blob& b : dp.blobs) {
    const double z = b.sharpness * (b.radius * b.radius - (p - b.center).squaredNorm());
    rho += b.amplitude / (1.0 + std::exp(-z));
  }
  return rho;
}

sym::ExprRef flow_expr(const sym::ExprRef& t, const sym::ExprRef& p, const FlowFieldParams& fp) {
  sym::ExprGraph g = p.graph();
  sym::ExprRef v = g.column(std::span<const double>(fp.u_inf.data(), 2));
  Matrix rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  const sym::ExprRef rot90 = g.constant(rot);
  for (const Vortex& vx : fp.vortices) {
    const sym::ExprRef d = p - g.column(std::span<const double>(vx.center.data(), 2)) -
                           t * g.column(std::span<const double>(vx.drift.data(), 2));
    const sym::ExprRef r2 = sym::sumsq(d);
    const sym::ExprRef core = 1.0 - sym::exp(r2 * (-1.0 / (vx.core_radius * vx.core_radius)));
    v = v + sym::matmul(rot90, d) * ((vx.circulation / (2.0 * std::numbers::pi)) * core / r2);
  }
  return v;
}

sym::ExprRef density_expr(const sym::ExprRef& p, const DensityFieldParams& dp) {
  sym::ExprGraph g = p.graph();
  sym::ExprRef rho = g.scalar(0.0);
  for (const Blob& b : dp.blobs) {
    const sym::ExprRef d2 = sym::sumsq(p - g.column(std::span<const double>(b.center.data(), 3)));
    rho = rho + b.amplitude * sym::sigmoid(b.sharpness * (b.radius * b.radius - d2));
  }
  return rho;
}

}  // namespace neuropt::cases
