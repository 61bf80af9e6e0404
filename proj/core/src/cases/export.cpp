#include "neuropt/cases/export.hpp"

#include <fmt/format.h>

namespace neuropt::cases {

std::string fish_csv(const FishParams& fp, const FishTrajectory& tr) {
  std::string out = "k,t,px,py,ux,uy\n";
  for (int k = 0; k <= fp.N; ++k) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},", k, k * fp.dt, tr.x(k, 0), tr.x(k, 1));
    out += k < fp.N ? fmt::format("{:.17g},{:.17g}\n", tr.u(k, 0), tr.u(k, 1)) : std::string(",\n");
  }
  return out;
}

std::string traj_csv(const TrajParams& tp, const Vector& z, const DensityModel& density) {
  const Matrix C = decision_to_coeffs(z, tp.degree, tp.T);
  std::string out = "k,t,px,py,pz,rho\n";
  for (int k = 0; k <= tp.N; ++k) {
    const double t = tp.T * k / tp.N;
    const Vector r = poly_eval(C, t, 0);
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", k, t, r(0), r(1), r(2),
                       density_model_value(density, r));
  }
  return out;
}

}  // namespace neuropt::cases
