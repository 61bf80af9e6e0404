#include "neuropt/nlpsolve/kkt_system.hpp"

#include <cmath>

#include <lapacke.h>

#include "neuropt/error.hpp"

namespace neuropt {

bool SymmetricFactorization::factor(const Eigen::MatrixXd& k) {
  const auto n = static_cast<lapack_int>(k.rows());
  ldl_ = k;
  ipiv_.assign(static_cast<std::size_t>(n), 0);
  inertia_ = Inertia{};
  ok_ = false;
  if (!ldl_.allFinite()) return false;
  if (n == 0) return ok_ = true;

  std::vector<lapack_int> piv(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, ldl_.data(), n, piv.data());
  if (info < 0) throw Error("dsytrf: invalid argument");
  for (lapack_int i = 0; i < n; ++i) ipiv_[static_cast<std::size_t>(i)] = static_cast<int>(piv[static_cast<std::size_t>(i)]);

  // Inertia of D: 1x1 pivots by sign, 2x2 blocks by determinant and trace.
  for (lapack_int i = 0; i < n;) {
    if (piv[static_cast<std::size_t>(i)] > 0) {
      const double d = ldl_(i, i);
      if (d > 0.0) ++inertia_.positive;
      else if (d < 0.0) ++inertia_.negative;
      else ++inertia_.zero;
      i += 1;
    } else {
      const double a = ldl_(i, i);
      const double b = ldl_(i + 1, i);
      const double c = ldl_(i + 1, i + 1);
      const double det = a * c - b * b;
      if (det < 0.0) {
        ++inertia_.positive;
        ++inertia_.negative;
      } else if (det > 0.0) {
        if (a + c > 0.0) inertia_.positive += 2;
        else inertia_.negative += 2;
      } else {
        inertia_.zero += 2;
      }
      i += 2;
    }
  }
  ok_ = info == 0 && inertia_.zero == 0;
  return ok_;
}

Eigen::VectorXd SymmetricFactorization::solve(const Eigen::VectorXd& rhs) const {
  if (!ok_) throw Error("SymmetricFactorization::solve called without a valid factorization");
  Eigen::VectorXd x = rhs;
  const auto n = static_cast<lapack_int>(ldl_.rows());
  if (n == 0) return x;
  std::vector<lapack_int> piv(ipiv_.begin(), ipiv_.end());
  const lapack_int info =
      LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, ldl_.data(), n, piv.data(), x.data(), n);
  if (info != 0) throw Error("dsytrs failed");
  return x;
}

}  // namespace neuropt
