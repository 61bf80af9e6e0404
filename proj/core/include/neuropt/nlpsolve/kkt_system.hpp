#pragma once

#include <vector>

#include <Eigen/Core>

namespace neuropt {

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

/// Dense LDL^T (Bunch-Kaufman) factorization of a symmetric matrix; only the
/// lower triangle is read.
class SymmetricFactorization {
 public:
  /// Returns false when the matrix is singular (a zero pivot) or has
  /// non-finite entries; inertia() is meaningful either way.
  bool factor(const Eigen::MatrixXd& k);
  const Inertia& inertia() const { return inertia_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::MatrixXd ldl_;
  std::vector<int> ipiv_;
  Inertia inertia_;
  bool ok_ = false;
};

}  // namespace neuropt
