#pragma once

#include <Eigen/Core>

namespace neuropt {

/// Dense row-major matrix; the value type of every graph node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace neuropt
