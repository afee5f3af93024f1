#pragma once

#include <Eigen/Core>

namespace edgepool {

/// Dense row-major feature matrix. One row per node (or edge).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

} // namespace edgepool
