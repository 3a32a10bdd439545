#pragma once

#include <Eigen/Dense>

namespace nestquant {

// Row-major so that matrix rows are contiguous and can be handed out as spans.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace nestquant
