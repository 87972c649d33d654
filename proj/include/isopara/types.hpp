#pragma once

#include <Eigen/Dense>

namespace isopara {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace isopara
