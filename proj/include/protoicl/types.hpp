#pragma once

#include <Eigen/Dense>
#include <vector>

namespace protoicl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using Index = Eigen::Index;

} // namespace protoicl
