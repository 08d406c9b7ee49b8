#pragma once

#include <Eigen/Dense>

namespace mppgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace mppgeo
