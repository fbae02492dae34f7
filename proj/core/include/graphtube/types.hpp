#pragma once

#include <Eigen/Dense>

namespace graphtube {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Version stamped into every serialized report and manifest.
inline constexpr int kSchemaVersion = 1;

}  // namespace graphtube
