#pragma once

#include <Eigen/Core>

namespace pvtrack {

using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Read-only vector argument type for expression-friendly free functions.
using VectorRef = Eigen::Ref<const Vector>;

}  // namespace pvtrack
