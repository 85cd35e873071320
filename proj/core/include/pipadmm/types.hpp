#pragma once

#include <Eigen/Core>

namespace pipadmm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

/// Dense design matrix, row-major so that row blocks (shards) are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;
using VectorMut = Eigen::Ref<Vector>;

}  // namespace pipadmm
