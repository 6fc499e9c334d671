#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hyperfill {

// Dense double-precision row-major matrix; one row per node/instance.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row-index groups: groups[r] lists the input rows aggregated into output row r.
using Groups = std::vector<std::vector<int>>;

inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace hyperfill
