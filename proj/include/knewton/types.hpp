#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

namespace knewton {

// Dense storage is column-major (Eigen default). Feature matrices Z are
// accessed column-by-column (one column per random feature), which is the
// hot path, hence the choice.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const Matrix& a) { return a.allFinite(); }
inline bool all_finite(const Vector& a) { return a.allFinite(); }

}  // namespace knewton
