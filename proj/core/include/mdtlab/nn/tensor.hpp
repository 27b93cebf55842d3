#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mdtlab::nn {

// Row-major so flattened weights match the checkpoint layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }
inline Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace mdtlab::nn
