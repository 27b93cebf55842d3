#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mdtlab::analysis {

struct OlsResult {
  Eigen::VectorXd betas;  // one per design column
  double intercept = 0.0;
  double r2 = 0.0;
  Eigen::VectorXd residuals;
};

// Least squares with an intercept column added internally (column-pivoted
// QR). Throws NumericError naming the collinear columns when the design is
// rank deficient.
OlsResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<std::string>& column_names = {});

}  // namespace mdtlab::analysis
