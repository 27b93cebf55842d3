#include "mdtlab/analysis/ols.hpp"

#include <cmath>

#include "mdtlab/error.hpp"

namespace mdtlab::analysis {

OlsResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
  const Eigen::Index n = X.rows(), k = X.cols();
  if (y.size() != n) throw ConfigError("ols: y has " + std::to_string(y.size()) + " rows, X has " + std::to_string(n));
  if (n < k + 1) throw ConfigError("ols: need at least columns + 1 rows");
  auto name = [&](Eigen::Index c) {
    if (c == 0) return std::string("intercept");
    return static_cast<std::size_t>(c - 1) < names.size() ? names[c - 1] : "x" + std::to_string(c);
  };

  Eigen::MatrixXd A(n, k + 1);
  A.col(0).setOnes();
  A.rightCols(k) = X;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < k + 1) {
    // Every column with weight in some null-space direction takes part.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    const Eigen::MatrixXd kernel = lu.kernel();
    std::string cols;
    for (Eigen::Index c = 0; c < k + 1; ++c)
      if (kernel.row(c).cwiseAbs().maxCoeff() > 1e-8 * kernel.cwiseAbs().maxCoeff())
        cols += (cols.empty() ? "" : ", ") + name(c);
    throw NumericError("ols: rank-deficient design; collinear columns: " + cols);
  }
  const Eigen::VectorXd coef = qr.solve(y);
  OlsResult r;
  r.intercept = coef(0);
  r.betas = coef.tail(k);
  r.residuals = y - A * coef;
  const double ybar = y.mean();
  const double sst = (y.array() - ybar).square().sum();
  const double ssr = r.residuals.squaredNorm();
  r.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
  return r;
}

}  // namespace mdtlab::analysis
