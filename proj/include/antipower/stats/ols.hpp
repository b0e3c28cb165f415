#pragma once

// Least squares through a column-pivoted Householder QR, plus the HC3
// heteroskedasticity-consistent covariance.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "antipower/common/error.hpp"

namespace antipower::stats {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct RegressionResult {
  std::vector<std::string> names;  // one per column of X
  Vector beta;
  Vector residuals;
  Vector leverages;
  Matrix xtx_inv;        // (X'X)^-1
  Matrix cov_classical;  // sigma^2 (X'X)^-1
  std::size_t n = 0;
  std::size_t p = 0;
  double r2 = 0.0;
  double sse = 0.0;
};

namespace detail {

// Column equilibration: QR is run on X D with D = diag(1 / ||x_j||), so a
// byte-scale memory column and the intercept are judged on the same footing
// by the rank test. Coefficients are mapped back to the original units.
inline Vector column_scales(const Matrix& X) {
  Vector d(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double norm = X.col(j).norm();
    d(j) = norm > 0.0 ? 1.0 / norm : 1.0;
  }
  return d;
}

inline Eigen::Index rank_of(const Matrix& X) {
  const Matrix Xs = X * column_scales(X).asDiagonal();
  Eigen::ColPivHouseholderQR<Matrix> qr(Xs);
  qr.setThreshold(1e-10);
  return qr.rank();
}

// First column whose addition does not raise the rank.
inline Eigen::Index offending_column(const Matrix& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    if (rank_of(X.leftCols(j + 1)) < j + 1) return j;
  return X.cols() - 1;
}

}  // namespace detail

inline RegressionResult ols_fit(const Matrix& X, const Vector& y, std::vector<std::string> names = {}) {
  const auto n = X.rows(), p = X.cols();
  if (y.size() != n) throw std::invalid_argument("ols_fit: X and y disagree on the row count");
  if (p < 1) throw std::invalid_argument("ols_fit: empty design");
  if (n <= p) throw std::invalid_argument("ols_fit: need more rows than columns");
  if (names.empty())
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));

  const Vector d = detail::column_scales(X);
  const Matrix Xs = X * d.asDiagonal();
  Eigen::ColPivHouseholderQR<Matrix> qr(Xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    const auto j = detail::offending_column(X);
    throw SingularDesignError(static_cast<std::size_t>(j), names[static_cast<std::size_t>(j)]);
  }

  RegressionResult r;
  r.names = std::move(names);
  r.n = static_cast<std::size_t>(n);
  r.p = static_cast<std::size_t>(p);
  r.beta = d.asDiagonal() * qr.solve(y);
  r.residuals = y - X * r.beta;

  // Xs P = Q R  =>  (Xs'Xs)^-1 = P R^-1 R^-T P'
  const Matrix R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Matrix Rinv = R.template triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  const auto& P = qr.colsPermutation();
  const Matrix xs_inv = P * (Rinv * Rinv.transpose()) * P.transpose();
  r.xtx_inv = d.asDiagonal() * xs_inv * d.asDiagonal();

  // leverages are the squared row norms of the thin Q factor
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, p);
  r.leverages = Q.rowwise().squaredNorm();

  r.sse = r.residuals.squaredNorm();
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  r.r2 = sst > 0.0 ? 1.0 - r.sse / sst : (r.sse == 0.0 ? 1.0 : 0.0);
  r.cov_classical = (r.sse / static_cast<double>(n - p)) * r.xtx_inv;
  return r;
}

// V = (X'X)^-1 X' diag(e_i^2 / (1 - h_ii)^2) X (X'X)^-1
inline Matrix hc3_covariance(const RegressionResult& fit, const Matrix& X) {
  if (static_cast<std::size_t>(X.rows()) != fit.n || static_cast<std::size_t>(X.cols()) != fit.p)
    throw std::invalid_argument("hc3_covariance: X does not match the fit");
  Vector w(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double one_minus_h = 1.0 - fit.leverages(i);
    if (one_minus_h <= 1e-10)
      throw DegenerateInferenceError("observation " + std::to_string(i) +
                                     " has leverage 1; HC3 is undefined");
    const double e = fit.residuals(i);
    w(i) = e * e / (one_minus_h * one_minus_h);
  }
  const Matrix meat = X.transpose() * w.asDiagonal() * X;
  Matrix V = fit.xtx_inv * meat * fit.xtx_inv;
  return (V + V.transpose()) / 2.0;
}

}  // namespace antipower::stats
