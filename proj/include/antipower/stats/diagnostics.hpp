#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "antipower/common/error.hpp"
#include "antipower/stats/ols.hpp"

namespace antipower::stats {

struct DiagnosticResult {
  std::string test;  // breusch_pagan | anderson_darling
  double statistic = 0.0;
  double p_value = 1.0;
  bool null_rejected = false;
  std::size_t n = 0;
};

// Studentized (Koenker) Breusch-Pagan: LM = n R^2 of e^2 regressed on X,
// chi-squared with p - 1 degrees of freedom.
inline DiagnosticResult breusch_pagan(const RegressionResult& fit, const Matrix& X, double alpha = 0.05) {
  if (fit.p < 2) throw DegenerateInferenceError("Breusch-Pagan needs at least one regressor");
  DiagnosticResult d;
  d.test = "breusch_pagan";
  d.n = fit.n;
  const Vector e2 = fit.residuals.array().square().matrix();
  const double mean = e2.mean();
  const double spread = (e2.array() - mean).square().sum();
  if (spread == 0.0) {
    d.statistic = 0.0;
    d.p_value = 1.0;
    return d;
  }
  const auto aux = ols_fit(X, e2, fit.names);
  d.statistic = static_cast<double>(fit.n) * std::max(0.0, aux.r2);
  const boost::math::chi_squared chi2(static_cast<double>(fit.p - 1));
  d.p_value = std::clamp(boost::math::cdf(boost::math::complement(chi2, d.statistic)), 0.0, 1.0);
  d.null_rejected = d.p_value < alpha;
  return d;
}

namespace detail {

inline double log_phi(double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); }
inline double log_one_minus_phi(double z) { return std::log(0.5 * std::erfc(z / std::sqrt(2.0))); }

// Case 3 (mean and variance estimated) p-value of the adjusted statistic,
// D'Agostino & Stephens (1986), Goodness-of-Fit Techniques, Table 4.9.
inline double ad_case3_p(double a) {
  double p;
  if (a >= 0.6)
    p = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  else if (a >= 0.34)
    p = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  else if (a >= 0.2)
    p = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  else
    p = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

// Anderson-Darling normality test with estimated mean and variance.
// `statistic` is the small-sample adjusted A*^2.
inline DiagnosticResult anderson_darling(std::vector<double> x, double alpha = 0.05) {
  const std::size_t n = x.size();
  if (n < 8) throw std::invalid_argument("Anderson-Darling needs at least 8 observations");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw DegenerateInferenceError("Anderson-Darling: sample has zero spread");
  std::sort(x.begin(), x.end());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (x[i] - mean) / sd;
    const double zr = (x[n - 1 - i] - mean) / sd;
    s += static_cast<double>(2 * i + 1) * (detail::log_phi(zi) + detail::log_one_minus_phi(zr));
  }
  const double nn = static_cast<double>(n);
  const double a2 = -nn - s / nn;
  DiagnosticResult d;
  d.test = "anderson_darling";
  d.n = n;
  d.statistic = a2 * (1.0 + 0.75 / nn + 2.25 / (nn * nn));
  d.p_value = detail::ad_case3_p(d.statistic);
  d.null_rejected = d.p_value < alpha;
  return d;
}

}  // namespace antipower::stats
