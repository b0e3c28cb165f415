#pragma once

#include <cmath>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "antipower/common/error.hpp"
#include "antipower/stats/ols.hpp"

namespace antipower::stats {

inline constexpr double default_alpha = 0.05;

enum class Decision { reject_up, reject_down, keep };

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::reject_up: return "reject_up";
    case Decision::reject_down: return "reject_down";
    case Decision::keep: return "keep";
  }
  return "keep";
}

// Keep H0 when p >= alpha; otherwise reject with the direction of beta.
inline Decision decide(double p_value, double alpha, double beta) {
  if (!(p_value < alpha)) return Decision::keep;
  if (beta > 0.0) return Decision::reject_up;
  if (beta < 0.0) return Decision::reject_down;
  return Decision::keep;
}

struct CoefficientInference {
  std::size_t index = 0;
  std::string name;
  double beta = 0.0;
  double se = 0.0;
  double t = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  double df = 0.0;
  Decision decision = Decision::keep;
};

// Two-sided t test of coefficient j with standard error from V.
inline CoefficientInference infer_coefficient(const RegressionResult& fit, const Matrix& V,
                                              std::size_t j, double alpha = default_alpha) {
  if (j >= fit.p) throw std::out_of_range("coefficient index out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  CoefficientInference c;
  c.index = j;
  c.name = j < fit.names.size() ? fit.names[j] : std::string{};
  c.beta = fit.beta(static_cast<Eigen::Index>(j));
  c.df = static_cast<double>(fit.n - fit.p);
  const double var = V(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
  c.se = var > 0.0 ? std::sqrt(var) : 0.0;
  if (c.se == 0.0) {
    if (c.beta != 0.0)
      throw DegenerateInferenceError("coefficient '" + c.name +
                                     "' has zero standard error with a nonzero estimate");
    c.ci_low = c.ci_high = 0.0;
    c.p_value = 1.0;
    c.decision = Decision::keep;
    return c;
  }
  const boost::math::students_t dist(c.df);
  c.t = c.beta / c.se;
  c.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t))));
  const double crit = boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
  c.ci_low = c.beta - crit * c.se;
  c.ci_high = c.beta + crit * c.se;
  c.decision = decide(c.p_value, alpha, c.beta);
  return c;
}

}  // namespace antipower::stats
