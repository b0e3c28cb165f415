#pragma once

// Hand-rolled seeded generators for property tests and oracle datasets.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "antipower/stats/align.hpp"
#include "antipower/stats/ols.hpp"

namespace gen {

using antipower::stats::Matrix;
using antipower::stats::Vector;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal(double mu = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mu, sd)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline std::vector<double> normal_vec(Rng& r, std::size_t n, double mu = 0.0, double sd = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.normal(mu, sd);
  return v;
}

inline std::vector<double> uniform_vec(Rng& r, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform(lo, hi);
  return v;
}

// Values drawn from a small integer set so ties are frequent.
inline std::vector<double> tied_vec(Rng& r, std::size_t n, int levels = 7) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.integer(0, levels - 1);
  return v;
}

// y = x + noise with a mild planted correlation.
inline std::pair<std::vector<double>, std::vector<double>> correlated(Rng& r, std::size_t n, double noise = 1.0) {
  auto x = normal_vec(r, n, 10.0, 3.0);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.5 * x[i] + r.normal(0.0, noise * 3.0);
  return {x, y};
}

struct Regression {
  Matrix X;
  Vector y;
};

// Intercept plus `p - 1` predictors on power-model-like scales. With
// `hetero`, the noise sd grows with the first predictor.
inline Regression regression(Rng& r, std::size_t n, std::size_t p, bool hetero = false) {
  Regression d;
  d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  d.y.resize(static_cast<Eigen::Index>(n));
  static constexpr double coef[] = {5.0, 0.002, 0.03, 60.0, 1e-9, -0.7};
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    d.X(ii, 0) = 1.0;
    double y = coef[0];
    for (std::size_t j = 1; j < p; ++j) {
      double v = 0.0;
      switch (j % 5) {
        case 1: v = 50.0 + 150.0 * r.uniform(); break;          // rt_ms
        case 2: v = static_cast<double>(r.integer(10, 90)); break;  // req_rate
        case 3: v = r.uniform(0.05, 0.3); break;                // cpu_util
        case 4: v = 2e8 + 1e8 * r.uniform(); break;             // memory_bytes
        default: v = r.normal(); break;
      }
      d.X(ii, static_cast<Eigen::Index>(j)) = v;
      y += coef[j % 6] * v;
    }
    const double sd = hetero ? 0.02 * d.X(ii, std::min<Eigen::Index>(1, static_cast<Eigen::Index>(p) - 1)) : 0.5;
    d.y(ii) = y + r.normal(0.0, sd);
  }
  return d;
}

inline std::vector<std::vector<long double>> rows_of(const Matrix& X) {
  std::vector<std::vector<long double>> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(X(i, j));
  return out;
}

inline std::vector<long double> vec_of(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// Aligned per-second rows following a planted cpu model.
inline std::vector<antipower::stats::AlignedRow> power_rows(Rng& r, std::size_t n, double rt_coeff,
                                                            double noise_sd = 0.5) {
  std::vector<antipower::stats::AlignedRow> rows;
  for (std::size_t t = 0; t < n; ++t) {
    antipower::stats::AlignedRow row;
    row.t = static_cast<std::int64_t>(t);
    row.rt_ms = 50.0 + 150.0 * r.uniform();
    row.req_rate = r.integer(10, 90);
    row.cpu_util = r.uniform(0.05, 0.3);
    row.memory_bytes = 2e8 + 1e8 * r.uniform();
    row.cpu_power_w = 5.0 + 60.0 * *row.cpu_util + rt_coeff * *row.rt_ms + r.normal(0.0, noise_sd);
    row.dram_power_w = 0.3 + r.normal(0.0, 0.02);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gen
