#pragma once

// Runs every statistical routine against the long-double oracle on a fixed
// seeded dataset and reports the worst relative error per routine. Shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "antipower/stats/correlation.hpp"
#include "antipower/stats/diagnostics.hpp"
#include "antipower/stats/ols.hpp"
#include "generators.hpp"
#include "oracle.hpp"

namespace oracle_check {

struct Comparison {
  std::string routine;
  std::size_t n = 0;
  double rel_err = 0.0;
};

inline std::size_t columns_for(std::size_t n) { return n <= 4 ? 2 : n <= 20 ? 4 : 5; }

inline std::vector<Comparison> compare_at(std::size_t n, std::uint64_t seed) {
  namespace st = antipower::stats;
  std::vector<Comparison> out;
  gen::Rng rng(seed);

  auto [x, y] = gen::correlated(rng, n);
  {
    const auto got = st::pearson(x, y).value();
    out.push_back({"pearson", n, oracle::rel(got, oracle::pearson(oracle::widen(x), oracle::widen(y)))});
  }
  {
    const auto tx = gen::tied_vec(rng, n), ty = gen::tied_vec(rng, n, 5);
    std::vector<double> ty2(n);
    for (std::size_t i = 0; i < n; ++i) ty2[i] = ty[i] + tx[i];  // correlated and tied
    const auto got = st::spearman(tx, ty2).value();
    out.push_back({"spearman", n, oracle::rel(got, oracle::spearman(oracle::widen(tx), oracle::widen(ty2)))});
  }

  const auto d = gen::regression(rng, n, columns_for(n), true);
  const auto fit = st::ols_fit(d.X, d.y);
  const auto rows = gen::rows_of(d.X);
  const auto ref = oracle::ols(rows, gen::vec_of(d.y));
  out.push_back({"ols_fit.beta", n, oracle::rel_vec(fit.beta, ref.beta)});
  out.push_back({"ols_fit.residuals", n, oracle::rel_vec(fit.residuals, ref.residuals)});
  out.push_back({"ols_fit.leverages", n, oracle::rel_vec(fit.leverages, ref.leverages)});

  const auto V = st::hc3_covariance(fit, d.X);
  out.push_back({"hc3_covariance", n, oracle::rel_mat(V, oracle::hc3(rows, ref))});

  const auto bp = st::breusch_pagan(fit, d.X);
  const auto bp_ref = oracle::breusch_pagan(rows, ref.residuals);
  out.push_back({"breusch_pagan.statistic", n, oracle::rel(bp.statistic, bp_ref.statistic)});
  out.push_back({"breusch_pagan.p_value", n, oracle::rel(bp.p_value, bp_ref.p_value)});

  // The normality test needs at least 8 observations.
  const std::size_t n_ad = std::max<std::size_t>(n, 8);
  const auto sample = gen::normal_vec(rng, n_ad, 3.0, 2.0);
  const auto ad = st::anderson_darling(sample);
  const auto ad_ref = oracle::anderson_darling(oracle::widen(sample));
  out.push_back({"anderson_darling.statistic", n_ad, oracle::rel(ad.statistic, ad_ref.statistic)});
  out.push_back({"anderson_darling.p_value", n_ad, oracle::rel(ad.p_value, ad_ref.p_value)});
  return out;
}

inline const std::vector<std::size_t>& sizes() {
  static const std::vector<std::size_t> s = {4, 20, 100, 1000, 5000};
  return s;
}

inline std::uint64_t seed_for(std::size_t n) { return 0xA11CE + n; }

}  // namespace oracle_check
