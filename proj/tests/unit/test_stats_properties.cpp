#include <gtest/gtest.h>

#include "antipower/stats/analyze.hpp"
#include "generators.hpp"
#include "oracle.hpp"
#include "oracle_check.hpp"

using namespace antipower;
using namespace antipower::stats;

constexpr double oracle_tol = 1e-9;

TEST(OracleEquivalence, EveryRoutineAtEverySize) {
  for (const auto n : oracle_check::sizes())
    for (const auto& c : oracle_check::compare_at(n, oracle_check::seed_for(n)))
      EXPECT_LE(c.rel_err, oracle_tol) << c.routine << " n=" << c.n;
}

TEST(OracleEquivalence, ExtraSeedsAtModerateSize) {
  for (std::uint64_t s = 0; s < 20; ++s)
    for (const auto& c : oracle_check::compare_at(60, 900 + s))
      EXPECT_LE(c.rel_err, oracle_tol) << c.routine << " seed=" << s;
}

TEST(OracleEquivalence, Trapezoid) {
  gen::Rng r(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = r.integer(2, 400);
    std::vector<std::pair<double, double>> s;
    std::vector<long double> t, w;
    double at = r.uniform(0, 1e6);
    for (int i = 0; i < n; ++i) {
      at += r.uniform(0.5, 1.5);
      s.emplace_back(at, r.uniform(0, 120));
      t.push_back(s.back().first);
      w.push_back(s.back().second);
    }
    EXPECT_LE(oracle::rel(trapezoid_energy(s), oracle::trapezoid(t, w)), oracle_tol);
  }
}

TEST(Properties, CorrelationsStayInBounds) {
  gen::Rng r(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(r.integer(3, 200));
    const auto x = trial % 3 ? gen::normal_vec(r, n) : gen::tied_vec(r, n, 3);
    const auto y = trial % 2 ? gen::uniform_vec(r, n) : gen::tied_vec(r, n, 2);
    for (auto v : {pearson(x, y), spearman(x, y)})
      if (v) {
        ASSERT_GE(*v, -1.0);
        ASSERT_LE(*v, 1.0);
      }
  }
}

TEST(Properties, CorrelationShiftAndScaleInvariance) {
  gen::Rng r(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto [x, y] = gen::correlated(r, static_cast<std::size_t>(r.integer(5, 500)));
    const double a = r.uniform(-1e3, 1e3), b = r.uniform(0.1, 10);
    std::vector<double> x2;
    for (double v : x) x2.push_back(b * v + a);
    EXPECT_NEAR(*pearson(x2, y), *pearson(x, y), 1e-12);
    EXPECT_NEAR(*spearman(x2, y), *spearman(x, y), 1e-12);
  }
}

TEST(Properties, LeveragesSumToColumnCount) {
  gen::Rng r(3);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = static_cast<std::size_t>(r.integer(8, 3000));
    const auto p = static_cast<std::size_t>(r.integer(2, 5));
    const auto d = gen::regression(r, n, p, trial % 2);
    const auto fit = ols_fit(d.X, d.y);
    EXPECT_NEAR(fit.leverages.sum(), static_cast<double>(p), 1e-9);
    for (Eigen::Index i = 0; i < fit.leverages.size(); ++i) {
      ASSERT_GE(fit.leverages(i), -1e-12);
      ASSERT_LE(fit.leverages(i), 1.0 + 1e-12);
    }
    // residuals are orthogonal to the design
    EXPECT_LT((d.X.transpose() * fit.residuals).cwiseAbs().maxCoeff() /
                  (d.X.cwiseAbs().colwise().maxCoeff().maxCoeff() * fit.residuals.norm() + 1e-300),
              1e-8);
  }
}

TEST(Properties, OlsScaleEquivariance) {
  gen::Rng r(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<std::size_t>(r.integer(30, 800));
    const auto d = gen::regression(r, n, 4, trial % 2);
    const double c = r.uniform(0.01, 100);
    const auto f1 = ols_fit(d.X, d.y);
    const auto f2 = ols_fit(d.X, c * d.y);
    const auto i1 = infer_coefficient(f1, hc3_covariance(f1, d.X), 1);
    const auto i2 = infer_coefficient(f2, hc3_covariance(f2, d.X), 1);
    for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(f2.beta(j), c * f1.beta(j), 1e-8 * std::abs(c * f1.beta(j)) + 1e-12);
    EXPECT_NEAR(i2.se, c * i1.se, 1e-8 * c * i1.se);
    EXPECT_NEAR(i2.p_value, i1.p_value, 1e-9);
    EXPECT_EQ(i2.decision, i1.decision);
  }
}

TEST(Properties, DecisionIsAFunctionOfPAlphaAndSign) {
  gen::Rng r(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const double p = r.uniform(), alpha = r.uniform(0.001, 0.2), beta = r.normal(0, 1e-3);
    const auto d = decide(p, alpha, beta);
    EXPECT_EQ(d, decide(p, alpha, beta * r.uniform(0.1, 10)));
    if (p >= alpha) EXPECT_EQ(d, Decision::keep);
    else EXPECT_EQ(d, beta > 0 ? Decision::reject_up : Decision::reject_down);
  }
}

TEST(Properties, TrapezoidExactOnAffineSeries) {
  gen::Rng r(6);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = r.uniform(0, 100), b = r.uniform(-1, 1);
    const int n = r.integer(2, 2000);
    std::vector<std::pair<double, double>> s;
    double t = 0;
    for (int i = 0; i < n; ++i) {
      s.emplace_back(t, a + b * t);
      t += r.integer(1, 3);
    }
    const double t0 = s.front().first, t1 = s.back().first;
    const double exact = a * (t1 - t0) + b * (t1 * t1 - t0 * t0) / 2;
    EXPECT_NEAR(trapezoid_energy(s), exact, 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST(Properties, DescriptiveOrdering) {
  gen::Rng r(7);
  for (int trial = 0; trial < 500; ++trial) {
    const auto x = gen::normal_vec(r, static_cast<std::size_t>(r.integer(1, 50)), r.uniform(-1e6, 1e6), r.uniform(0, 1e3));
    const auto d = descriptive(x);
    ASSERT_LE(d.min, d.mean);
    ASSERT_LE(d.mean, d.max);
  }
}

TEST(Properties, BreuschPaganFalseRejectionNearAlpha) {
  int rejected = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    gen::Rng r(70'000 + s);
    const auto d = gen::regression(r, 5000, 4);
    const auto fit = ols_fit(d.X, d.y);
    rejected += breusch_pagan(fit, d.X).null_rejected;
  }
  EXPECT_NEAR(rejected / 200.0, 0.05, 0.03);
}
