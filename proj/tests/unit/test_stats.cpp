#include <gtest/gtest.h>

#include "antipower/stats/analyze.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace antipower;
using namespace antipower::stats;

namespace {

Matrix line_design(const std::vector<double>& x) {
  Matrix X(static_cast<Eigen::Index>(x.size()), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = x[i];
  }
  return X;
}

Vector vec(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

// ---- descriptive ----

TEST(Descriptive, SmallSeries) {
  const std::vector<double> x = {1, 2, 3};
  const auto d = descriptive(x);
  EXPECT_DOUBLE_EQ(d.mean, 2.0);
  EXPECT_EQ(d.min, 1.0);
  EXPECT_EQ(d.max, 3.0);
  EXPECT_EQ(d.n, 3u);
}

TEST(Descriptive, ConstantSeries) {
  const std::vector<double> x(17, 5.0);
  const auto d = descriptive(x);
  EXPECT_EQ(d.mean, 5.0);
  EXPECT_EQ(d.min, 5.0);
  EXPECT_EQ(d.max, 5.0);
  EXPECT_THROW((void)descriptive(std::vector<double>{}), std::invalid_argument);
}

// ---- correlation ----

TEST(Pearson, ExactLines) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> up, down;
  for (double v : x) {
    up.push_back(2 * v + 1);
    down.push_back(-v);
  }
  EXPECT_NEAR(*pearson(x, up), 1.0, 1e-12);
  EXPECT_NEAR(*pearson(x, down), -1.0, 1e-12);
}

TEST(Pearson, ZeroVarianceIsUndefined) {
  const std::vector<double> x = {1, 2, 3, 4}, c = {7, 7, 7, 7};
  EXPECT_FALSE(pearson(x, c).has_value());
  EXPECT_FALSE(spearman(c, x).has_value());
  EXPECT_THROW((void)pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), std::invalid_argument);
  EXPECT_THROW((void)pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(Spearman, MonotoneNonlinearIsOne) {
  std::vector<double> x, y;
  for (int i = 1; i <= 30; ++i) {
    x.push_back(i);
    y.push_back(std::exp(0.3 * i));
  }
  EXPECT_NEAR(*spearman(x, y), 1.0, 1e-12);
  EXPECT_LT(*pearson(x, y), 0.9);
}

TEST(Spearman, TiesShareAverageRank) {
  const std::vector<double> x = {1, 2, 2, 3};
  EXPECT_EQ(average_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
  const std::vector<double> y = {3, 1, 3, 3};
  EXPECT_EQ(average_ranks(y), (std::vector<double>{3, 1, 3, 3}));
}

TEST(Correlate, SignAgreement) {
  const std::vector<double> x = {1, 2, 3, 4, 5}, y = {2, 4, 5, 4, 9};
  const auto c = correlate(x, y);
  EXPECT_TRUE(c.sign_agreement());
  EXPECT_EQ(c.n, 5u);
  EXPECT_FALSE(correlate(std::vector<double>{1, 2}, std::vector<double>{1, 2}).pearson_r.has_value());
}

// ---- ols ----

TEST(Ols, ExactLine) {
  const std::vector<double> x = {0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  const auto fit = ols_fit(line_design(x), vec(y));
  EXPECT_NEAR(fit.beta(0), 1.0, 1e-12);
  EXPECT_NEAR(fit.beta(1), 2.0, 1e-12);
  EXPECT_LT(fit.residuals.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
}

TEST(Ols, OrthogonalResponseHasZeroSlope) {
  const std::vector<double> x = {-2, -1, 0, 1, 2};
  const std::vector<double> y = {4, 1, 0, 1, 4};  // symmetric in x
  const auto fit = ols_fit(line_design(x), vec(y));
  EXPECT_NEAR(fit.beta(1), 0.0, 1e-12);
  EXPECT_NEAR(fit.beta(0), 2.0, 1e-12);
}

TEST(Ols, SingularDesignNamesTheColumn) {
  Matrix X(6, 3);
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = 1;
    X(i, 1) = i;
    X(i, 2) = 3.0 * i + 2.0;  // affine in the others
  }
  Vector y = Vector::LinSpaced(6, 0, 5);
  try {
    (void)ols_fit(X, y, {"intercept", "rt_ms", "req_rate"});
    FAIL() << "expected SingularDesignError";
  } catch (const SingularDesignError& e) {
    EXPECT_EQ(e.column(), 2u);
    EXPECT_NE(std::string(e.what()).find("req_rate"), std::string::npos);
  }
  Matrix c(6, 2);
  c.col(0).setOnes();
  c.col(1).setConstant(4.0);
  EXPECT_THROW((void)ols_fit(c, y, {"intercept", "cpu_util"}), SingularDesignError);
}

TEST(Ols, RejectsTooFewRows) {
  EXPECT_THROW((void)ols_fit(line_design({1, 2}), vec({1, 2})), std::invalid_argument);
}

TEST(Ols, ByteScaleColumnIsNotFlaggedSingular) {
  gen::Rng r(3);
  const auto d = gen::regression(r, 200, 5);
  const auto fit = ols_fit(d.X, d.y);
  EXPECT_NEAR(fit.beta(3), 60.0, 3.0);
}

// ---- hc3 ----

TEST(Hc3, ZeroResidualsGiveZeroMatrix) {
  const std::vector<double> x = {0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(-3 * v + 0.5);
  const auto X = line_design(x);
  const auto fit = ols_fit(X, vec(y));
  EXPECT_LT(hc3_covariance(fit, X).cwiseAbs().maxCoeff(), 1e-20);
}

TEST(Hc3, HandDataset) {
  const auto X = line_design({0, 1, 2, 3});
  const auto fit = ols_fit(X, vec({1, 3, 2, 5}));
  EXPECT_NEAR(fit.beta(0), 1.1, 1e-12);
  EXPECT_NEAR(fit.beta(1), 1.1, 1e-12);
  const auto V = hc3_covariance(fit, X);
  EXPECT_NEAR(V(0, 0), 10097.0 / 22050.0, 1e-12);
  EXPECT_NEAR(V(0, 1), -1033.0 / 3675.0, 1e-12);
  EXPECT_NEAR(V(1, 0), -1033.0 / 3675.0, 1e-12);
  EXPECT_NEAR(V(1, 1), 1023.0 / 2450.0, 1e-12);
}

TEST(Hc3, HomoskedasticMatchesClassical) {
  gen::Rng r(10);
  const auto d = gen::regression(r, 10000, 4);
  const auto fit = ols_fit(d.X, d.y);
  const auto V = hc3_covariance(fit, d.X);
  for (Eigen::Index j = 0; j < 4; ++j)
    EXPECT_NEAR(std::sqrt(V(j, j)) / std::sqrt(fit.cov_classical(j, j)), 1.0, 0.10) << j;
}

TEST(Hc3, UnitLeverageIsAnError) {
  // the dummy column singles out one observation, so its leverage is 1
  Matrix X(5, 2);
  X << 1, 0, 1, 0, 1, 0, 1, 0, 1, 1;
  const auto fit = ols_fit(X, vec({1, 2, 3, 2, 9}));
  EXPECT_NEAR(fit.leverages(4), 1.0, 1e-12);
  EXPECT_THROW((void)hc3_covariance(fit, X), DegenerateInferenceError);
}

// ---- inference ----

TEST(Infer, ZeroCoefficientKeeps) {
  const std::vector<double> x = {-2, -1, 0, 1, 2};
  const auto X = line_design(x);
  const auto fit = ols_fit(X, vec({4, 1, 0, 1, 4}));
  const auto c = infer_coefficient(fit, hc3_covariance(fit, X), 1);
  EXPECT_NEAR(c.p_value, 1.0, 1e-9);
  EXPECT_EQ(c.decision, Decision::keep);
  EXPECT_DOUBLE_EQ(c.df, 3.0);
}

TEST(Infer, TableDecisionsFollowPAndSign) {
  EXPECT_EQ(decide(0.000000, 0.05, 0.018475), Decision::reject_up);
  EXPECT_EQ(decide(0.000127, 0.05, -0.000004), Decision::reject_down);
  EXPECT_EQ(decide(0.422677, 0.05, -0.000002), Decision::keep);
  EXPECT_EQ(decide(0.05, 0.05, 1.0), Decision::keep);
  EXPECT_EQ(decide(0.01, 0.05, 0.0), Decision::keep);
  EXPECT_STREQ(to_string(Decision::reject_down), "reject_down");
}

TEST(Infer, ConfidenceIntervalAgreesWithPValue) {
  gen::Rng r(21);
  for (int s = 0; s < 50; ++s) {
    auto rows = gen::power_rows(r, 60, s % 2 ? 0.01 : 0.0);
    const auto d = assemble_design(rows, PowerModel::cpu);
    const auto fit = ols_fit(d.X, d.y, d.names);
    const auto c = infer_coefficient(fit, hc3_covariance(fit, d.X), rt_column);
    const bool excludes = c.ci_low > 0.0 || c.ci_high < 0.0;
    EXPECT_EQ(excludes, c.p_value < 0.05) << s;
    EXPECT_EQ(c.name, "rt_ms");
  }
}

TEST(Infer, PlantedRtCoefficientIsCovered) {
  gen::Rng r(4);
  int covered = 0;
  for (int s = 0; s < 40; ++s) {
    const auto rows = gen::power_rows(r, 500, 0.002);
    const auto m = fit_model(rows, PowerModel::cpu, 0.05);
    ASSERT_FALSE(m.error) << *m.error;
    covered += m.rt.ci_low <= 0.002 && 0.002 <= m.rt.ci_high;
  }
  EXPECT_GE(covered, 34);
}

// ---- align and design ----

TEST(Align, RowsCoverTheOverlap) {
  fixtures::TraceSpec s;
  s.seconds = 100;
  auto a = fixtures::synthetic_artifact(s);
  a.resources.erase(a.resources.begin(), a.resources.begin() + 10);
  a.power.resize(95);
  const auto t = align(a.requests, a.power, a.resources);
  EXPECT_EQ(t.rows.size(), 85u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i - 1].t, t.rows[i].t);
}

TEST(Align, NegativePowerRowIsExcluded) {
  auto a = fixtures::synthetic_artifact({});
  a.power[40].cpu_power_w = -3.0;
  EXPECT_EQ(align(a.requests, a.power, a.resources).rows.size(), a.power.size() - 1);
}

TEST(Align, SecondWithoutRequestsStaysOutOfTheModel) {
  auto a = fixtures::planted_artifact(1, 0.0, 0, 60);
  const std::int64_t gap = a.power[30].t_s;
  std::erase_if(a.requests, [&](const load::RequestRecord& r) {
    return static_cast<std::int64_t>(std::floor(r.completion_ms() / 1000.0)) == gap;
  });
  const auto t = align(a.requests, a.power, a.resources);
  EXPECT_EQ(t.rows.size(), 60u);
  const auto d = assemble_design(t, PowerModel::cpu);
  EXPECT_EQ(d.X.rows(), 59);
  EXPECT_EQ(std::count(d.t.begin(), d.t.end(), gap), 0);
}

TEST(Align, HostScopeUsesHostUtilization) {
  const auto a = fixtures::planted_artifact(2, 0.0, 0, 30);
  const auto p = align(a.requests, a.power, a.resources, UtilScope::process);
  const auto h = align(a.requests, a.power, a.resources, UtilScope::host);
  EXPECT_NEAR(*h.rows[5].cpu_util - *p.rows[5].cpu_util, 0.01, 1e-12);
}

TEST(Design, ShapesAndColumnOrder) {
  gen::Rng r(8);
  const auto rows = gen::power_rows(r, 100, 0.0);
  const auto cpu = assemble_design(rows, PowerModel::cpu);
  EXPECT_EQ(cpu.X.rows(), 100);
  EXPECT_EQ(cpu.X.cols(), 4);
  EXPECT_EQ(cpu.names[rt_column], "rt_ms");
  const auto dram = assemble_design(rows, PowerModel::dram);
  EXPECT_EQ(dram.X.cols(), 5);
  EXPECT_EQ(dram.names.back(), "memory_bytes");
  EXPECT_TRUE(cpu.warnings.empty());
}

TEST(Design, ConstantPredictorWarns) {
  gen::Rng r(8);
  auto rows = gen::power_rows(r, 50, 0.0);
  for (auto& row : rows) row.req_rate = 20;
  const auto d = assemble_design(rows, PowerModel::cpu);
  ASSERT_EQ(d.warnings.size(), 1u);
  EXPECT_NE(d.warnings[0].find("req_rate"), std::string::npos);
  const auto m = fit_model(rows, PowerModel::cpu, 0.05);
  ASSERT_TRUE(m.error.has_value());
  EXPECT_NE(m.error->find("req_rate"), std::string::npos);
}

// ---- diagnostics ----

TEST(BreuschPagan, HeteroskedasticNoiseIsRejected) {
  gen::Rng r(31);
  const auto d = gen::regression(r, 2000, 3, true);
  const auto fit = ols_fit(d.X, d.y);
  const auto bp = breusch_pagan(fit, d.X);
  EXPECT_TRUE(bp.null_rejected);
  EXPECT_LT(bp.p_value, 1e-6);
}

TEST(BreuschPagan, ConstantSquaredResiduals) {
  // residuals of +-1 in a balanced design
  const auto X = line_design({0, 0, 1, 1, 2, 2});
  const auto fit = ols_fit(X, vec({1, -1, 2, 0, 3, 1}));
  ASSERT_LT((fit.residuals.array().abs() - 1.0).abs().maxCoeff(), 1e-12);
  const auto bp = breusch_pagan(fit, X);
  EXPECT_NEAR(bp.statistic, 0.0, 1e-9);
  EXPECT_NEAR(bp.p_value, 1.0, 1e-9);
  EXPECT_FALSE(bp.null_rejected);
}

TEST(AndersonDarling, NormalSamplesAccepted) {
  int accepted = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    gen::Rng r(1000 + s);
    accepted += !anderson_darling(gen::normal_vec(r, 5000, 2.0, 3.0)).null_rejected;
  }
  EXPECT_GE(accepted, 90);
}

TEST(AndersonDarling, UniformSamplesRejected) {
  gen::Rng r(5);
  const auto d = anderson_darling(gen::uniform_vec(r, 5000));
  EXPECT_TRUE(d.null_rejected);
  EXPECT_LT(d.p_value, 1e-6);
}

TEST(AndersonDarling, NeedsEightPoints) {
  EXPECT_THROW((void)anderson_darling({1, 2, 3, 4, 5, 6, 7}), std::invalid_argument);
  EXPECT_NO_THROW((void)anderson_darling({1, 2, 3, 4, 5, 6, 7, 9}));
  EXPECT_THROW((void)anderson_darling(std::vector<double>(10, 1.0)), DegenerateInferenceError);
}

// ---- energy ----

TEST(Energy, ConstantTenWatts) {
  std::vector<std::pair<double, double>> s;
  for (int t = 0; t < 10; ++t) s.emplace_back(t, 10.0);
  EXPECT_NEAR(trapezoid_energy(s), 90.0, 1e-12);
}

TEST(Energy, LinearRamp) {
  std::vector<std::pair<double, double>> s;
  for (int t = 0; t <= 10; ++t) s.emplace_back(t, t);
  EXPECT_NEAR(trapezoid_energy(s), 50.0, 1e-12);
}

TEST(Energy, RejectsUnsortedOrTinyInput) {
  const std::vector<std::pair<double, double>> bad = {{0, 1}, {2, 1}, {1, 1}};
  EXPECT_THROW((void)trapezoid_energy(bad), std::invalid_argument);
  const std::vector<std::pair<double, double>> dup = {{0, 1}, {0, 1}};
  EXPECT_THROW((void)trapezoid_energy(dup), std::invalid_argument);
  const std::vector<std::pair<double, double>> one = {{0, 1}};
  EXPECT_THROW((void)trapezoid_energy(one), std::invalid_argument);
}

// ---- campaign analysis ----

TEST(Analyze, ThreeRunsFillEverySection) {
  std::vector<orchestrator::RunArtifact> runs;
  for (int k = 0; k < 3; ++k) runs.push_back(fixtures::planted_artifact(100 + k, 0.01, k));
  const auto a = analyze_campaign(runs);
  EXPECT_EQ(a.runs, 3u);
  EXPECT_EQ(a.antipattern, "the-ramp");
  EXPECT_EQ(a.pooled_rows, 3u * 180u);
  EXPECT_EQ(a.descriptive.size(), 6u);
  EXPECT_EQ(a.correlations.size(), 4u);
  EXPECT_FALSE(a.cpu.error);
  EXPECT_FALSE(a.dram.error);
  EXPECT_TRUE(a.cpu.breusch_pagan && a.cpu.anderson_darling);
  ASSERT_EQ(a.energy.size(), 3u);
  EXPECT_TRUE(a.energy[0].cpu_j && a.energy[0].dram_j);
  EXPECT_EQ(a.validity.size(), 3u);
  EXPECT_EQ(a.timelines.size(), 3u);
  EXPECT_EQ(a.timelines[0].rows.size(), 300u);
  EXPECT_EQ(a.cpu.rt.decision, Decision::reject_up);
  EXPECT_NEAR(a.cpu.rt.beta, 0.01, 0.002);
}

TEST(Analyze, NullEffectKeepsMostSeeds) {
  int keeps = 0;
  for (int s = 0; s < 40; ++s) {
    std::vector<orchestrator::RunArtifact> runs;
    for (int k = 0; k < 3; ++k) runs.push_back(fixtures::planted_artifact(5000 + 10 * s + k, 0.0, k));
    keeps += analyze_campaign(runs).cpu.rt.decision == Decision::keep;
  }
  EXPECT_GE(keeps, 36);
}

TEST(Analyze, FailedAndShortRunsAreSkipped) {
  std::vector<orchestrator::RunArtifact> runs;
  runs.push_back(fixtures::planted_artifact(1, 0.0, 0));
  auto failed = fixtures::planted_artifact(2, 0.0, 1);
  failed.meta["status"] = "failed";
  runs.push_back(failed);
  runs.push_back(fixtures::planted_artifact(3, 0.0, 2, 100));  // shorter than the warm-up
  const auto a = analyze_campaign(runs);
  EXPECT_EQ(a.runs, 1u);
  EXPECT_EQ(a.skipped.size(), 2u);
  EXPECT_THROW((void)analyze_campaign({failed}), std::runtime_error);
}

TEST(Analyze, EnergyCoversTheWholeTrace) {
  fixtures::TraceSpec s;
  s.seconds = 300;
  const auto a = analyze_campaign({fixtures::synthetic_artifact(s)}, {.warmup_s = 120});
  ASSERT_TRUE(a.energy[0].cpu_j);
  EXPECT_NEAR(*a.energy[0].cpu_j, 10.0 * 299, 1e-9);
  EXPECT_NEAR(*a.energy[0].dram_j, 0.5 * 299, 1e-9);
}
