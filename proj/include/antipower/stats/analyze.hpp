#pragma once

// Whole-campaign analysis: pooled steady-state rows, descriptive statistics,
// correlations, both power regressions with inference on rt, residual
// diagnostics, energies and per-run validity.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "antipower/orchestrator/artifact.hpp"
#include "antipower/orchestrator/validity.hpp"
#include "antipower/stats/align.hpp"
#include "antipower/stats/correlation.hpp"
#include "antipower/stats/descriptive.hpp"
#include "antipower/stats/diagnostics.hpp"
#include "antipower/stats/energy.hpp"
#include "antipower/stats/inference.hpp"
#include "antipower/stats/ols.hpp"

namespace antipower::stats {

struct AnalysisOptions {
  double warmup_s = 120.0;
  UtilScope util_scope = UtilScope::process;
  double alpha = default_alpha;
};

struct MetricSummary {
  std::string metric;
  Descriptive stats;
};

struct CorrelationRow {
  std::string power;  // cpu_power_w | dram_power_w
  std::string level;  // pooled | per_run
  CorrelationPair pair;
};

struct ModelResult {
  PowerModel model = PowerModel::cpu;
  std::optional<std::string> error;  // set when the model could not be fitted
  std::vector<std::string> warnings;
  std::size_t n = 0;
  std::size_t p = 0;
  double r2 = 0.0;
  std::vector<std::string> names;
  std::vector<double> beta;
  CoefficientInference rt;
  std::optional<DiagnosticResult> breusch_pagan;
  std::optional<DiagnosticResult> anderson_darling;
};

struct RunEnergy {
  int repetition = 0;
  std::optional<double> cpu_j;
  std::optional<double> dram_j;
};

struct TimelineRow {
  std::int64_t t_s = 0;
  double t_rel_s = 0.0;
  std::optional<double> rt_ms;
  std::uint64_t req_rate = 0;
  std::uint64_t failures = 0;
  std::optional<double> cpu_util;
  std::optional<double> cpu_power_w;
  std::optional<double> dram_power_w;
};

struct RunTimeline {
  int repetition = 0;
  std::vector<TimelineRow> rows;
};

struct SkippedRun {
  int repetition = 0;
  std::string reason;
};

struct CampaignAnalysis {
  std::string antipattern;
  AnalysisOptions options;
  std::size_t runs = 0;
  std::size_t pooled_rows = 0;
  std::vector<MetricSummary> descriptive;
  std::vector<CorrelationRow> correlations;
  ModelResult cpu;
  ModelResult dram;
  std::vector<RunEnergy> energy;
  std::vector<orchestrator::ValidityReport> validity;
  std::vector<RunTimeline> timelines;
  std::vector<SkippedRun> skipped;
};

inline ModelResult fit_model(const std::vector<AlignedRow>& rows, PowerModel m, double alpha) {
  ModelResult r;
  r.model = m;
  r.names = design_columns(m);
  try {
    const auto d = assemble_design(rows, m);
    r.warnings = d.warnings;
    const auto fit = ols_fit(d.X, d.y, d.names);
    const auto V = hc3_covariance(fit, d.X);
    r.n = fit.n;
    r.p = fit.p;
    r.r2 = fit.r2;
    r.beta.assign(fit.beta.data(), fit.beta.data() + fit.beta.size());
    r.rt = infer_coefficient(fit, V, rt_column, alpha);
    r.breusch_pagan = breusch_pagan(fit, d.X, alpha);
    if (fit.n >= 8) {
      std::vector<double> e(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
      try {
        r.anderson_darling = anderson_darling(std::move(e), alpha);
      } catch (const std::exception& ex) {
        r.warnings.push_back(std::string("Anderson-Darling skipped: ") + ex.what());
      }
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

namespace detail {

inline std::optional<double> energy_of(const std::vector<telemetry::PowerSample>& power, bool dram) {
  std::vector<std::pair<double, double>> s;
  for (const auto& p : power) {
    if (p.cpu_power_w < 0.0) continue;
    if (dram) {
      if (!p.dram_power_w) return std::nullopt;
      if (*p.dram_power_w < 0.0) continue;
    }
    s.emplace_back(static_cast<double>(p.t_s), dram ? *p.dram_power_w : p.cpu_power_w);
  }
  if (s.size() < 2) return std::nullopt;
  return trapezoid_energy(s);
}

inline RunTimeline timeline_of(const orchestrator::RunArtifact& a) {
  std::map<std::int64_t, TimelineRow> rows;
  auto row = [&](std::int64_t t) -> TimelineRow& {
    auto& r = rows[t];
    r.t_s = t;
    return r;
  };
  for (const auto& b : load::bin_throughput(a.requests)) row(b.t_s).req_rate = b.count;
  for (const auto& b : load::bin_failures(a.requests)) row(b.t_s).failures = b.count;
  for (const auto& b : load::bin_response_time(a.requests)) row(b.t_s).rt_ms = b.mean_ms;
  for (const auto& s : a.resources) row(s.t_s).cpu_util = s.cpu_util;
  for (const auto& p : a.power) {
    row(p.t_s).cpu_power_w = p.cpu_power_w;
    row(p.t_s).dram_power_w = p.dram_power_w;
  }
  RunTimeline tl;
  tl.repetition = a.repetition();
  double origin = 0.0;
  try {
    origin = static_cast<double>(a.origin_ms()) / 1000.0;
  } catch (const std::exception&) {
  }
  for (auto& [t, r] : rows) {
    r.t_rel_s = static_cast<double>(t) - origin;
    tl.rows.push_back(r);
  }
  return tl;
}

template <typename F>
std::optional<Descriptive> describe(const std::vector<AlignedRow>& rows, F get) {
  std::vector<double> v;
  for (const auto& r : rows)
    if (auto x = get(r)) v.push_back(*x);
  if (v.empty()) return std::nullopt;
  return descriptive(v);
}

}  // namespace detail

inline CampaignAnalysis analyze_campaign(const std::vector<orchestrator::RunArtifact>& artifacts,
                                         const AnalysisOptions& opt = {}) {
  CampaignAnalysis out;
  out.options = opt;
  std::vector<AlignedRow> pooled;
  struct RunMeans {
    double cpu = 0, dram = 0, rt = 0;
    bool has_dram = true;
  };
  std::vector<RunMeans> run_means;

  for (const auto& a : artifacts) {
    if (!a.ok()) {
      out.skipped.push_back({a.repetition(), "trial marked failed"});
      continue;
    }
    if (out.antipattern.empty() && a.meta.contains("plan"))
      out.antipattern = a.meta["plan"]["workload"].value("antipattern", std::string{});
    AlignedTable table;
    try {
      table = align(orchestrator::trim_warmup(a, opt.warmup_s), opt.util_scope);
    } catch (const std::exception& e) {
      out.skipped.push_back({a.repetition(), e.what()});
      continue;
    }
    ++out.runs;
    out.validity.push_back(orchestrator::validity_check(a, opt.warmup_s));
    out.energy.push_back({a.repetition(), detail::energy_of(a.power, false), detail::energy_of(a.power, true)});
    out.timelines.push_back(detail::timeline_of(a));

    RunMeans m;
    std::size_t k = 0;
    for (const auto& r : table.rows) {
      if (!r.rt_ms) continue;
      m.cpu += r.cpu_power_w;
      m.rt += *r.rt_ms;
      if (r.dram_power_w) m.dram += *r.dram_power_w;
      else m.has_dram = false;
      ++k;
    }
    if (k) {
      m.cpu /= static_cast<double>(k);
      m.rt /= static_cast<double>(k);
      m.dram /= static_cast<double>(k);
      run_means.push_back(m);
    }
    pooled.insert(pooled.end(), table.rows.begin(), table.rows.end());
  }
  if (out.runs == 0) throw std::runtime_error("no valid artifact to analyze");
  out.pooled_rows = pooled.size();

  auto add_metric = [&](const char* name, auto get) {
    if (auto d = detail::describe(pooled, get)) out.descriptive.push_back({name, *d});
  };
  add_metric("cpu_power_w", [](const AlignedRow& r) { return std::optional<double>(r.cpu_power_w); });
  add_metric("dram_power_w", [](const AlignedRow& r) { return r.dram_power_w; });
  add_metric("rt_ms", [](const AlignedRow& r) { return r.rt_ms; });
  add_metric("req_rate", [](const AlignedRow& r) { return std::optional<double>(r.req_rate); });
  add_metric("cpu_util", [](const AlignedRow& r) { return r.cpu_util; });
  add_metric("memory_bytes", [](const AlignedRow& r) { return r.memory_bytes; });

  for (const bool dram : {false, true}) {
    std::vector<double> x, y;
    for (const auto& r : pooled) {
      if (!r.rt_ms || (dram && !r.dram_power_w)) continue;
      x.push_back(*r.rt_ms);
      y.push_back(dram ? *r.dram_power_w : r.cpu_power_w);
    }
    const char* name = dram ? "dram_power_w" : "cpu_power_w";
    out.correlations.push_back({name, "pooled", correlate(x, y)});
    std::vector<double> rx, ry;
    for (const auto& m : run_means) {
      if (dram && !m.has_dram) continue;
      rx.push_back(m.rt);
      ry.push_back(dram ? m.dram : m.cpu);
    }
    out.correlations.push_back({name, "per_run", correlate(rx, ry)});
  }

  out.cpu = fit_model(pooled, PowerModel::cpu, opt.alpha);
  out.dram = fit_model(pooled, PowerModel::dram, opt.alpha);
  return out;
}

}  // namespace antipower::stats
