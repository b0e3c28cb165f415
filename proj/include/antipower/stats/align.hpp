#pragma once

// Per-second join of power, resources and request bins, and the regression
// designs built from it.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "antipower/load/binning.hpp"
#include "antipower/orchestrator/artifact.hpp"
#include "antipower/stats/ols.hpp"

namespace antipower::stats {

enum class UtilScope { process, host };

inline const char* to_string(UtilScope s) { return s == UtilScope::process ? "process" : "host"; }

struct AlignedRow {
  std::int64_t t = 0;
  double cpu_power_w = 0.0;
  std::optional<double> dram_power_w;
  std::optional<double> rt_ms;  // mean of successful completions in the second
  double req_rate = 0.0;        // completions in the second
  std::uint64_t failures = 0;
  std::optional<double> cpu_util;
  std::optional<double> memory_bytes;
};

struct AlignedTable {
  std::vector<AlignedRow> rows;  // strictly increasing t
};

// Seconds present in both the power and the resource trace. Negative power
// readings are dropped; seconds without completed requests keep rt empty.
inline AlignedTable align(const std::vector<load::RequestRecord>& requests,
                          const std::vector<telemetry::PowerSample>& power,
                          const std::vector<telemetry::ResourceSample>& resources,
                          UtilScope scope = UtilScope::process) {
  std::map<std::int64_t, const telemetry::ResourceSample*> res;
  for (const auto& r : resources) res[r.t_s] = &r;
  std::map<std::int64_t, std::uint64_t> rate, failures;
  for (const auto& b : load::bin_throughput(requests)) rate[b.t_s] = b.count;
  for (const auto& b : load::bin_failures(requests)) failures[b.t_s] = b.count;
  std::map<std::int64_t, double> rt;
  for (const auto& b : load::bin_response_time(requests))
    if (b.mean_ms) rt[b.t_s] = *b.mean_ms;

  std::map<std::int64_t, AlignedRow> rows;
  for (const auto& p : power) {
    if (p.cpu_power_w < 0.0 || (p.dram_power_w && *p.dram_power_w < 0.0)) continue;
    auto it = res.find(p.t_s);
    if (it == res.end()) continue;
    AlignedRow row;
    row.t = p.t_s;
    row.cpu_power_w = p.cpu_power_w;
    row.dram_power_w = p.dram_power_w;
    if (auto r = rt.find(p.t_s); r != rt.end()) row.rt_ms = r->second;
    if (auto r = rate.find(p.t_s); r != rate.end()) row.req_rate = static_cast<double>(r->second);
    if (auto f = failures.find(p.t_s); f != failures.end()) row.failures = f->second;
    row.cpu_util = scope == UtilScope::process ? it->second->cpu_util : it->second->host_cpu_util;
    if (it->second->memory_bytes) row.memory_bytes = static_cast<double>(*it->second->memory_bytes);
    rows[p.t_s] = row;  // a repeated stamp keeps the later reading
  }
  if (rows.empty())
    throw std::runtime_error("no second has both a power and a resource sample after exclusions");
  AlignedTable t;
  for (auto& [_, r] : rows) t.rows.push_back(r);
  return t;
}

inline AlignedTable align(const orchestrator::TrimmedView& v, UtilScope scope = UtilScope::process) {
  return align(v.requests, v.power, v.resources, scope);
}

enum class PowerModel { cpu, dram };

inline const char* to_string(PowerModel m) { return m == PowerModel::cpu ? "cpu" : "dram"; }

// Column 1 is always rt_ms.
inline std::vector<std::string> design_columns(PowerModel m) {
  if (m == PowerModel::cpu) return {"intercept", "rt_ms", "req_rate", "cpu_util"};
  return {"intercept", "rt_ms", "req_rate", "cpu_util", "memory_bytes"};
}

inline constexpr std::size_t rt_column = 1;

// Rows usable by the model: power, rt and every predictor present.
inline bool usable(const AlignedRow& r, PowerModel m) {
  if (!r.rt_ms || !r.cpu_util) return false;
  if (m == PowerModel::dram) return r.dram_power_w.has_value() && r.memory_bytes.has_value();
  return true;
}

struct Design {
  Matrix X;
  Vector y;
  std::vector<std::string> names;
  std::vector<std::int64_t> t;
  std::vector<std::string> warnings;
};

inline Design assemble_design(const std::vector<AlignedRow>& rows, PowerModel m) {
  std::vector<const AlignedRow*> use;
  for (const auto& r : rows)
    if (usable(r, m)) use.push_back(&r);
  if (use.empty())
    throw std::invalid_argument(std::string("no usable rows for the ") + to_string(m) + " model");
  Design d;
  d.names = design_columns(m);
  const auto n = static_cast<Eigen::Index>(use.size());
  const auto p = static_cast<Eigen::Index>(d.names.size());
  d.X.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = *use[static_cast<std::size_t>(i)];
    d.t.push_back(r.t);
    d.y(i) = m == PowerModel::cpu ? r.cpu_power_w : *r.dram_power_w;
    d.X(i, 0) = 1.0;
    d.X(i, 1) = *r.rt_ms;
    d.X(i, 2) = r.req_rate;
    d.X(i, 3) = *r.cpu_util;
    if (m == PowerModel::dram) d.X(i, 4) = *r.memory_bytes;
  }
  for (Eigen::Index j = 1; j < p; ++j)
    if ((d.X.col(j).array() == d.X(0, j)).all())
      d.warnings.push_back("predictor '" + d.names[static_cast<std::size_t>(j)] +
                           "' is constant; the design is singular");
  return d;
}

inline Design assemble_design(const AlignedTable& t, PowerModel m) { return assemble_design(t.rows, m); }

}  // namespace antipower::stats
