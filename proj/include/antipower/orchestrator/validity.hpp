#pragma once

#include <cstdint>
#include <optional>

#include <nlohmann/json.hpp>

#include "antipower/orchestrator/artifact.hpp"

namespace antipower::orchestrator {

// CPU floor, as a fraction of total host capacity, on the reference 4-core
// host. It stands for a fixed amount of work (0.3 of one core), so other
// core counts rescale it.
inline constexpr double cpu_floor_reference = 0.075;
inline constexpr unsigned cpu_floor_reference_cores = 4;

inline double cpu_floor_threshold(unsigned core_count) {
  return cpu_floor_reference * cpu_floor_reference_cores / static_cast<double>(core_count ? core_count : 1);
}

struct ValidityReport {
  int repetition = -1;
  std::uint64_t requests = 0;
  std::uint64_t failures = 0;
  bool zero_failures = false;
  std::optional<double> mean_cpu_util;  // post warm-up, process scope
  double cpu_floor_threshold = 0.0;
  bool cpu_floor = false;
};

// Rules for a trustworthy run: no failed requests at all, and the service
// kept the CPU at least minimally busy after warm-up.
inline ValidityReport validity_check(const RunArtifact& a, double warmup_s = 0.0) {
  ValidityReport r;
  r.repetition = a.repetition();
  r.requests = a.requests.size();
  for (const auto& q : a.requests)
    if (!q.success) ++r.failures;
  r.zero_failures = r.failures == 0;

  std::vector<telemetry::ResourceSample> samples;
  try {
    samples = trim_warmup(a, warmup_s).resources;
  } catch (const std::exception&) {
    samples = a.resources;  // too short to trim; judge the whole run
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples)
    if (s.cpu_util) {
      sum += *s.cpu_util;
      ++n;
    }
  if (n) r.mean_cpu_util = sum / static_cast<double>(n);
  r.cpu_floor_threshold = cpu_floor_threshold(a.core_count());
  r.cpu_floor = r.mean_cpu_util && *r.mean_cpu_util >= r.cpu_floor_threshold;
  return r;
}

inline nlohmann::json to_json(const ValidityReport& r) {
  return {{"repetition", r.repetition},
          {"requests", r.requests},
          {"failures", r.failures},
          {"zero_failures", r.zero_failures},
          {"mean_cpu_util", r.mean_cpu_util ? nlohmann::json(*r.mean_cpu_util) : nlohmann::json()},
          {"cpu_floor_threshold", r.cpu_floor_threshold},
          {"cpu_floor", r.cpu_floor}};
}

}  // namespace antipower::orchestrator
