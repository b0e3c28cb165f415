#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "antipower/workload/handlers.hpp"

namespace antipower::workload {

// Whether `iterations` drives the per-request cost of this kind. The others
// are governed by dataset size (Sisyphus), lookup cost (Treasure Hunt) or
// accumulated state (The Ramp).
inline bool is_iteration_driven(AntipatternKind kind) {
  switch (kind) {
    case AntipatternKind::TheRamp:
    case AntipatternKind::SisyphusRetrieval:
    case AntipatternKind::CircuitousTreasureHunt:
      return false;
    default:
      return true;
  }
}

// Runs one request of `config.kind` against a scratch state and returns the
// server-side time in milliseconds.
inline double probe_once(const WorkloadConfig& config) {
  ServiceState scratch(config);
  switch (config.kind) {
    case AntipatternKind::UnbalancedProcessing:
      return handle_unbalanced_processing(scratch).server_elapsed_ms;
    case AntipatternKind::UnnecessaryProcessing:
      return handle_unnecessary_processing(scratch).server_elapsed_ms;
    case AntipatternKind::TheRamp:
      return handle_the_ramp(scratch).server_elapsed_ms;
    case AntipatternKind::SisyphusRetrieval:
      return handle_sisyphus_retrieval(scratch, 0, config.page_size).server_elapsed_ms;
    case AntipatternKind::MoreIsLess:
      return handle_more_is_less(scratch).server_elapsed_ms;
    case AntipatternKind::GodClass:
      return handle_god_class(scratch, R"({"customer_id":"C00001"})").server_elapsed_ms;
    case AntipatternKind::ExcessiveDynamicAllocation:
      return handle_excessive_dynamic_allocation(scratch).server_elapsed_ms;
    case AntipatternKind::CircuitousTreasureHunt:
      return handle_circuitous_treasure_hunt(scratch, "C00001").server_elapsed_ms;
    case AntipatternKind::OneLaneBridge:
      return handle_one_lane_bridge(scratch).server_elapsed_ms;
    case AntipatternKind::TrafficJam:
      return handle_traffic_jam(scratch, 0.0).server_elapsed_ms;  // normal window
  }
  return 0.0;
}

inline double probe_median(const WorkloadConfig& config, int runs = 3) {
  std::array<double, 7> t{};
  runs = std::clamp(runs, 1, 7);
  for (int i = 0; i < runs; ++i) t[static_cast<std::size_t>(i)] = probe_once(config);
  std::sort(t.begin(), t.begin() + runs);
  return t[static_cast<std::size_t>(runs / 2)];
}

struct CalibrationResult {
  bool applied = false;
  std::uint64_t iterations = 0;
  double predicted_ms = 0.0;
  std::string note;
};

// Rescales `config.iterations` so one request costs about `target_ms`.
// Fits cost = fixed + slope * iterations from two probe sizes.
inline CalibrationResult calibrate(WorkloadConfig& config, double target_ms) {
  CalibrationResult out;
  out.iterations = config.iterations;
  if (!is_iteration_driven(config.kind)) {
    out.note = std::string(slug(config.kind)) + ": cost is not iteration-driven, calibration skipped";
    return out;
  }
  if (!(target_ms > 0.0)) {
    out.note = "non-positive target, calibration skipped";
    return out;
  }
  WorkloadConfig probe = config;
  const std::uint64_t small = std::max<std::uint64_t>(1, config.iterations / 16);
  probe.iterations = small;
  const double t_small = probe_median(probe);
  probe.iterations = small * 2;
  const double t_large = probe_median(probe);
  const double slope = std::max((t_large - t_small) / static_cast<double>(small), 1e-9);
  const double fixed = std::max(0.0, t_small - slope * static_cast<double>(small));
  const double wanted = std::max(1.0, (target_ms - fixed) / slope);
  config.iterations = static_cast<std::uint64_t>(wanted);
  out.applied = true;
  out.iterations = config.iterations;
  out.predicted_ms = fixed + slope * wanted;
  out.note = "calibrated " + std::string(slug(config.kind)) + " to " +
             std::to_string(config.iterations) + " iterations";
  return out;
}

}  // namespace antipower::workload
