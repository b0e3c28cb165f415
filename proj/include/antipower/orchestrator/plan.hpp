#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "antipower/common/error.hpp"
#include "antipower/load/plan.hpp"
#include "antipower/telemetry/sim_power.hpp"
#include "antipower/workload/config.hpp"

namespace antipower::orchestrator {

enum class PowerBackendKind { real, sim };

inline const char* to_string(PowerBackendKind b) { return b == PowerBackendKind::real ? "real" : "sim"; }

inline PowerBackendKind parse_backend(const std::string& s) {
  if (s == "real") return PowerBackendKind::real;
  if (s == "sim") return PowerBackendKind::sim;
  throw UsageError("unknown backend '" + s + "'; valid: real, sim");
}

struct ExperimentPlan {
  workload::WorkloadConfig workload;
  load::LoadPlan load;  // endpoint is filled in per trial
  double warmup_s = 120.0;
  double cooldown_s = 30.0;
  double settle_s = 10.0;
  int repetitions = 30;
  PowerBackendKind backend = PowerBackendKind::real;
  telemetry::SimPowerModel sim;
  std::filesystem::path out_dir = "campaign";

  // Executable providing `serve`; every trial launches a fresh copy.
  std::filesystem::path service_command;
  bool pin_core = true;
  std::uint64_t memory_limit_mb = 0;  // 0: no ceiling
  std::optional<double> calibrate_target_ms;
  double health_timeout_s = 60.0;
  // Rough per-trial cost of tearing down and relaunching, for estimates only.
  double relaunch_overhead_s = 10.0;

  // Called with the stage name as each trial stage begins; a throw fails the
  // trial at that stage. Used to inject faults.
  std::function<void(const std::string& stage)> stage_hook;

  void validate() const {
    workload.validate();
    load::LoadPlan probe = load;
    probe.validate();
    if (repetitions < 1) throw UsageError("repetitions must be >= 1");
    if (!(warmup_s >= 0.0)) throw UsageError("warm-up must be non-negative");
    if (!(warmup_s < load.duration_s))
      throw UsageError("warm-up must be shorter than the load duration");
    if (cooldown_s < 0.0 || settle_s < 0.0) throw UsageError("settle/cool-down must be non-negative");
    if (backend == PowerBackendKind::sim) sim.validate();
  }

  // Seconds one trial is expected to take.
  double trial_estimate_s() const { return relaunch_overhead_s + settle_s + load.duration_s + cooldown_s; }
  double campaign_estimate_s() const { return repetitions * trial_estimate_s(); }
};

// Full-scale protocol: 20-minute test phase, 120 s warm-up, 30 repetitions.
inline ExperimentPlan full_plan(workload::AntipatternKind kind) {
  ExperimentPlan p;
  p.workload = workload::default_config(kind);
  p.load.target_users = workload::default_users(kind);
  p.load.spawn_rate = 10.0;
  p.load.duration_s = 1200.0;
  return p;
}

// Minutes instead of days: 180 s runs, 30 s warm-up, 5 repetitions.
inline ExperimentPlan desk_plan(workload::AntipatternKind kind) {
  ExperimentPlan p = full_plan(kind);
  p.load.duration_s = 180.0;
  p.warmup_s = 30.0;
  p.repetitions = 5;
  return p;
}

inline nlohmann::json to_json(const ExperimentPlan& p) {
  nlohmann::json j = {{"workload", workload::to_json(p.workload)},
                      {"load", load::to_json(p.load)},
                      {"warmup_s", p.warmup_s},
                      {"cooldown_s", p.cooldown_s},
                      {"settle_s", p.settle_s},
                      {"repetitions", p.repetitions},
                      {"backend", to_string(p.backend)},
                      {"pin_core", p.pin_core},
                      {"memory_limit_mb", p.memory_limit_mb}};
  if (p.backend == PowerBackendKind::sim) j["sim_model"] = telemetry::to_json(p.sim);
  if (p.calibrate_target_ms) j["calibrate_target_ms"] = *p.calibrate_target_ms;
  return j;
}

}  // namespace antipower::orchestrator
