#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "antipower/common/error.hpp"

namespace antipower::load {

// Closed-loop workload shape: `target_users` virtual users spawned at
// `spawn_rate` users per second, each looping request -> reply -> think.
struct LoadPlan {
  int target_users = 1;
  double spawn_rate = 10.0;  // users per second
  double duration_s = 60.0;
  std::string endpoint = "http://127.0.0.1:8080/healthz";
  double think_time_ms = 0.0;
  double timeout_s = 60.0;

  double ramp_up_s() const { return target_users / spawn_rate; }

  void validate() const {
    if (target_users < 1) throw UsageError("target_users must be >= 1");
    if (!(spawn_rate > 0.0)) throw UsageError("spawn_rate must be positive");
    if (!(duration_s > 0.0)) throw UsageError("duration must be positive");
    if (!(ramp_up_s() < duration_s))
      throw UsageError("ramp-up (users / spawn rate) must finish before the run ends");
    if (think_time_ms < 0.0) throw UsageError("think time must be non-negative");
    if (!(timeout_s > 0.0)) throw UsageError("timeout must be positive");
    if (endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0)
      throw UsageError("endpoint must be an http:// or https:// URL");
  }
};

inline nlohmann::json to_json(const LoadPlan& p) {
  return {{"target_users", p.target_users}, {"spawn_rate", p.spawn_rate},
          {"duration_s", p.duration_s},     {"endpoint", p.endpoint},
          {"think_time_ms", p.think_time_ms}, {"timeout_s", p.timeout_s}};
}

inline LoadPlan load_plan_from_json(const nlohmann::json& j) {
  LoadPlan p;
  p.target_users = j.at("target_users").get<int>();
  p.spawn_rate = j.at("spawn_rate").get<double>();
  p.duration_s = j.at("duration_s").get<double>();
  p.endpoint = j.at("endpoint").get<std::string>();
  p.think_time_ms = j.value("think_time_ms", 0.0);
  p.timeout_s = j.value("timeout_s", 60.0);
  return p;
}

// Start offset (ms after run start) of each user. Users are spawned evenly,
// one every 1/spawn_rate seconds, so user i starts within second
// floor(i / spawn_rate).
inline std::vector<std::int64_t> spawn_schedule(const LoadPlan& plan) {
  plan.validate();
  std::vector<std::int64_t> offsets;
  offsets.reserve(static_cast<std::size_t>(plan.target_users));
  for (int i = 0; i < plan.target_users; ++i)
    offsets.push_back(static_cast<std::int64_t>(static_cast<double>(i) * 1000.0 / plan.spawn_rate));
  return offsets;
}

}  // namespace antipower::load
