#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "antipower/common/error.hpp"
#include "antipower/workload/kind.hpp"

namespace antipower::workload {

// Tuning knobs for one antipattern service. `iterations` means something
// different per kind (hash rounds, math-loop steps, allocation rounds...);
// see the handler for each kind.
struct WorkloadConfig {
  AntipatternKind kind = AntipatternKind::TheRamp;
  std::uint64_t iterations = 1;
  std::uint64_t payload_size = 256;
  std::uint64_t worker_count = 64;       // MoreIsLess
  double window_period_s = 60.0;         // TrafficJam
  double heavy_fraction = 0.25;          // TrafficJam, in (0, 1)
  std::uint64_t dataset_seed = 1;
  std::uint64_t dataset_scale = 1;
  std::uint64_t page_size = 10;          // SisyphusRetrieval
  std::uint64_t recent_orders = 5;       // CircuitousTreasureHunt
  std::uint64_t lookup_cost_us = 1000;   // fixed CPU cost of one fixture lookup
  std::uint64_t session_open_cost_us = 2000;  // GodClass fresh-session cost
  std::uint64_t max_store_items = 10'000'000;  // Ramp / Unbalanced growth guard

  void validate() const {
    auto positive = [](std::uint64_t v, const char* name) {
      if (v < 1) throw UsageError(std::string(name) + " must be >= 1");
    };
    positive(worker_count, "worker_count");
    positive(dataset_scale, "dataset_scale");
    positive(page_size, "page_size");
    positive(recent_orders, "recent_orders");
    positive(max_store_items, "max_store_items");
    positive(payload_size, "payload_size");
    if (!(heavy_fraction > 0.0 && heavy_fraction < 1.0))
      throw UsageError("heavy_fraction must lie strictly between 0 and 1");
    if (!(window_period_s > 0.0)) throw UsageError("window_period_s must be positive");
  }
};

// Defaults sized so a single request takes tens to hundreds of milliseconds
// on a desktop core; `calibrate` rescales them for the actual host.
inline WorkloadConfig default_config(AntipatternKind kind) {
  WorkloadConfig c;
  c.kind = kind;
  switch (kind) {
    case AntipatternKind::UnbalancedProcessing:
      c.iterations = 600;
      c.payload_size = 4096;
      break;
    case AntipatternKind::UnnecessaryProcessing:
      c.iterations = 600'000;
      break;
    case AntipatternKind::TheRamp:
      c.iterations = 1;
      c.payload_size = 256;
      break;
    case AntipatternKind::SisyphusRetrieval:
      c.iterations = 1;
      break;
    case AntipatternKind::MoreIsLess:
      c.iterations = 20'000'000;
      c.worker_count = 64;
      break;
    case AntipatternKind::GodClass:
      c.iterations = 100'000;
      break;
    case AntipatternKind::ExcessiveDynamicAllocation:
      c.iterations = 300;
      break;
    case AntipatternKind::CircuitousTreasureHunt:
      c.iterations = 1;
      break;
    case AntipatternKind::OneLaneBridge:
      c.iterations = 150'000;
      break;
    case AntipatternKind::TrafficJam:
      c.iterations = 40'000;
      break;
  }
  return c;
}

inline nlohmann::json to_json(const WorkloadConfig& c) {
  return {
      {"antipattern", std::string(slug(c.kind))},
      {"iterations", c.iterations},
      {"payload_size", c.payload_size},
      {"worker_count", c.worker_count},
      {"window_period_s", c.window_period_s},
      {"heavy_fraction", c.heavy_fraction},
      {"dataset_seed", c.dataset_seed},
      {"dataset_scale", c.dataset_scale},
      {"page_size", c.page_size},
      {"recent_orders", c.recent_orders},
      {"lookup_cost_us", c.lookup_cost_us},
      {"session_open_cost_us", c.session_open_cost_us},
      {"max_store_items", c.max_store_items},
  };
}

// Inverse of to_json. Missing keys keep the kind's defaults.
inline WorkloadConfig config_from_json(const nlohmann::json& j) {
  WorkloadConfig c = default_config(require_kind(j.at("antipattern").get<std::string>()));
  c.iterations = j.value("iterations", c.iterations);
  c.payload_size = j.value("payload_size", c.payload_size);
  c.worker_count = j.value("worker_count", c.worker_count);
  c.window_period_s = j.value("window_period_s", c.window_period_s);
  c.heavy_fraction = j.value("heavy_fraction", c.heavy_fraction);
  c.dataset_seed = j.value("dataset_seed", c.dataset_seed);
  c.dataset_scale = j.value("dataset_scale", c.dataset_scale);
  c.page_size = j.value("page_size", c.page_size);
  c.recent_orders = j.value("recent_orders", c.recent_orders);
  c.lookup_cost_us = j.value("lookup_cost_us", c.lookup_cost_us);
  c.session_open_cost_us = j.value("session_open_cost_us", c.session_open_cost_us);
  c.max_store_items = j.value("max_store_items", c.max_store_items);
  c.validate();
  return c;
}

}  // namespace antipower::workload
