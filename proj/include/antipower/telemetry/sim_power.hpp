#pragma once

// Hardware-free power backend: a planted linear model plus Gaussian noise.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "antipower/telemetry/procfs.hpp"

namespace antipower::telemetry {

struct PowerSample {
  std::int64_t t_s = 0;
  double cpu_power_w = 0.0;
  std::optional<double> dram_power_w;  // host-wide; absent without a dram zone
};

struct SimPowerModel {
  double base_w = 5.0;
  double cpu_coeff_w = 60.0;  // W per unit of cpu_util (fraction of host)
  double rt_coeff = 0.0;      // W per ms of binned response time
  double noise_sd_w = 0.5;
  double dram_base_w = 0.3;
  double dram_rt_coeff = 0.0;
  double dram_noise_sd_w = 0.02;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(base_w > 0.0)) throw std::invalid_argument("sim base_w must be positive");
    if (noise_sd_w < 0.0 || dram_noise_sd_w < 0.0)
      throw std::invalid_argument("sim noise sd must be non-negative");
  }
};

inline nlohmann::json to_json(const SimPowerModel& m) {
  return {{"base_w", m.base_w},          {"cpu_coeff_w", m.cpu_coeff_w},
          {"rt_coeff", m.rt_coeff},      {"noise_sd_w", m.noise_sd_w},
          {"dram_base_w", m.dram_base_w}, {"dram_rt_coeff", m.dram_rt_coeff},
          {"dram_noise_sd_w", m.dram_noise_sd_w}, {"seed", m.seed}};
}

inline SimPowerModel sim_model_from_json(const nlohmann::json& j) {
  SimPowerModel m;
  m.base_w = j.value("base_w", m.base_w);
  m.cpu_coeff_w = j.value("cpu_coeff_w", m.cpu_coeff_w);
  m.rt_coeff = j.value("rt_coeff", m.rt_coeff);
  m.noise_sd_w = j.value("noise_sd_w", m.noise_sd_w);
  m.dram_base_w = j.value("dram_base_w", m.dram_base_w);
  m.dram_rt_coeff = j.value("dram_rt_coeff", m.dram_rt_coeff);
  m.dram_noise_sd_w = j.value("dram_noise_sd_w", m.dram_noise_sd_w);
  m.seed = j.value("seed", m.seed);
  return m;
}

namespace detail {

// SplitMix64 finalizer; decorrelates (seed, second) pairs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Power for second `t_s`. The noise depends only on (model.seed, t_s), so a
// trace can be regenerated from its inputs bit for bit.
inline PowerSample simulate_power(const SimPowerModel& model, const ResourceSample& resource,
                                  std::optional<double> rt_ms, std::int64_t t_s) {
  std::mt19937_64 rng(detail::mix64(model.seed ^ detail::mix64(static_cast<std::uint64_t>(t_s))));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double z_cpu = gauss(rng);
  const double z_dram = gauss(rng);
  const double util = resource.cpu_util.value_or(0.0);
  const double rt = rt_ms.value_or(0.0);
  PowerSample s;
  s.t_s = t_s;
  s.cpu_power_w = std::max(
      0.0, model.base_w + model.cpu_coeff_w * util + model.rt_coeff * rt + model.noise_sd_w * z_cpu);
  s.dram_power_w = std::max(0.0, model.dram_base_w + model.dram_rt_coeff * rt +
                                     model.dram_noise_sd_w * z_dram);
  return s;
}

}  // namespace antipower::telemetry
