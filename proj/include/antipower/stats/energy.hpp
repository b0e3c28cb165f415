#pragma once

#include <span>
#include <stdexcept>
#include <utility>

namespace antipower::stats {

// Joules from (t_s, watts) samples by the trapezoid rule.
inline double trapezoid_energy(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 2) throw std::invalid_argument("trapezoid_energy: need at least 2 samples");
  double e = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double dt = samples[i].first - samples[i - 1].first;
    if (!(dt > 0.0)) throw std::invalid_argument("trapezoid_energy: timestamps must strictly increase");
    e += 0.5 * (samples[i - 1].second + samples[i].second) * dt;
  }
  return e;
}

}  // namespace antipower::stats
