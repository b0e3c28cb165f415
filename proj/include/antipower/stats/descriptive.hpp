#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>

namespace antipower::stats {

struct Descriptive {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

inline Descriptive descriptive(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("descriptive statistics of an empty series");
  Descriptive d;
  d.n = x.size();
  d.min = d.max = x[0];
  // two-pass mean keeps min <= mean <= max under rounding
  double sum = 0.0;
  for (double v : x) {
    sum += v;
    d.min = std::min(d.min, v);
    d.max = std::max(d.max, v);
  }
  double mean = sum / static_cast<double>(x.size());
  double corr = 0.0;
  for (double v : x) corr += v - mean;
  mean += corr / static_cast<double>(x.size());
  d.mean = std::clamp(mean, d.min, d.max);
  return d;
}

}  // namespace antipower::stats
