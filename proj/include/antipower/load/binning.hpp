#pragma once

// Wall-clock bins over request completions. Bins are aligned to multiples
// of `bin_s` epoch seconds and labelled by their start second, which lines
// them up with the 1 Hz telemetry stamps.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "antipower/common/clock.hpp"
#include "antipower/load/driver.hpp"

namespace antipower::load {

struct CountBin {
  std::int64_t t_s;
  std::uint64_t count;
};

struct MeanBin {
  std::int64_t t_s;
  std::optional<double> mean_ms;  // nullopt: nothing completed in this bin
};

namespace detail {

inline std::int64_t bin_of(const RequestRecord& r, std::int64_t bin_s) {
  const auto completion = static_cast<std::int64_t>(std::floor(r.completion_ms()));
  return floor_div(completion, bin_s * 1000) * bin_s;
}

inline void check_bin(std::int64_t bin_s) {
  if (bin_s < 1) throw std::invalid_argument("bin width must be >= 1 s");
}

template <typename Pred>
std::vector<CountBin> count_bins(const std::vector<RequestRecord>& records, std::int64_t bin_s,
                                 Pred include) {
  check_bin(bin_s);
  std::vector<CountBin> out;
  if (records.empty()) return out;
  std::int64_t lo = bin_of(records.front(), bin_s), hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, bin_of(r, bin_s));
    hi = std::max(hi, bin_of(r, bin_s));
  }
  for (std::int64_t t = lo; t <= hi; t += bin_s) out.push_back({t, 0});
  for (const auto& r : records)
    if (include(r)) ++out[static_cast<std::size_t>((bin_of(r, bin_s) - lo) / bin_s)].count;
  return out;
}

}  // namespace detail

// Completed requests per bin, every bin from first to last completion.
inline std::vector<CountBin> bin_throughput(const std::vector<RequestRecord>& records,
                                            std::int64_t bin_s = 1) {
  return detail::count_bins(records, bin_s, [](const RequestRecord&) { return true; });
}

inline std::vector<CountBin> bin_failures(const std::vector<RequestRecord>& records,
                                          std::int64_t bin_s = 1) {
  return detail::count_bins(records, bin_s, [](const RequestRecord& r) { return !r.success; });
}

// Mean response time of the successful requests completing in each bin.
// Failed requests are left out: a refused connection returns in ~0 ms and a
// timeout after the full timeout, neither of which is a service time.
inline std::vector<MeanBin> bin_response_time(const std::vector<RequestRecord>& records,
                                              std::int64_t bin_s = 1) {
  detail::check_bin(bin_s);
  std::vector<MeanBin> out;
  const auto counts = bin_throughput(records, bin_s);
  if (counts.empty()) return out;
  const std::int64_t lo = counts.front().t_s;
  std::vector<double> sum(counts.size(), 0.0);
  std::vector<std::uint64_t> n(counts.size(), 0);
  for (const auto& r : records) {
    if (!r.success) continue;
    const auto i = static_cast<std::size_t>((detail::bin_of(r, bin_s) - lo) / bin_s);
    sum[i] += r.response_time_ms;
    ++n[i];
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    out.push_back({counts[i].t_s, n[i] ? std::optional<double>(sum[i] / static_cast<double>(n[i]))
                                       : std::nullopt});
  return out;
}

}  // namespace antipower::load
