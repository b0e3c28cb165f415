#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unistd.h>

#include "antipower/orchestrator/artifact.hpp"

namespace fixtures {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("antipower-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

struct TraceSpec {
  std::int64_t origin_s = 1'700'000'000;
  int seconds = 300;
  int requests_per_second = 10;
  double rt_ms = 40.0;
  double cpu_util = 0.2;
  unsigned cores = 4;
  // Per-second overrides, given the offset from the origin.
  std::function<double(int)> power_at = [](int) { return 10.0; };
  std::function<double(int)> rt_at;
  std::function<bool(int, int)> fails;  // (second, index) -> request failed
};

// A well-formed, successful artifact held in memory.
inline antipower::orchestrator::RunArtifact synthetic_artifact(const TraceSpec& s, int repetition = 1) {
  antipower::orchestrator::RunArtifact a;
  a.dir = "synthetic";
  a.meta = {{"status", "ok"},
            {"repetition", repetition},
            {"load_start_ms", s.origin_s * 1000},
            {"load_end_ms", (s.origin_s + s.seconds) * 1000},
            {"host", {{"core_count", s.cores}}}};
  for (int k = 0; k < s.seconds; ++k) {
    const std::int64_t t = s.origin_s + k;
    const double rt = s.rt_at ? s.rt_at(k) : s.rt_ms;
    for (int i = 0; i < s.requests_per_second; ++i) {
      antipower::load::RequestRecord r;
      // spread completions across the second, all inside it
      const double completion = static_cast<double>(t * 1000) + (1000.0 * (i + 0.5)) / s.requests_per_second;
      r.start_ms = static_cast<std::int64_t>(std::floor(completion - rt));
      r.response_time_ms = completion - static_cast<double>(r.start_ms);
      r.success = !(s.fails && s.fails(k, i));
      r.user_id = i;
      a.requests.push_back(r);
    }
    antipower::telemetry::PowerSample p;
    p.t_s = t;
    p.cpu_power_w = s.power_at(k);
    p.dram_power_w = 0.5;
    a.power.push_back(p);
    antipower::telemetry::ResourceSample rs;
    rs.t_s = t;
    rs.cpu_util = s.cpu_util;
    rs.memory_bytes = 100'000'000 + static_cast<std::uint64_t>(k) * 1000;
    rs.host_cpu_util = s.cpu_util;
    a.resources.push_back(rs);
  }
  return a;
}

// A successful run whose cpu power follows 5 + 60 util + rt_coeff * rt plus
// gaussian noise, with rate, util and memory varying second to second.
inline antipower::orchestrator::RunArtifact planted_artifact(std::uint64_t seed, double rt_coeff, int repetition,
                                                              int seconds = 300, double noise_sd = 0.5) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  antipower::orchestrator::RunArtifact a;
  a.dir = "planted";
  const std::int64_t origin = 1'700'000'000 + 10'000 * repetition;
  a.meta = {{"status", "ok"},
            {"repetition", repetition},
            {"load_start_ms", origin * 1000},
            {"load_end_ms", (origin + seconds) * 1000},
            {"host", {{"core_count", 4}}},
            {"plan", {{"workload", {{"antipattern", "the-ramp"}}}}}};
  for (int k = 0; k < seconds; ++k) {
    const std::int64_t t = origin + k;
    const int n = 5 + static_cast<int>(u(eng) * 10);
    const double rt = 20.0 + 180.0 * u(eng);
    double rt_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      antipower::load::RequestRecord r;
      const double completion = static_cast<double>(t * 1000) + (1000.0 * (i + 0.5)) / n;
      r.start_ms = static_cast<std::int64_t>(std::floor(completion - rt));
      r.response_time_ms = completion - static_cast<double>(r.start_ms);
      r.success = true;
      r.user_id = i;
      rt_sum += r.response_time_ms;
      a.requests.push_back(r);
    }
    const double util = 0.05 + 0.3 * u(eng);
    antipower::telemetry::PowerSample p;
    p.t_s = t;
    p.cpu_power_w = 5.0 + 60.0 * util + rt_coeff * (rt_sum / n) + noise_sd * z(eng);
    p.dram_power_w = 0.3 + 0.02 * z(eng);
    a.power.push_back(p);
    antipower::telemetry::ResourceSample rs;
    rs.t_s = t;
    rs.cpu_util = util;
    rs.host_cpu_util = util + 0.01;
    rs.memory_bytes = static_cast<std::uint64_t>(2e8 + 1e8 * u(eng));
    a.resources.push_back(rs);
  }
  return a;
}

// Writes an artifact the way a trial does, so load_artifact can read it back.
inline void write_artifact(const std::filesystem::path& dir, const antipower::orchestrator::RunArtifact& a) {
  namespace o = antipower::orchestrator;
  std::filesystem::create_directories(dir);
  antipower::load::write_requests_csv(dir / o::files::requests, a.requests);
  antipower::telemetry::write_power_csv(dir / o::files::power, a.power);
  antipower::telemetry::write_resources_csv(dir / o::files::resources, a.resources);
  antipower::telemetry::write_host_csv(dir / o::files::host, a.resources);
  o::write_json_file(dir / o::files::meta, a.meta);
}

}  // namespace fixtures
