#pragma once

// Process and host counters from the proc filesystem.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

#include "antipower/common/clock.hpp"
#include "antipower/common/error.hpp"

namespace antipower::telemetry {

struct ProcfsLayout {
  std::filesystem::path proc_root = "/proc";
};

inline unsigned host_core_count() {
  const long n = sysconf(_SC_NPROCESSORS_ONLN);
  return n > 0 ? static_cast<unsigned>(n) : std::max(1u, std::thread::hardware_concurrency());
}

// utime + stime of a process, in seconds.
inline double read_process_cpu_seconds(int pid, const ProcfsLayout& layout = {}) {
  const auto path = layout.proc_root / std::to_string(pid) / "stat";
  std::ifstream is(path);
  std::string line;
  if (!is || !std::getline(is, line))
    throw ProcessGoneError("process " + std::to_string(pid) + " is gone (" + path.string() + ")");
  // the command name may contain spaces and parentheses; fields resume after the last ')'
  const auto close = line.rfind(')');
  if (close == std::string::npos) throw ProcessGoneError("unparseable " + path.string());
  std::istringstream fields(line.substr(close + 2));
  std::string f;
  unsigned long long utime = 0, stime = 0;
  // after ')' the first field is state (field 3); utime is field 14, stime 15
  for (int idx = 3; idx <= 15 && fields >> f; ++idx) {
    if (idx == 14) utime = std::stoull(f);
    if (idx == 15) stime = std::stoull(f);
  }
  static const long ticks = sysconf(_SC_CLK_TCK);
  return static_cast<double>(utime + stime) / static_cast<double>(ticks > 0 ? ticks : 100);
}

struct HostCpuTimes {
  double busy_s = 0.0;
  double total_s = 0.0;
};

// Aggregate "cpu" line of /proc/stat.
inline std::optional<HostCpuTimes> read_host_cpu_times(const ProcfsLayout& layout = {}) {
  std::ifstream is(layout.proc_root / "stat");
  std::string label;
  if (!(is >> label) || label != "cpu") return std::nullopt;
  unsigned long long v[10] = {};
  for (auto& x : v)
    if (!(is >> x)) break;
  const unsigned long long idle = v[3] + v[4];
  unsigned long long total = 0;
  for (int i = 0; i < 8; ++i) total += v[i];  // guest time is already in user/nice
  static const long ticks = sysconf(_SC_CLK_TCK);
  const double t = static_cast<double>(ticks > 0 ? ticks : 100);
  return HostCpuTimes{static_cast<double>(total - idle) / t, static_cast<double>(total) / t};
}

// CPU utilization of one process as a fraction of total host capacity:
// CPU-seconds used per wall second, divided by the core count. One busy core
// on a four-core host reads 0.25.
class ProcessCpuSampler {
 public:
  ProcessCpuSampler(int pid, unsigned core_count = host_core_count(), ProcfsLayout layout = {})
      : pid_(pid), cores_(std::max(1u, core_count)), layout_(std::move(layout)) {
    prime();
  }

  void prime() {
    last_cpu_s_ = read_process_cpu_seconds(pid_, layout_);
    last_us_ = steady_us_now();
  }

  // Utilization since the previous call (or construction).
  double sample() {
    const double cpu = read_process_cpu_seconds(pid_, layout_);
    const std::int64_t now = steady_us_now();
    const double wall = static_cast<double>(now - last_us_) * 1e-6;
    const double used = cpu - last_cpu_s_;
    last_cpu_s_ = cpu;
    last_us_ = now;
    if (wall <= 0.0) return 0.0;
    return std::clamp(used / wall / cores_, 0.0, 1.0);
  }

  double last_cpu_seconds() const { return last_cpu_s_; }
  int pid() const { return pid_; }
  unsigned cores() const { return cores_; }

 private:
  int pid_;
  double cores_;
  ProcfsLayout layout_;
  double last_cpu_s_ = 0.0;
  std::int64_t last_us_ = 0;
};

// Host-wide utilization from consecutive /proc/stat readings.
class HostCpuSampler {
 public:
  explicit HostCpuSampler(ProcfsLayout layout = {}) : layout_(std::move(layout)) {
    last_ = read_host_cpu_times(layout_);
  }

  struct Delta {
    double busy_s = 0.0;
    std::optional<double> util;
  };

  Delta sample() {
    auto now = read_host_cpu_times(layout_);
    Delta d;
    if (now && last_) {
      d.busy_s = std::max(0.0, now->busy_s - last_->busy_s);
      const double total = now->total_s - last_->total_s;
      if (total > 0.0) d.util = std::clamp(d.busy_s / total, 0.0, 1.0);
    }
    last_ = now;
    return d;
  }

 private:
  ProcfsLayout layout_;
  std::optional<HostCpuTimes> last_;
};

struct ResourceSample {
  std::int64_t t_s = 0;
  std::optional<double> cpu_util;  // process scope, fraction of host capacity
  std::optional<std::uint64_t> memory_bytes;
  std::optional<std::uint64_t> disk_read_bytes;
  std::optional<std::uint64_t> disk_write_bytes;
  std::optional<std::uint64_t> net_rx_bytes;
  std::optional<std::uint64_t> net_tx_bytes;
  std::optional<double> host_cpu_util;
};

namespace detail {

// Value of a "Key: <number> ..." line.
inline std::optional<std::uint64_t> keyed_value(const std::filesystem::path& p, const std::string& key) {
  std::ifstream is(p);
  if (!is) return std::nullopt;
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(key, 0) != 0) continue;
    std::istringstream ss(line.substr(key.size()));
    std::uint64_t v = 0;
    if (ss >> v) return v;
    return std::nullopt;
  }
  return std::nullopt;
}

struct NetTotals {
  std::uint64_t rx = 0, tx = 0;
};

// Sum over non-loopback interfaces of the process's network namespace.
inline std::optional<NetTotals> read_net_dev(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) return std::nullopt;
  std::string line;
  NetTotals t;
  while (std::getline(is, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string iface = line.substr(0, colon);
    iface.erase(0, iface.find_first_not_of(' '));
    std::istringstream ss(line.substr(colon + 1));
    std::uint64_t f[9] = {};
    for (auto& x : f)
      if (!(ss >> x)) return std::nullopt;
    if (iface == "lo") continue;
    t.rx += f[0];
    t.tx += f[8];
  }
  return t;
}

}  // namespace detail

// One snapshot of a process's memory, disk and network counters. Counters
// that cannot be read stay empty rather than reading as zero. cpu_util and
// host_cpu_util are filled by the caller, which owns the interval state.
inline ResourceSample sample_resources(int pid, const ProcfsLayout& layout = {}) {
  const auto dir = layout.proc_root / std::to_string(pid);
  if (!std::filesystem::exists(dir))
    throw ProcessGoneError("process " + std::to_string(pid) + " is gone");
  ResourceSample s;
  if (auto rss_kb = detail::keyed_value(dir / "status", "VmRSS:")) s.memory_bytes = *rss_kb * 1024;
  s.disk_read_bytes = detail::keyed_value(dir / "io", "read_bytes:");
  s.disk_write_bytes = detail::keyed_value(dir / "io", "write_bytes:");
  if (auto net = detail::read_net_dev(dir / "net" / "dev")) {
    s.net_rx_bytes = net->rx;
    s.net_tx_bytes = net->tx;
  }
  return s;
}

}  // namespace antipower::telemetry
