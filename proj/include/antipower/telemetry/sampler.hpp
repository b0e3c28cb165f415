#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "antipower/common/clock.hpp"
#include "antipower/common/csv.hpp"
#include "antipower/telemetry/procfs.hpp"
#include "antipower/telemetry/rapl.hpp"
#include "antipower/telemetry/sim_power.hpp"

namespace antipower::telemetry {

// Produces the power sample for the interval that just ended.
class PowerBackend {
 public:
  virtual ~PowerBackend() = default;
  virtual std::string name() const = 0;
  // `process_cpu_s`/`host_busy_s`: CPU time used in the interval by the target
  // process and by the whole host.
  virtual PowerSample sample(std::int64_t t_s, const ResourceSample& resources,
                             double process_cpu_s, double host_busy_s) = 0;
};

// RAPL-backed power. CPU power is the package power attributed to the target
// process by its share of busy CPU time; DRAM power is host-wide.
class RaplPowerBackend : public PowerBackend {
 public:
  explicit RaplPowerBackend(PowercapLayout layout = {}) : reader_(std::move(layout)) {
    prev_pkg_ = reader_.read(EnergyDomain::cpu_package);
    if (reader_.has(EnergyDomain::dram)) prev_dram_ = reader_.read(EnergyDomain::dram);
  }

  std::string name() const override { return "rapl"; }

  PowerSample sample(std::int64_t t_s, const ResourceSample&, double process_cpu_s,
                     double host_busy_s) override {
    auto pkg = reader_.read(EnergyDomain::cpu_package);
    double package_w = 0.0;
    for (std::size_t i = 0; i < pkg.size() && i < prev_pkg_.size(); ++i)
      package_w += power_from_deltas(prev_pkg_[i], pkg[i]);
    prev_pkg_ = std::move(pkg);

    PowerSample s;
    s.t_s = t_s;
    s.cpu_power_w = attribute_power(package_w, process_cpu_s, host_busy_s);
    if (!prev_dram_.empty()) {
      auto dram = reader_.read(EnergyDomain::dram);
      double dram_w = 0.0;
      for (std::size_t i = 0; i < dram.size() && i < prev_dram_.size(); ++i)
        dram_w += power_from_deltas(prev_dram_[i], dram[i]);
      prev_dram_ = std::move(dram);
      s.dram_power_w = dram_w;
    }
    return s;
  }

 private:
  RaplReader reader_;
  std::vector<EnergyReading> prev_pkg_;
  std::vector<EnergyReading> prev_dram_;
};

// Simulated power driven by the live mean response time of each second.
class SimPowerBackend : public PowerBackend {
 public:
  using RtLookup = std::function<std::optional<double>(std::int64_t t_s)>;

  SimPowerBackend(SimPowerModel model, RtLookup rt) : model_(model), rt_(std::move(rt)) {
    model_.validate();
  }

  std::string name() const override { return "sim"; }

  PowerSample sample(std::int64_t t_s, const ResourceSample& resources, double, double) override {
    return simulate_power(model_, resources, rt_ ? rt_(t_s) : std::nullopt, t_s);
  }

 private:
  SimPowerModel model_;
  RtLookup rt_;
};

struct SamplerEvent {
  std::int64_t t_s = 0;
  std::string kind;  // missed_tick | discarded_negative | error | target_ended
  std::string message;
};

// 1 Hz sampler. Ticks on wall-clock second boundaries; the sample taken at
// boundary B covers [B-1, B) and is stamped B-1, the same labelling used for
// request bins. Late ticks are logged as missed, never interpolated.
class Sampler {
 public:
  Sampler(int target_pid, std::unique_ptr<PowerBackend> backend, ProcfsLayout layout = {},
          unsigned core_count = host_core_count())
      : pid_(target_pid),
        backend_(std::move(backend)),
        layout_(std::move(layout)),
        cpu_(target_pid, core_count, layout_),
        host_(layout_) {}

  ~Sampler() { stop(); }

  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  void start() {
    thread_ = std::jthread([this](std::stop_token st) { loop(st); });
  }

  void stop() {
    if (thread_.joinable()) {
      thread_.request_stop();
      thread_.join();
    }
  }

  std::vector<PowerSample> power() const {
    std::lock_guard lk(mu_);
    return power_;
  }
  std::vector<ResourceSample> resources() const {
    std::lock_guard lk(mu_);
    return resources_;
  }
  std::vector<SamplerEvent> events() const {
    std::lock_guard lk(mu_);
    return events_;
  }
  bool failed() const {
    std::lock_guard lk(mu_);
    return failed_;
  }

 private:
  void loop(std::stop_token st) {
    using namespace std::chrono;
    double last_proc_cpu = 0.0;
    try {
      cpu_.prime();
      host_.sample();
      last_proc_cpu = cpu_.last_cpu_seconds();
    } catch (const std::exception& e) {
      record_event({epoch_ms_now() / 1000, "error", e.what()}, true);
      return;
    }
    auto next = time_point_cast<seconds>(WallClock::now()) + seconds(1);
    while (!st.stop_requested()) {
      {
        std::mutex m;
        std::unique_lock lk(m);
        std::condition_variable_any cv;
        cv.wait_until(lk, st, next, [] { return false; });
      }
      if (st.stop_requested()) break;
      const auto now = WallClock::now();
      if (now - next > milliseconds(900)) {
        const auto missed = duration_cast<seconds>(now - next).count();
        record_event({next.time_since_epoch().count() - 1, "missed_tick",
                      fmt::format("sampler woke {} s late; {} tick(s) skipped", missed, missed)},
                     false);
        next = time_point_cast<seconds>(now);
      }
      const std::int64_t t_s = duration_cast<seconds>(next.time_since_epoch()).count() - 1;
      next += seconds(1);
      try {
        ResourceSample r = sample_resources(pid_, layout_);
        r.t_s = t_s;
        r.cpu_util = cpu_.sample();
        const double proc_cpu = cpu_.last_cpu_seconds();
        const auto host = host_.sample();
        r.host_cpu_util = host.util;
        PowerSample p = backend_->sample(t_s, r, proc_cpu - last_proc_cpu, host.busy_s);
        last_proc_cpu = proc_cpu;
        std::lock_guard lk(mu_);
        resources_.push_back(r);
        if (p.cpu_power_w < 0.0 || (p.dram_power_w && *p.dram_power_w < 0.0))
          events_.push_back({t_s, "discarded_negative", "negative power reading dropped"});
        else
          power_.push_back(p);
      } catch (const ProcessGoneError& e) {
        record_event({t_s, "target_ended", e.what()}, false);
        return;
      } catch (const std::exception& e) {
        record_event({t_s, "error", e.what()}, true);
        return;
      }
    }
  }

  void record_event(SamplerEvent e, bool failure) {
    std::lock_guard lk(mu_);
    events_.push_back(std::move(e));
    failed_ = failed_ || failure;
  }

  int pid_;
  std::unique_ptr<PowerBackend> backend_;
  ProcfsLayout layout_;
  ProcessCpuSampler cpu_;
  HostCpuSampler host_;
  mutable std::mutex mu_;
  std::vector<PowerSample> power_;
  std::vector<ResourceSample> resources_;
  std::vector<SamplerEvent> events_;
  bool failed_ = false;
  std::jthread thread_;
};

// ---- trace files -----------------------------------------------------------

inline void write_power_csv(const std::filesystem::path& path, const std::vector<PowerSample>& s) {
  csv::Table t;
  t.header = {"t_s", "cpu_power_w", "dram_power_w"};
  for (const auto& p : s)
    t.rows.push_back({std::to_string(p.t_s), fmt::format("{:.6f}", p.cpu_power_w),
                      csv::fmt_opt(p.dram_power_w, 6)});
  csv::write_file(path, t);
}

inline std::vector<PowerSample> read_power_csv(const std::filesystem::path& path) {
  const auto t = csv::read_file(path);
  const auto ct = t.column("t_s"), cc = t.column("cpu_power_w"), cd = t.column("dram_power_w");
  std::vector<PowerSample> out;
  for (const auto& r : t.rows)
    out.push_back({csv::parse_int(r[ct]), csv::parse_double(r[cc]), csv::parse_opt_double(r[cd])});
  return out;
}

inline void write_resources_csv(const std::filesystem::path& path,
                                const std::vector<ResourceSample>& s) {
  csv::Table t;
  t.header = {"t_s",          "cpu_util",        "memory_bytes", "disk_read_bytes",
              "disk_write_bytes", "net_rx_bytes", "net_tx_bytes"};
  for (const auto& r : s)
    t.rows.push_back({std::to_string(r.t_s), csv::fmt_opt(r.cpu_util, 6), csv::fmt_opt(r.memory_bytes),
                      csv::fmt_opt(r.disk_read_bytes), csv::fmt_opt(r.disk_write_bytes),
                      csv::fmt_opt(r.net_rx_bytes), csv::fmt_opt(r.net_tx_bytes)});
  csv::write_file(path, t);
}

// Host-scope utilization lives beside resources.csv in host.csv.
inline void write_host_csv(const std::filesystem::path& path, const std::vector<ResourceSample>& s) {
  csv::Table t;
  t.header = {"t_s", "host_cpu_util"};
  for (const auto& r : s) t.rows.push_back({std::to_string(r.t_s), csv::fmt_opt(r.host_cpu_util, 6)});
  csv::write_file(path, t);
}

inline std::vector<ResourceSample> read_resources_csv(const std::filesystem::path& path,
                                                      const std::filesystem::path& host_path = {}) {
  const auto t = csv::read_file(path);
  const auto ct = t.column("t_s"), cu = t.column("cpu_util"), cm = t.column("memory_bytes"),
             cdr = t.column("disk_read_bytes"), cdw = t.column("disk_write_bytes"),
             crx = t.column("net_rx_bytes"), ctx = t.column("net_tx_bytes");
  std::vector<ResourceSample> out;
  for (const auto& r : t.rows) {
    ResourceSample s;
    s.t_s = csv::parse_int(r[ct]);
    s.cpu_util = csv::parse_opt_double(r[cu]);
    s.memory_bytes = csv::parse_opt_u64(r[cm]);
    s.disk_read_bytes = csv::parse_opt_u64(r[cdr]);
    s.disk_write_bytes = csv::parse_opt_u64(r[cdw]);
    s.net_rx_bytes = csv::parse_opt_u64(r[crx]);
    s.net_tx_bytes = csv::parse_opt_u64(r[ctx]);
    out.push_back(s);
  }
  if (!host_path.empty() && std::filesystem::exists(host_path)) {
    const auto h = csv::read_file(host_path);
    const auto ht = h.column("t_s"), hu = h.column("host_cpu_util");
    std::size_t j = 0;
    for (const auto& row : h.rows) {
      const auto ts = csv::parse_int(row[ht]);
      while (j < out.size() && out[j].t_s < ts) ++j;
      if (j < out.size() && out[j].t_s == ts) out[j].host_cpu_util = csv::parse_opt_double(row[hu]);
    }
  }
  return out;
}

inline void write_events_csv(const std::filesystem::path& path, const std::vector<SamplerEvent>& ev) {
  csv::Table t;
  t.header = {"t_s", "kind", "message"};
  for (const auto& e : ev) t.rows.push_back({std::to_string(e.t_s), e.kind, e.message});
  csv::write_file(path, t);
}

}  // namespace antipower::telemetry
