#pragma once

// RAPL energy counters through the Linux powercap sysfs tree:
//   <root>/intel-rapl:<socket>/{name,energy_uj,max_energy_range_uj}
//   <root>/intel-rapl:<socket>/intel-rapl:<socket>:<n>/...   (sub-zones, "dram")

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "antipower/common/clock.hpp"
#include "antipower/common/error.hpp"

namespace antipower::telemetry {

enum class EnergyDomain { cpu_package, dram };

inline const char* to_string(EnergyDomain d) {
  return d == EnergyDomain::cpu_package ? "cpu_package" : "dram";
}

struct EnergyReading {
  EnergyDomain domain = EnergyDomain::cpu_package;
  std::string zone;  // sysfs directory the value came from
  std::uint64_t energy_uj = 0;
  std::uint64_t max_range_uj = 0;
  std::int64_t t_ms = 0;       // wall clock, for stamping
  std::int64_t steady_us = 0;  // monotonic clock, for deltas
};

struct PowercapLayout {
  std::filesystem::path root = "/sys/class/powercap";
};

namespace detail {

inline std::string read_trimmed(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw CapabilityError("cannot read " + p.string());
  std::string s;
  std::getline(is, s);
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\r')) s.pop_back();
  return s;
}

inline std::uint64_t read_u64(const std::filesystem::path& p) {
  const std::string s = read_trimmed(p);
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CapabilityError("malformed counter in " + p.string() + ": '" + s + "'");
  }
}

inline std::string no_rapl_hint() {
  return "; RAPL energy counters are unavailable on this host, use the simulated power backend "
         "(--backend sim)";
}

}  // namespace detail

inline EnergyReading read_energy_zone(const std::filesystem::path& zone, EnergyDomain domain) {
  EnergyReading r;
  r.domain = domain;
  r.zone = zone.string();
  try {
    r.energy_uj = detail::read_u64(zone / "energy_uj");
    r.max_range_uj = detail::read_u64(zone / "max_energy_range_uj");
  } catch (const CapabilityError& e) {
    throw CapabilityError(e.what() + detail::no_rapl_hint());
  }
  r.t_ms = epoch_ms_now();
  r.steady_us = steady_us_now();
  if (r.max_range_uj > 0 && r.energy_uj > r.max_range_uj)
    throw CapabilityError("energy counter exceeds its range in " + zone.string());
  return r;
}

// Discovers package and dram zones. Multi-socket hosts have several package
// zones; callers sum their powers.
class RaplReader {
 public:
  explicit RaplReader(PowercapLayout layout = {}) : layout_(std::move(layout)) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(layout_.root, ec))
      throw CapabilityError("powercap directory " + layout_.root.string() + " not found" +
                            detail::no_rapl_hint());
    for (const auto& top : fs::directory_iterator(layout_.root, ec)) {
      const std::string dir = top.path().filename().string();
      // top-level zones look like intel-rapl:0; sub-zones carry a second colon
      if (dir.rfind("intel-rapl:", 0) != 0 || std::count(dir.begin(), dir.end(), ':') != 1) continue;
      std::string name;
      try {
        name = detail::read_trimmed(top.path() / "name");
      } catch (const CapabilityError&) {
        continue;
      }
      if (name.rfind("package", 0) == 0) package_.push_back(top.path());
      for (const auto& sub : fs::directory_iterator(top.path(), ec)) {
        const std::string sdir = sub.path().filename().string();
        if (sdir.rfind("intel-rapl:", 0) != 0) continue;
        try {
          if (detail::read_trimmed(sub.path() / "name") == "dram") dram_.push_back(sub.path());
        } catch (const CapabilityError&) {
        }
      }
    }
    std::sort(package_.begin(), package_.end());
    std::sort(dram_.begin(), dram_.end());
    if (package_.empty())
      throw CapabilityError("no RAPL package zone under " + layout_.root.string() +
                            detail::no_rapl_hint());
  }

  bool has(EnergyDomain d) const { return !zones(d).empty(); }

  const std::vector<std::filesystem::path>& zones(EnergyDomain d) const {
    return d == EnergyDomain::cpu_package ? package_ : dram_;
  }

  // One reading per zone of the domain.
  std::vector<EnergyReading> read(EnergyDomain d) const {
    std::vector<EnergyReading> out;
    for (const auto& z : zones(d)) out.push_back(read_energy_zone(z, d));
    return out;
  }

 private:
  PowercapLayout layout_;
  std::vector<std::filesystem::path> package_;
  std::vector<std::filesystem::path> dram_;
};

inline std::vector<EnergyReading> read_energy(EnergyDomain domain, const PowercapLayout& layout = {}) {
  RaplReader reader(layout);
  if (!reader.has(domain))
    throw CapabilityError(std::string("no RAPL zone for domain ") + to_string(domain) +
                          detail::no_rapl_hint());
  return reader.read(domain);
}

// Energy consumed between two readings of one counter, in microjoules.
// A smaller current value means the counter wrapped once past max_range.
inline std::uint64_t energy_delta_uj(const EnergyReading& prev, const EnergyReading& curr) {
  if (curr.energy_uj >= prev.energy_uj) return curr.energy_uj - prev.energy_uj;
  return curr.max_range_uj - prev.energy_uj + curr.energy_uj;
}

// Average power in watts between two readings (uJ / us = W).
inline double power_from_deltas(const EnergyReading& prev, const EnergyReading& curr) {
  if (prev.domain != curr.domain) throw std::invalid_argument("readings from different domains");
  const std::int64_t dt_us = curr.steady_us - prev.steady_us;
  if (dt_us <= 0) throw std::invalid_argument("readings must be strictly increasing in time");
  return static_cast<double>(energy_delta_uj(prev, curr)) / static_cast<double>(dt_us);
}

// Share of package power attributed to one process: package power scaled by
// the process's fraction of all busy CPU time in the interval.
inline double attribute_power(double package_w, double process_cpu_s, double host_busy_cpu_s) {
  if (host_busy_cpu_s <= 0.0 || process_cpu_s <= 0.0) return 0.0;
  return package_w * std::clamp(process_cpu_s / host_busy_cpu_s, 0.0, 1.0);
}

}  // namespace antipower::telemetry
