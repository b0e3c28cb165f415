#pragma once

// On-disk trial output and the warm-up trimmed view used by analysis.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "antipower/common/error.hpp"
#include "antipower/load/driver.hpp"
#include "antipower/telemetry/sampler.hpp"

namespace antipower::orchestrator {

namespace files {
inline constexpr const char* requests = "requests.csv";
inline constexpr const char* power = "power.csv";
inline constexpr const char* resources = "resources.csv";
inline constexpr const char* host = "host.csv";
inline constexpr const char* events = "sampler_events.csv";
inline constexpr const char* meta = "meta.json";
inline constexpr const char* workload = "workload.json";
inline constexpr const char* service_log = "service.log";
}  // namespace files

struct RunArtifact {
  std::filesystem::path dir;
  nlohmann::json meta;
  std::vector<load::RequestRecord> requests;
  std::vector<telemetry::PowerSample> power;
  std::vector<telemetry::ResourceSample> resources;

  bool ok() const { return meta.value("status", std::string{}) == "ok"; }
  int repetition() const { return meta.value("repetition", -1); }

  std::optional<std::int64_t> meta_ms(const char* key) const {
    if (meta.contains(key) && meta[key].is_number_integer()) return meta[key].get<std::int64_t>();
    return std::nullopt;
  }

  // Start of the load phase in epoch ms, falling back to the earliest trace point.
  std::int64_t origin_ms() const {
    if (auto v = meta_ms("load_start_ms")) return *v;
    std::optional<std::int64_t> lo;
    auto take = [&](std::int64_t v) { lo = lo ? std::min(*lo, v) : v; };
    for (const auto& r : requests) take(r.start_ms);
    for (const auto& p : power) take(p.t_s * 1000);
    for (const auto& s : resources) take(s.t_s * 1000);
    if (!lo) throw std::runtime_error("artifact " + dir.string() + " has no timestamps");
    return *lo;
  }

  std::int64_t end_ms() const {
    if (auto v = meta_ms("load_end_ms")) return *v;
    std::optional<std::int64_t> hi;
    auto take = [&](std::int64_t v) { hi = hi ? std::max(*hi, v) : v; };
    for (const auto& r : requests) take(static_cast<std::int64_t>(std::ceil(r.completion_ms())));
    for (const auto& p : power) take((p.t_s + 1) * 1000);
    for (const auto& s : resources) take((s.t_s + 1) * 1000);
    if (!hi) throw std::runtime_error("artifact " + dir.string() + " has no timestamps");
    return *hi;
  }

  unsigned core_count() const {
    if (meta.contains("host") && meta["host"].contains("core_count"))
      return std::max(1u, meta["host"]["core_count"].get<unsigned>());
    return telemetry::host_core_count();
  }

  // First successful reply body, parsed, if the trial recorded one.
  std::optional<nlohmann::json> first_reply() const {
    if (!meta.contains("first_reply") || meta["first_reply"].is_null()) return std::nullopt;
    return std::optional<nlohmann::json>(std::in_place, meta["first_reply"]);
  }
};

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  return nlohmann::json::parse(is);
}

inline void write_json_file(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

// Loads a trial directory. The three trace files must exist and parse.
inline RunArtifact load_artifact(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  RunArtifact a;
  a.dir = dir;
  a.meta = read_json_file(dir / files::meta);
  for (const char* f : {files::requests, files::power, files::resources})
    if (!fs::exists(dir / f)) throw std::runtime_error("artifact " + dir.string() + " lacks " + f);
  a.requests = load::read_requests_csv(dir / files::requests);
  a.power = telemetry::read_power_csv(dir / files::power);
  a.resources = telemetry::read_resources_csv(dir / files::resources, dir / files::host);
  return a;
}

// True when the recorded load window and the trace spans agree within tol_s.
inline bool spans_consistent(const RunArtifact& a, double tol_s = 5.0) {
  const auto start = a.meta_ms("load_start_ms"), end = a.meta_ms("load_end_ms");
  if (!start || !end) return false;
  const double meta_span = static_cast<double>(*end - *start) / 1000.0;
  auto close = [&](double span) { return std::abs(span - meta_span) <= tol_s; };
  if (!a.requests.empty()) {
    double last = 0.0;
    for (const auto& r : a.requests) last = std::max(last, r.completion_ms());
    if (!close((last - static_cast<double>(a.requests.front().start_ms)) / 1000.0)) return false;
  }
  if (!a.power.empty() && !close(static_cast<double>(a.power.back().t_s - a.power.front().t_s + 1)))
    return false;
  if (!a.resources.empty() &&
      !close(static_cast<double>(a.resources.back().t_s - a.resources.front().t_s + 1)))
    return false;
  return true;
}

struct TrimmedView {
  std::vector<load::RequestRecord> requests;
  std::vector<telemetry::PowerSample> power;
  std::vector<telemetry::ResourceSample> resources;
  std::int64_t cutoff_ms = 0;  // first instant kept
  std::int64_t end_ms = 0;
};

// Drops everything before origin + warmup_s. A request belongs to the second
// it completes in, a 1 Hz sample to the second starting at its stamp; both
// are kept only when that point is at or past the cutoff. The artifact itself
// is left untouched.
inline TrimmedView trim_warmup(const RunArtifact& a, double warmup_s) {
  if (!(warmup_s >= 0.0)) throw std::invalid_argument("warm-up must be non-negative");
  const std::int64_t origin = a.origin_ms(), end = a.end_ms();
  const double span_s = static_cast<double>(end - origin) / 1000.0;
  if (warmup_s >= span_s)
    throw std::invalid_argument("warm-up of " + std::to_string(warmup_s) +
                                " s is not shorter than the " + std::to_string(span_s) +
                                " s trace in " + a.dir.string());
  TrimmedView v;
  v.end_ms = end;
  v.cutoff_ms = origin + static_cast<std::int64_t>(std::llround(warmup_s * 1000.0));
  if (warmup_s == 0.0) {
    v.requests = a.requests;
    v.power = a.power;
    v.resources = a.resources;
    return v;
  }
  const double cut = static_cast<double>(v.cutoff_ms);
  for (const auto& r : a.requests)
    if (r.completion_ms() >= cut) v.requests.push_back(r);
  for (const auto& p : a.power)
    if (p.t_s * 1000 >= v.cutoff_ms) v.power.push_back(p);
  for (const auto& s : a.resources)
    if (s.t_s * 1000 >= v.cutoff_ms) v.resources.push_back(s);
  return v;
}

}  // namespace antipower::orchestrator
