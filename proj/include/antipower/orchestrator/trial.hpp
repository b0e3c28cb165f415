#pragma once

// One trial: fresh service process, settle, sample + load, stop, write, cool down.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <sys/utsname.h>
#include <unistd.h>

#include <fmt/format.h>
#include "antipower/common/http.hpp"
#include <nlohmann/json.hpp>

#include "antipower/common/clock.hpp"
#include "antipower/common/csv.hpp"
#include "antipower/load/driver.hpp"
#include "antipower/orchestrator/artifact.hpp"
#include "antipower/orchestrator/plan.hpp"
#include "antipower/orchestrator/process.hpp"
#include "antipower/telemetry/sampler.hpp"

namespace antipower::orchestrator {

struct TrialOutcome {
  int repetition = 0;
  std::filesystem::path dir;
  bool ok = false;
  std::string stage;  // where it failed
  std::string cause;
};

class TrialFailure : public std::runtime_error {
 public:
  TrialFailure(std::string stage, const std::string& cause)
      : std::runtime_error(cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

inline std::string rep_dir_name(int repetition) { return "rep-" + std::to_string(repetition); }

inline nlohmann::json host_descriptor() {
  nlohmann::json h;
  h["core_count"] = telemetry::host_core_count();
  std::ifstream gov("/sys/devices/system/cpu/cpu0/cpufreq/scaling_governor");
  std::string g;
  h["governor"] = (gov && std::getline(gov, g)) ? nlohmann::json(g) : nlohmann::json();
  char name[256] = {};
  if (gethostname(name, sizeof(name) - 1) == 0) h["hostname"] = name;
  utsname u{};
  if (uname(&u) == 0) h["kernel"] = std::string(u.sysname) + " " + u.release;
  h["dram_power_scope"] = "host";
  return h;
}

namespace detail {

inline bool wait_healthy(ChildProcess& child, int port, double timeout_s) {
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(std::chrono::milliseconds(500));
  client.set_read_timeout(std::chrono::seconds(2));
  const auto until = SteadyClock::now() + std::chrono::duration_cast<SteadyClock::duration>(
                                              std::chrono::duration<double>(timeout_s));
  while (SteadyClock::now() < until) {
    if (!child.running()) return false;
    if (auto r = client.Get("/healthz"); r && r->status == 200) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  return false;
}

inline void sleep_s(double s) {
  if (s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

inline void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw TrialFailure("prepare", "cannot create " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".write-probe";
  {
    std::ofstream os(probe);
    if (!(os << "x")) throw TrialFailure("prepare", dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace detail

// Runs repetition `repetition` of the plan into out_dir/rep-<i>/. Never throws
// for trial-level problems: the outcome (and meta.json, when the directory is
// writable) carry the failing stage and its cause.
inline TrialOutcome execute_trial(const ExperimentPlan& plan, int repetition) {
  namespace fs = std::filesystem;
  TrialOutcome out;
  out.repetition = repetition;
  out.dir = plan.out_dir / rep_dir_name(repetition);

  nlohmann::json meta;
  meta["repetition"] = repetition;
  meta["plan"] = to_json(plan);
  meta["seeds"] = {{"dataset", plan.workload.dataset_seed}, {"sim_power", plan.sim.seed}};
  meta["host"] = host_descriptor();
  meta["start_ms"] = epoch_ms_now();
  meta["cpu_util_scope"] = "process";

  std::string stage = "prepare";
  bool dir_ready = false;
  load::RequestSink sink;
  std::unique_ptr<telemetry::Sampler> sampler;
  std::unique_ptr<ChildProcess> service;
  auto enter = [&](const char* s) {
    stage = s;
    if (plan.stage_hook) plan.stage_hook(stage);
  };

  try {
    enter("prepare");
    detail::ensure_writable(out.dir);
    dir_ready = true;
    if (plan.service_command.empty() || !fs::exists(plan.service_command))
      throw TrialFailure("prepare", "service executable not found: " + plan.service_command.string());
    write_json_file(out.dir / files::workload, workload::to_json(plan.workload));

    enter("launch");
    const int port = find_free_port();
    std::vector<std::string> argv = {plan.service_command.string(),
                                     "serve",
                                     "--config",
                                     (out.dir / files::workload).string(),
                                     "--port",
                                     std::to_string(port),
                                     plan.pin_core ? "--pin-core" : "--no-pin-core"};
    if (plan.memory_limit_mb) {
      argv.push_back("--memory-limit-mb");
      argv.push_back(std::to_string(plan.memory_limit_mb));
    }
    if (plan.calibrate_target_ms) {
      argv.push_back("--calibrate-target-ms");
      argv.push_back(fmt::format("{}", *plan.calibrate_target_ms));
    }
    service = std::make_unique<ChildProcess>(argv, out.dir / files::service_log);
    meta["service_pid"] = service->pid();
    meta["port"] = port;

    enter("health");
    if (!detail::wait_healthy(*service, port, plan.health_timeout_s))
      throw TrialFailure("health", "service did not become healthy (see service.log)");

    enter("settle");
    detail::sleep_s(plan.settle_s);

    enter("sample");
    std::unique_ptr<telemetry::PowerBackend> backend;
    if (plan.backend == PowerBackendKind::real) {
      backend = std::make_unique<telemetry::RaplPowerBackend>();
    } else {
      backend = std::make_unique<telemetry::SimPowerBackend>(
          plan.sim, [&sink](std::int64_t t_s) -> std::optional<double> {
            const auto s = sink.second(t_s);
            if (!s.succeeded) return std::nullopt;
            return s.rt_sum_ms / static_cast<double>(s.succeeded);
          });
    }
    sampler = std::make_unique<telemetry::Sampler>(service->pid(), std::move(backend));
    sampler->start();

    enter("load");
    load::LoadPlan lp = plan.load;
    lp.endpoint = fmt::format("http://127.0.0.1:{}/{}", port, workload::slug(plan.workload.kind));
    meta["endpoint"] = lp.endpoint;
    const auto log = load::run_load(lp, sink);
    meta["load_start_ms"] = log.run_start_ms;
    meta["load_end_ms"] = log.run_end_ms;
    try {
      meta["first_reply"] = log.first_reply.empty() ? nlohmann::json() : nlohmann::json::parse(log.first_reply);
    } catch (const nlohmann::json::exception&) {
      meta["first_reply"] = log.first_reply;
    }

    enter("stop");
    sampler->stop();
    if (!service->running())
      throw TrialFailure("stop", "service exited during the run (see service.log)");
    service->terminate();
    if (sampler->failed()) {
      std::string why = "sampler failed";
      for (const auto& e : sampler->events())
        if (e.kind == "error") why = e.message;
      throw TrialFailure("sample", why);
    }

    enter("write");
    load::write_requests_csv(out.dir / files::requests, log.records);
    telemetry::write_power_csv(out.dir / files::power, sampler->power());
    const auto res = sampler->resources();
    telemetry::write_resources_csv(out.dir / files::resources, res);
    telemetry::write_host_csv(out.dir / files::host, res);
    telemetry::write_events_csv(out.dir / files::events, sampler->events());
    meta["end_ms"] = epoch_ms_now();
    meta["status"] = "ok";
    write_json_file(out.dir / files::meta, meta);
    out.ok = true;
  } catch (const TrialFailure& e) {
    out.stage = e.stage();
    out.cause = e.what();
  } catch (const std::exception& e) {
    out.stage = stage;
    out.cause = e.what();
  }

  if (!out.ok) {
    if (sampler) sampler->stop();
    service.reset();  // kills the service if it is still up
    if (dir_ready) {
      try {
        // keep what was collected; it helps diagnose the failure
        load::write_requests_csv(out.dir / files::requests, sink.sorted_records());
        if (sampler) {
          telemetry::write_power_csv(out.dir / files::power, sampler->power());
          const auto res = sampler->resources();
          telemetry::write_resources_csv(out.dir / files::resources, res);
          telemetry::write_host_csv(out.dir / files::host, res);
          telemetry::write_events_csv(out.dir / files::events, sampler->events());
        }
        meta["status"] = "failed";
        meta["failed_stage"] = out.stage;
        meta["failure_cause"] = out.cause;
        meta["end_ms"] = epoch_ms_now();
        write_json_file(out.dir / files::meta, meta);
      } catch (const std::exception&) {
        // the outcome already carries the failure
      }
    }
    return out;  // no cool-down after a failure: nothing was loaded
  }

  try {
    enter("cooldown");
    detail::sleep_s(plan.cooldown_s);
  } catch (const std::exception&) {
  }
  return out;
}

struct CampaignResult {
  std::filesystem::path dir;
  std::vector<TrialOutcome> trials;

  int ok_count() const {
    int n = 0;
    for (const auto& t : trials) n += t.ok;
    return n;
  }
};

inline void write_manifest(const std::filesystem::path& dir, const std::vector<TrialOutcome>& trials) {
  csv::Table t;
  t.header = {"repetition", "directory", "status", "stage", "cause"};
  for (const auto& tr : trials)
    t.rows.push_back({std::to_string(tr.repetition), rep_dir_name(tr.repetition),
                      tr.ok ? "ok" : "failed", tr.stage, tr.cause});
  csv::write_file(dir / "manifest.csv", t);
}

inline std::string format_duration(double s) {
  if (s >= 3600) return fmt::format("{:.1f} h", s / 3600);
  if (s >= 60) return fmt::format("{:.1f} min", s / 60);
  return fmt::format("{:.0f} s", s);
}

// Runs the repetitions one after another. A failed trial is recorded in the
// manifest and the campaign moves on.
inline CampaignResult run_campaign(const ExperimentPlan& plan, std::ostream* progress = &std::cerr) {
  plan.validate();
  if (plan.backend == PowerBackendKind::real) (void)telemetry::RaplReader{};  // throws CapabilityError
  std::filesystem::create_directories(plan.out_dir);

  if (progress)
    *progress << fmt::format("campaign: {} x {} ({}), estimated {}\n", plan.repetitions,
                             workload::slug(plan.workload.kind), to_string(plan.backend),
                             format_duration(plan.campaign_estimate_s()));
  nlohmann::json cj = to_json(plan);
  cj["estimated_duration_s"] = plan.campaign_estimate_s();
  write_json_file(plan.out_dir / "campaign.json", cj);

  CampaignResult result;
  result.dir = plan.out_dir;
  for (int i = 0; i < plan.repetitions; ++i) {
    auto t = execute_trial(plan, i);
    if (progress)
      *progress << fmt::format("  {} {}{}\n", rep_dir_name(i), t.ok ? "ok" : "FAILED",
                               t.ok ? "" : " at " + t.stage + ": " + t.cause);
    result.trials.push_back(std::move(t));
    write_manifest(plan.out_dir, result.trials);
  }
  return result;
}

// Artifacts listed as ok in a campaign's manifest, in repetition order.
inline std::vector<RunArtifact> load_campaign(const std::filesystem::path& dir) {
  const auto manifest = dir / "manifest.csv";
  if (!std::filesystem::exists(manifest))
    throw std::runtime_error("no manifest.csv in " + dir.string());
  const auto t = csv::read_file(manifest);
  const auto cd = t.column("directory"), cs = t.column("status");
  std::vector<RunArtifact> out;
  for (const auto& row : t.rows)
    if (row[cs] == "ok") out.push_back(load_artifact(dir / row[cd]));
  return out;
}

}  // namespace antipower::orchestrator
