// antipower: serve | load | campaign | analyze | report

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <sys/resource.h>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "antipower/common/error.hpp"
#include "antipower/load/driver.hpp"
#include "antipower/orchestrator/trial.hpp"
#include "antipower/report/bundle.hpp"
#include "antipower/stats/analyze.hpp"
#include "antipower/workload/calibrate.hpp"
#include "antipower/workload/service.hpp"

namespace fs = std::filesystem;
using namespace antipower;

namespace {

struct Globals {
  std::string out;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

void log_verbose(const Globals& g, const std::string& msg) {
  if (g.verbose) std::cerr << msg << '\n';
}

// Workload flags shared by serve and campaign.
struct WorkloadFlags {
  std::string antipattern;
  std::string config_file;
  std::optional<std::uint64_t> scale, iterations, payload_size, workers;
  std::optional<double> window_period, heavy_fraction;
  std::optional<double> calibrate_target_ms;
  bool pin_core = true;
  std::uint64_t memory_limit_mb = 0;

  void add_to(CLI::App& app) {
    app.add_option("--antipattern", antipattern, "Antipattern slug")->type_name("SLUG");
    app.add_option("--scale", scale, "Fixture scale factor");
    app.add_option("--iterations", iterations, "Per-request work units");
    app.add_option("--payload-size", payload_size, "Payload bytes");
    app.add_option("--workers", workers, "Worker count (more-is-less)");
    app.add_option("--window-period", window_period, "Window period in s (traffic-jam)");
    app.add_option("--heavy-fraction", heavy_fraction, "Heavy share of each window (traffic-jam)");
    app.add_option("--calibrate-target-ms", calibrate_target_ms,
                   "Rescale iterations so one request takes about this long");
    app.add_flag("--pin-core,!--no-pin-core", pin_core, "Restrict the service to one CPU core");
    app.add_option("--memory-limit-mb", memory_limit_mb, "Data-segment ceiling for the service (0: none)");
  }

  workload::WorkloadConfig build(const Globals& g) const {
    workload::WorkloadConfig c;
    if (!config_file.empty()) {
      c = workload::config_from_json(orchestrator::read_json_file(config_file));
      if (!antipattern.empty() && workload::require_kind(antipattern) != c.kind)
        throw UsageError("--antipattern disagrees with --config");
    } else {
      if (antipattern.empty())
        throw UsageError("--antipattern is required; valid: " + workload::valid_slugs());
      c = workload::default_config(workload::require_kind(antipattern));
    }
    if (g.seed) c.dataset_seed = *g.seed;
    if (scale) c.dataset_scale = *scale;
    if (iterations) c.iterations = *iterations;
    if (payload_size) c.payload_size = *payload_size;
    if (workers) c.worker_count = *workers;
    if (window_period) c.window_period_s = *window_period;
    if (heavy_fraction) c.heavy_fraction = *heavy_fraction;
    c.validate();
    return c;
  }
};

int cmd_serve(const Globals& g, const WorkloadFlags& wf, const std::string& host, int port,
              std::size_t threads) {
  auto config = wf.build(g);
  if (port < 0 || port > 65535) throw UsageError("--port must be within 0..65535");

  // Signals go to sigwait below, not to whichever server thread happens to run.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  if (wf.memory_limit_mb) {
    rlimit lim{};
    lim.rlim_cur = lim.rlim_max = static_cast<rlim_t>(wf.memory_limit_mb) * 1024 * 1024;
    if (setrlimit(RLIMIT_DATA, &lim) != 0) std::cerr << "warning: could not apply the memory limit\n";
  }
  workload::PinResult pin{false, -1, "pinning disabled"};
  if (wf.pin_core) pin = workload::pin_to_one_core();
  std::cerr << pin.message << '\n';

  if (wf.calibrate_target_ms) {
    const auto cal = workload::calibrate(config, *wf.calibrate_target_ms);
    std::cerr << cal.note << '\n';
  }

  workload::ServeOptions opts;
  opts.host = host;
  opts.port = port;
  opts.pin_core = wf.pin_core;
  opts.threads = threads;
  workload::RunningService service(config, opts);
  std::cout << workload::startup_meta(config, opts, service.port(), pin).dump() << std::endl;
  log_verbose(g, fmt::format("listening on {}:{}/{}", host, service.port(), workload::slug(config.kind)));

  int sig = 0;
  sigwait(&stop_signals, &sig);
  log_verbose(g, fmt::format("signal {} received, shutting down", sig));
  service.stop();
  return 0;
}

int cmd_load(const Globals& g, const load::LoadPlan& plan) {
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  const auto log = load::run_load(plan);
  load::write_requests_csv(dir / "requests.csv", log.records);
  std::cout << fmt::format("{} requests, {} failed, written to {}\n", log.records.size(), log.failure_count(),
                           (dir / "requests.csv").string());
  return 0;
}

struct CampaignFlags {
  std::optional<int> users;
  double spawn_rate = 10.0;
  std::optional<double> duration, warmup;
  double cooldown = 30.0, settle = 10.0;
  std::optional<int> reps;
  std::string backend = "real";
  bool full_scale = false;
  double think_ms = 0.0;
  telemetry::SimPowerModel sim;
  std::optional<std::uint64_t> sim_seed;
};

int cmd_campaign(const Globals& g, const WorkloadFlags& wf, const CampaignFlags& cf) {
  const auto config = wf.build(g);
  auto plan = cf.full_scale ? orchestrator::full_plan(config.kind) : orchestrator::desk_plan(config.kind);
  plan.workload = config;
  if (cf.users) plan.load.target_users = *cf.users;
  plan.load.spawn_rate = cf.spawn_rate;
  plan.load.think_time_ms = cf.think_ms;
  if (cf.duration) plan.load.duration_s = *cf.duration;
  if (cf.warmup) plan.warmup_s = *cf.warmup;
  if (cf.reps) plan.repetitions = *cf.reps;
  plan.cooldown_s = cf.cooldown;
  plan.settle_s = cf.settle;
  plan.backend = orchestrator::parse_backend(cf.backend);
  plan.sim = cf.sim;
  plan.sim.seed = cf.sim_seed ? *cf.sim_seed : (g.seed ? *g.seed : plan.sim.seed);
  plan.out_dir = g.out.empty() ? fs::path("campaign") : fs::path(g.out);
  plan.service_command = fs::read_symlink("/proc/self/exe");
  plan.pin_core = wf.pin_core;
  plan.memory_limit_mb = wf.memory_limit_mb;
  plan.calibrate_target_ms = wf.calibrate_target_ms;
  plan.load.endpoint = "http://127.0.0.1/";  // replaced per trial
  plan.validate();
  if (plan.warmup_s >= plan.load.duration_s)
    throw UsageError("--warmup must be shorter than --duration");

  const auto result = orchestrator::run_campaign(plan, &std::cerr);
  std::cout << fmt::format("{}: {} of {} repetitions ok\n", plan.out_dir.string(), result.ok_count(),
                           result.trials.size());
  return result.ok_count() == static_cast<int>(result.trials.size()) ? 0 : 1;
}

int cmd_analyze(const Globals& g, const std::string& campaign, std::optional<double> warmup,
                const std::string& scope) {
  const fs::path dir(campaign);
  if (!fs::is_directory(dir)) throw UsageError("campaign directory not found: " + campaign);
  stats::AnalysisOptions opt;
  if (warmup) {
    opt.warmup_s = *warmup;
  } else if (fs::exists(dir / "campaign.json")) {
    opt.warmup_s = orchestrator::read_json_file(dir / "campaign.json").value("warmup_s", opt.warmup_s);
  }
  if (scope == "process") opt.util_scope = stats::UtilScope::process;
  else if (scope == "host") opt.util_scope = stats::UtilScope::host;
  else throw UsageError("--util-scope must be process or host");

  const auto artifacts = orchestrator::load_campaign(dir);
  const auto analysis = stats::analyze_campaign(artifacts, opt);
  const fs::path out = g.out.empty() ? dir / "report" : fs::path(g.out);
  report::write_bundle(analysis, out);
  std::cout << fmt::format("cpu model: {} (beta {:.6f}, p {:.6f}); bundle written to {}\n",
                           analysis.cpu.error ? "not fitted" : stats::to_string(analysis.cpu.rt.decision),
                           analysis.cpu.rt.beta, analysis.cpu.rt.p_value, out.string());
  return 0;
}

int cmd_report(const std::string& bundle) {
  report::write_report(bundle);
  std::cout << (fs::path(bundle) / "report.md").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Performance antipattern power measurement toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--seed", g.seed, "Dataset seed (and default simulated-power seed)");
  app.add_flag("--verbose", g.verbose, "Log more");

  auto* serve = app.add_subcommand("serve", "Run one antipattern service");
  WorkloadFlags serve_wf;
  serve_wf.add_to(*serve);
  serve->add_option("--config", serve_wf.config_file, "Workload JSON written by a campaign");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t threads = 0;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--threads", threads, "Server worker threads (0: automatic)");

  auto* loadc = app.add_subcommand("load", "Drive closed-loop load against a URL");
  load::LoadPlan lp;
  loadc->add_option("--url", lp.endpoint, "Target URL")->required();
  loadc->add_option("--users", lp.target_users, "Concurrent virtual users");
  loadc->add_option("--spawn-rate", lp.spawn_rate, "Users started per second");
  loadc->add_option("--duration", lp.duration_s, "Run length in s");
  loadc->add_option("--think-ms", lp.think_time_ms, "Pause between a reply and the next request");
  loadc->add_option("--timeout", lp.timeout_s, "Per-request timeout in s");

  auto* camp = app.add_subcommand("campaign", "Run repeated trials of one antipattern");
  WorkloadFlags camp_wf;
  camp_wf.add_to(*camp);
  CampaignFlags cf;
  camp->add_option("--users", cf.users, "Concurrent users (default depends on the antipattern)");
  camp->add_option("--spawn-rate", cf.spawn_rate, "Users started per second");
  camp->add_option("--duration", cf.duration, "Load phase per trial in s (default 180)");
  camp->add_option("--warmup", cf.warmup, "Warm-up excluded from analysis in s (default 30)");
  camp->add_option("--cooldown", cf.cooldown, "Pause after each trial in s");
  camp->add_option("--settle", cf.settle, "Pause between launch and load in s");
  camp->add_option("--reps", cf.reps, "Repetitions (default 5)");
  camp->add_option("--think-ms", cf.think_ms, "Pause between a reply and the next request");
  camp->add_option("--backend", cf.backend, "Power backend: real or sim")->check(CLI::IsMember({"real", "sim"}));
  camp->add_flag("--full-scale", cf.full_scale, "1200 s runs, 120 s warm-up, 30 repetitions");
  camp->add_option("--sim-base", cf.sim.base_w, "Simulated idle power in W");
  camp->add_option("--sim-cpu-coeff", cf.sim.cpu_coeff_w, "Simulated W per unit of CPU utilization");
  camp->add_option("--sim-rt-coeff", cf.sim.rt_coeff, "Simulated W per ms of response time");
  camp->add_option("--sim-noise", cf.sim.noise_sd_w, "Simulated CPU power noise sd in W");
  camp->add_option("--sim-dram-rt-coeff", cf.sim.dram_rt_coeff, "Simulated DRAM W per ms");
  camp->add_option("--sim-seed", cf.sim_seed, "Simulated power noise seed");

  auto* analyze = app.add_subcommand("analyze", "Analyze a campaign directory into a report bundle");
  std::string campaign_dir;
  std::optional<double> analyze_warmup;
  std::string scope = "process";
  analyze->add_option("campaign", campaign_dir, "Campaign directory")->required();
  analyze->add_option("--warmup", analyze_warmup, "Warm-up to exclude in s (default: the campaign's)");
  analyze->add_option("--util-scope", scope, "CPU utilization used by the models: process or host");

  auto* rep = app.add_subcommand("report", "Render report.md from a bundle's CSV files");
  std::string bundle_dir;
  rep->add_option("bundle", bundle_dir, "Bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::usage);
  }

  try {
    if (*serve) return cmd_serve(g, serve_wf, host, port, threads);
    if (*loadc) return cmd_load(g, lp);
    if (*camp) return cmd_campaign(g, camp_wf, cf);
    if (*analyze) return cmd_analyze(g, campaign_dir, analyze_warmup, scope);
    if (*rep) return cmd_report(bundle_dir);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  } catch (const CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::capability);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::runtime_failure);
  }
  return static_cast<int>(ExitCode::usage);
}
