#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>
#include "antipower/common/http.hpp"
#include <nlohmann/json.hpp>

#ifdef __linux__
#include <sched.h>
#endif

#include "antipower/common/clock.hpp"
#include "antipower/common/error.hpp"
#include "antipower/workload/handlers.hpp"

namespace antipower::workload {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  bool pin_core = true;
  std::size_t threads = 0;  // 0 = max(16, 4 x cores)
};

struct PinResult {
  bool pinned = false;
  int core = -1;
  std::string message;
};

// Restricts the calling thread, and every thread it creates afterwards, to a
// single CPU: the first one in the current affinity mask.
inline PinResult pin_to_one_core() {
#ifdef __linux__
  cpu_set_t current;
  CPU_ZERO(&current);
  if (sched_getaffinity(0, sizeof(current), &current) != 0)
    return {false, -1, "sched_getaffinity failed; running unpinned"};
  for (int cpu = 0; cpu < CPU_SETSIZE; ++cpu) {
    if (!CPU_ISSET(cpu, &current)) continue;
    cpu_set_t one;
    CPU_ZERO(&one);
    CPU_SET(cpu, &one);
    if (sched_setaffinity(0, sizeof(one), &one) != 0)
      return {false, -1, "sched_setaffinity failed; running unpinned"};
    return {true, cpu, fmt::format("pinned to core {}", cpu)};
  }
  return {false, -1, "empty affinity mask; running unpinned"};
#else
  return {false, -1, "core pinning unsupported on this platform; running unpinned"};
#endif
}

inline double wall_seconds_now() {
  return std::chrono::duration<double>(WallClock::now().time_since_epoch()).count();
}

namespace detail {

inline std::optional<std::uint64_t> query_u64(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  const std::string v = req.get_param_value(key);
  std::size_t used = 0;
  const unsigned long long n = std::stoull(v, &used);
  if (used != v.size()) throw std::invalid_argument(std::string("bad integer for ") + key);
  return n;
}

inline std::optional<std::string> query_str(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

}  // namespace detail

// Dispatches one request to the configured antipattern's handler.
inline WorkResponse dispatch(ServiceState& state, const httplib::Request& req) {
  const auto& cfg = state.config();
  switch (cfg.kind) {
    case AntipatternKind::UnbalancedProcessing:
      return handle_unbalanced_processing(state);
    case AntipatternKind::UnnecessaryProcessing:
      return handle_unnecessary_processing(state);
    case AntipatternKind::TheRamp:
      return handle_the_ramp(state);
    case AntipatternKind::SisyphusRetrieval: {
      auto page = detail::query_u64(req, "page");
      if (!page) return handle_sisyphus_retrieval(state);
      return handle_sisyphus_retrieval(state, *page,
                                       detail::query_u64(req, "page_size").value_or(cfg.page_size));
    }
    case AntipatternKind::MoreIsLess:
      return handle_more_is_less(state, detail::query_u64(req, "workers").value_or(cfg.worker_count),
                                 detail::query_u64(req, "iterations").value_or(cfg.iterations));
    case AntipatternKind::GodClass: {
      std::optional<std::string> payload = detail::query_str(req, "payload");
      if (!payload && req.method == "POST") payload = req.body;
      return handle_god_class(state, payload);
    }
    case AntipatternKind::ExcessiveDynamicAllocation:
      return handle_excessive_dynamic_allocation(
          state, detail::query_u64(req, "iterations").value_or(cfg.iterations));
    case AntipatternKind::CircuitousTreasureHunt:
      return handle_circuitous_treasure_hunt(state, detail::query_str(req, "customer_id"));
    case AntipatternKind::OneLaneBridge:
      return handle_one_lane_bridge(state);
    case AntipatternKind::TrafficJam:
      return handle_traffic_jam(state, wall_seconds_now());
  }
  throw std::logic_error("unknown antipattern kind");
}

// A service exposing /healthz plus the one endpoint of its antipattern.
// Listens on a background thread until stop() or destruction.
class RunningService {
 public:
  RunningService(WorkloadConfig config, ServeOptions options)
      : options_(std::move(options)),
        state_(std::make_unique<ServiceState>(std::move(config), wall_seconds_now())) {
    const std::size_t threads =
        options_.threads ? options_.threads
                         : std::max<std::size_t>(16, 4 * std::max(1u, std::thread::hardware_concurrency()));
    server_.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    server_.set_keep_alive_max_count(1000);
    server_.set_read_timeout(60, 0);
    server_.set_write_timeout(60, 0);

    server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });
    const std::string path = "/" + std::string(slug(state_->config().kind));
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      WorkResponse r;
      try {
        r = dispatch(*state_, req);
      } catch (const std::exception& e) {
        r.ok = false;
        r.summary = {{"error", e.what()}};
      }
      res.status = r.ok ? 200 : 500;
      res.set_content(r.to_json(state_->config().kind).dump(), "application/json");
    };
    server_.Get(path, handler);
    server_.Post(path, handler);

    if (options_.port == 0) {
      port_ = server_.bind_to_any_port(options_.host);
    } else {
      port_ = server_.bind_to_port(options_.host, options_.port) ? options_.port : -1;
    }
    if (port_ < 0)
      throw std::runtime_error(fmt::format(
          "cannot bind {}:{}; the port may be in use (pick another with --port)", options_.host,
          options_.port));
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~RunningService() { stop(); }

  RunningService(const RunningService&) = delete;
  RunningService& operator=(const RunningService&) = delete;

  int port() const { return port_; }
  ServiceState& state() { return *state_; }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

 private:
  ServeOptions options_;
  std::unique_ptr<ServiceState> state_;
  httplib::Server server_;
  int port_ = -1;
  std::thread thread_;
};

inline nlohmann::json startup_meta(const WorkloadConfig& config, const ServeOptions& options,
                                   int port, const PinResult& pin) {
  return {{"event", "service_start"},
          {"config", to_json(config)},
          {"seed", config.dataset_seed},
          {"host", options.host},
          {"port", port},
          {"pinned", pin.pinned},
          {"pinned_core", pin.core},
          {"pin_message", pin.message}};
}

}  // namespace antipower::workload
