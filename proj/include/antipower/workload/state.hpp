#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "antipower/common/clock.hpp"
#include "antipower/workload/config.hpp"
#include "antipower/workload/fixture.hpp"

namespace antipower::workload {

// Runs submitted jobs one at a time on a dedicated thread: the single
// request-processing thread that Unbalanced Processing monopolizes.
class SerialExecutor {
 public:
  SerialExecutor() : worker_([this](std::stop_token st) { loop(st); }) {}

  ~SerialExecutor() {
    worker_.request_stop();
    cv_.notify_all();
  }

  SerialExecutor(const SerialExecutor&) = delete;
  SerialExecutor& operator=(const SerialExecutor&) = delete;

  template <typename F>
  auto run(F&& fn) -> decltype(fn()) {
    using R = decltype(fn());
    // via std::function: GCC 11 rejects packaged_task built from a local lambda type
    auto task = std::make_shared<std::packaged_task<R()>>(std::function<R()>(std::forward<F>(fn)));
    auto fut = task->get_future();
    {
      std::lock_guard lk(mu_);
      queue_.emplace_back([task] { (*task)(); });
    }
    cv_.notify_one();
    return fut.get();
  }

 private:
  void loop(std::stop_token st) {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, st, [&] { return !queue_.empty(); });
        if (queue_.empty()) return;  // stop requested
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job();
    }
  }

  std::mutex mu_;
  std::condition_variable_any cv_;
  std::deque<std::function<void()>> queue_;
  std::jthread worker_;
};

struct RampStore {
  std::shared_mutex mu;
  std::vector<std::string> items;
};

struct UnbalancedStore {
  std::mutex mu;
  std::vector<std::string> items;
};

struct GodCounters {
  std::mutex mu;
  std::uint64_t request_count = 0;
  std::uint64_t error_count = 0;
  std::map<std::string, std::string> cache;
  std::vector<std::string> storage;
};

struct BridgeGate {
  std::mutex gate;
  std::atomic<int> occupancy{0};
  std::atomic<int> max_occupancy{0};
  std::uint64_t crossings = 0;  // guarded by gate
  std::string last_digest;      // guarded by gate
};

// Phase tracker and decaying backlog for Traffic Jam.
struct JamClock {
  std::mutex mu;
  double origin_s = 0.0;   // wall time at which period 0 starts
  double last_s = 0.0;     // last time the debt was decayed
  double debt_units = 0.0;  // lingering work owed by normal-window requests
};

// Everything a running service mutates. One instance per service process;
// a fresh process means a fresh state.
class ServiceState {
 public:
  explicit ServiceState(WorkloadConfig config, double start_wall_s = 0.0)
      : config_(std::move(config)),
        fixture_(generate_fixture(config_.dataset_seed, config_.dataset_scale)),
        rng_(config_.dataset_seed ^ 0x9E3779B97F4A7C15ull) {
    config_.validate();
    jam.origin_s = start_wall_s;
    jam.last_s = start_wall_s;
  }

  const WorkloadConfig& config() const { return config_; }
  WorkloadConfig& mutable_config() { return config_; }
  const RelationalFixture& fixture() const { return fixture_; }

  // Draw from the service-wide seeded generator.
  std::uint64_t next_random() {
    std::lock_guard lk(rng_mu_);
    return rng_();
  }

  RampStore ramp;
  UnbalancedStore unbalanced;
  GodCounters god;
  BridgeGate bridge;
  JamClock jam;
  SerialExecutor processing_lane;

 private:
  WorkloadConfig config_;
  RelationalFixture fixture_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

}  // namespace antipower::workload
