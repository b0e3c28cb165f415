#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "antipower/common/http.hpp"

#include "antipower/common/clock.hpp"
#include "antipower/common/csv.hpp"
#include "antipower/load/plan.hpp"

namespace antipower::load {

struct RequestRecord {
  std::int64_t start_ms = 0;  // epoch
  double response_time_ms = 0.0;
  bool success = false;
  int user_id = 0;

  double completion_ms() const { return static_cast<double>(start_ms) + response_time_ms; }
};

struct RequestLog {
  LoadPlan plan;
  std::vector<RequestRecord> records;  // sorted by start
  std::int64_t run_start_ms = 0;
  std::int64_t run_end_ms = 0;
  std::string first_reply;  // body of the earliest successful reply

  std::size_t failure_count() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.success; }));
  }
};

// Per-second aggregate over completions, maintained as records arrive.
struct SecondStats {
  std::uint64_t completed = 0;
  std::uint64_t succeeded = 0;
  double rt_sum_ms = 0.0;  // successful completions only
};

// Thread-safe recorder shared by all virtual users. Every add() is kept.
class RequestSink {
 public:
  void add(const RequestRecord& r) {
    std::lock_guard lk(mu_);
    records_.push_back(r);
    auto& s = by_second_[floor_div(static_cast<std::int64_t>(r.completion_ms()), 1000)];
    ++s.completed;
    if (r.success) {
      ++s.succeeded;
      s.rt_sum_ms += r.response_time_ms;
    }
  }

  void offer_first_reply(std::int64_t start_ms, const std::string& body) {
    std::lock_guard lk(mu_);
    if (!first_reply_ || start_ms < first_reply_->first) first_reply_ = {start_ms, body};
  }

  SecondStats second(std::int64_t epoch_s) const {
    std::lock_guard lk(mu_);
    auto it = by_second_.find(epoch_s);
    return it == by_second_.end() ? SecondStats{} : it->second;
  }

  std::size_t size() const {
    std::lock_guard lk(mu_);
    return records_.size();
  }

  std::vector<RequestRecord> sorted_records() const {
    std::lock_guard lk(mu_);
    auto out = records_;
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.start_ms < b.start_ms; });
    return out;
  }

  std::string first_reply() const {
    std::lock_guard lk(mu_);
    return first_reply_ ? first_reply_->second : std::string{};
  }

 private:
  mutable std::mutex mu_;
  std::vector<RequestRecord> records_;
  std::map<std::int64_t, SecondStats> by_second_;
  std::optional<std::pair<std::int64_t, std::string>> first_reply_;
};

struct ParsedUrl {
  std::string origin;  // scheme://host:port
  std::string target;  // path + query
};

inline ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Runs the closed loop until `duration_s` has elapsed. Requests in flight at
// the deadline are awaited and recorded; no new ones are issued.
inline RequestLog run_load(const LoadPlan& plan, RequestSink& sink) {
  plan.validate();
  const auto offsets = spawn_schedule(plan);
  const ParsedUrl url = parse_url(plan.endpoint);
  const auto t0 = SteadyClock::now();
  const std::int64_t wall0 = epoch_ms_now();
  const auto deadline = t0 + std::chrono::duration_cast<SteadyClock::duration>(
                                 std::chrono::duration<double>(plan.duration_s));
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(plan.timeout_s));

  auto user_loop = [&](int user_id) {
    std::this_thread::sleep_until(t0 + std::chrono::milliseconds(offsets[static_cast<std::size_t>(user_id)]));
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    client.set_keep_alive(false);
    while (SteadyClock::now() < deadline) {
      RequestRecord rec;
      rec.user_id = user_id;
      rec.start_ms = wall0 + std::chrono::duration_cast<std::chrono::milliseconds>(
                                 SteadyClock::now() - t0)
                                 .count();
      const auto sent = SteadyClock::now();
      auto res = client.Get(url.target);
      rec.response_time_ms = elapsed_ms(sent);
      rec.success = res && res->status == 200;
      if (rec.success) sink.offer_first_reply(rec.start_ms, res->body);
      sink.add(rec);
      if (plan.think_time_ms > 0)
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(plan.think_time_ms));
    }
  };

  {
    std::vector<std::jthread> users;
    users.reserve(offsets.size());
    for (int u = 0; u < plan.target_users; ++u) users.emplace_back(user_loop, u);
  }

  RequestLog log;
  log.plan = plan;
  log.run_start_ms = wall0;
  log.run_end_ms = wall0 + std::chrono::duration_cast<std::chrono::milliseconds>(
                               SteadyClock::now() - t0)
                               .count();
  log.records = sink.sorted_records();
  log.first_reply = sink.first_reply();
  return log;
}

inline RequestLog run_load(const LoadPlan& plan) {
  RequestSink sink;
  return run_load(plan, sink);
}

inline csv::Table to_table(const std::vector<RequestRecord>& records) {
  csv::Table t;
  t.header = {"start_ms", "response_time_ms", "success", "user_id"};
  t.rows.reserve(records.size());
  for (const auto& r : records)
    t.rows.push_back({std::to_string(r.start_ms), fmt::format("{:.3f}", r.response_time_ms),
                      r.success ? "1" : "0", std::to_string(r.user_id)});
  return t;
}

inline void write_requests_csv(const std::filesystem::path& path,
                               const std::vector<RequestRecord>& records) {
  csv::write_file(path, to_table(records));
}

inline std::vector<RequestRecord> read_requests_csv(const std::filesystem::path& path) {
  const auto t = csv::read_file(path);
  const auto c_start = t.column("start_ms"), c_rt = t.column("response_time_ms"),
             c_ok = t.column("success"), c_user = t.column("user_id");
  std::vector<RequestRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows)
    out.push_back({csv::parse_int(row[c_start]), csv::parse_double(row[c_rt]), row[c_ok] == "1",
                   static_cast<int>(csv::parse_int(row[c_user]))});
  return out;
}

}  // namespace antipower::load
