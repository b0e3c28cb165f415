#pragma once

// One handler per antipattern. Each deliberately commits its antipattern on
// the request path; none of them is meant to be efficient.

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <new>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "antipower/common/clock.hpp"
#include "antipower/common/digest.hpp"
#include "antipower/workload/state.hpp"

namespace antipower::workload {

struct WorkResponse {
  bool ok = true;
  nlohmann::json summary = nlohmann::json::object();
  double server_elapsed_ms = 0.0;

  nlohmann::json to_json(AntipatternKind kind) const {
    return {{"antipattern", std::string(slug(kind))},
            {"status", ok ? "success" : "failure"},
            {"summary", summary},
            {"server_elapsed_ms", server_elapsed_ms}};
  }
};

namespace detail {

template <typename F>
WorkResponse timed(F&& body) {
  const auto t0 = SteadyClock::now();
  WorkResponse r;
  try {
    r = body();
  } catch (const std::bad_alloc&) {
    r.ok = false;
    r.summary = {{"error", "memory exhausted"}};
  } catch (const std::exception& e) {
    r.ok = false;
    r.summary = {{"error", e.what()}};
  }
  r.server_elapsed_ms = elapsed_ms(t0);
  return r;
}

inline std::string random_text(std::uint64_t seed, std::size_t len, std::string_view alphabet) {
  std::mt19937_64 rng(seed);
  std::string s(len, ' ');
  for (auto& c : s) c = alphabet[rng() % alphabet.size()];
  return s;
}

inline constexpr std::string_view kAlnum =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Trigonometry, exponentiation and primality; the result is thrown away.
inline double math_kernel(std::uint64_t steps, std::uint64_t offset = 0) {
  double acc = 0.0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double x = static_cast<double>((i + offset) % 10000) * 1e-3;
    acc += std::sin(x) * std::cos(x) + std::tan(x * 0.25);
    acc += std::exp(-x) + std::pow(x + 1.0, 0.33);
    if (is_prime((i + offset) % 4096 + 2)) acc += 1.0;
  }
  return acc;
}

inline double spin_kernel(std::uint64_t steps, double x) {
  for (std::uint64_t i = 0; i < steps; ++i) x = std::sqrt(x * 1.000001 + 1.0);
  return x;
}

}  // namespace detail

// Hash, validate, sort and copy the payload `iterations` times, append it to
// an ever-growing store, concatenate and slice the whole store, then churn
// through JSON. Runs on the service's single processing thread, so concurrent
// callers wait for each other.
inline WorkResponse handle_unbalanced_processing(ServiceState& state) {
  const std::uint64_t seed = state.next_random();
  return state.processing_lane.run([&state, seed] {
    return detail::timed([&] {
      const auto& cfg = state.config();
      const std::string payload =
          detail::random_text(seed, static_cast<std::size_t>(cfg.payload_size), detail::kAlnum);

      std::string digest;
      std::size_t valid = 0;
      for (std::uint64_t i = 0; i < cfg.iterations; ++i) {
        digest = to_hex(sha256(payload + std::to_string(i)));
        valid += std::all_of(payload.begin(), payload.end(),
                             [](unsigned char c) { return std::isalnum(c) != 0; });
        std::vector<std::string> tokens;
        for (std::size_t p = 0; p < payload.size(); p += 16) tokens.push_back(payload.substr(p, 16));
        std::sort(tokens.begin(), tokens.end());
        std::vector<std::string> copy = tokens;
        valid += copy.size() == tokens.size();
      }

      std::string concatenated;
      std::size_t store_size = 0;
      {
        std::lock_guard lk(state.unbalanced.mu);
        if (state.unbalanced.items.size() >= cfg.max_store_items) {
          WorkResponse r;
          r.ok = false;
          r.summary = {{"error", "store capacity reached"},
                       {"store_size", state.unbalanced.items.size()}};
          return r;
        }
        state.unbalanced.items.push_back(payload);
        store_size = state.unbalanced.items.size();
        for (const auto& item : state.unbalanced.items) concatenated += item;
      }
      const std::size_t mid = concatenated.size() / 2;
      const std::string slice = concatenated.substr(mid, cfg.payload_size);
      const auto churned = nlohmann::json::parse(
          nlohmann::json{{"slice", slice}, {"digest", to_hex(sha256(concatenated))}}.dump());

      WorkResponse r;
      r.summary = {{"store_size", store_size},
                   {"digest", churned.at("digest").get<std::string>().substr(0, 16)},
                   {"validated", valid}};
      return r;
    });
  });
}

// A fixed number of math-loop steps whose outcome never reaches the reply.
inline WorkResponse handle_unnecessary_processing(ServiceState& state) {
  return detail::timed([&] {
    volatile double sink = detail::math_kernel(state.config().iterations);
    (void)sink;
    WorkResponse r;
    r.summary = {{"result", "done"}};
    return r;
  });
}

// Append a random item, then linearly search the whole store for a random
// target and sort the matches.
inline WorkResponse handle_the_ramp(ServiceState& state) {
  const std::uint64_t item_seed = state.next_random();
  const std::uint64_t target_seed = state.next_random();
  return detail::timed([&] {
    const auto& cfg = state.config();
    constexpr std::string_view alphabet = "abcdefghijklmnop";
    std::string item = detail::random_text(item_seed, cfg.payload_size, alphabet);
    const std::string target = detail::random_text(target_seed, 3, alphabet);

    {
      std::unique_lock lk(state.ramp.mu);
      if (state.ramp.items.size() >= cfg.max_store_items) {
        WorkResponse r;
        r.ok = false;
        r.summary = {{"error", "store capacity reached"}, {"store_size", state.ramp.items.size()}};
        return r;
      }
      state.ramp.items.push_back(std::move(item));
    }

    std::vector<std::string> matches;
    std::size_t store_size = 0;
    {
      std::shared_lock lk(state.ramp.mu);
      store_size = state.ramp.items.size();
      for (const auto& candidate : state.ramp.items)
        if (candidate.find(target) != std::string::npos) matches.push_back(candidate);
    }
    std::sort(matches.begin(), matches.end());

    WorkResponse r;
    r.summary = {{"store_size", store_size}, {"matches", matches.size()}, {"target", target}};
    return r;
  });
}

// Materialize every order joined with its customer, then hand back one page.
inline WorkResponse handle_sisyphus_retrieval(ServiceState& state, std::uint64_t page,
                                              std::uint64_t page_size) {
  return detail::timed([&] {
    if (page_size < 1) throw std::invalid_argument("page_size must be >= 1");
    const auto& fx = state.fixture();

    std::unordered_map<std::string, nlohmann::json> customers;
    for (const auto& c : fx.customers)
      customers.emplace(c.id, nlohmann::json{{"customer_id", c.id},
                                             {"company", c.company_name},
                                             {"contact", c.contact_name},
                                             {"city", c.city},
                                             {"country", c.country}});

    std::vector<nlohmann::json> rows;
    for (const auto& o : fx.orders) {
      nlohmann::json row = customers.at(o.customer_id);
      row["order_id"] = o.id;
      row["order_day"] = o.order_day;
      row["freight"] = o.freight;
      row["ship_city"] = o.ship_city;
      row["label"] = fmt::format("#{} {} ({})", o.id, row["company"].get<std::string>(), o.ship_city);
      rows.push_back(std::move(row));
    }

    nlohmann::json page_rows = nlohmann::json::array();
    const std::uint64_t first = page > rows.size() / page_size ? rows.size() : page * page_size;
    for (std::uint64_t i = first; i < rows.size() && i < first + page_size; ++i)
      page_rows.push_back(rows[i]);

    WorkResponse r;
    r.summary = {{"page", page},
                 {"page_size", page_size},
                 {"returned", page_rows.size()},
                 {"scanned_count", rows.size()},
                 {"rows", std::move(page_rows)}};
    return r;
  });
}

inline WorkResponse handle_sisyphus_retrieval(ServiceState& state) {
  const auto total = state.fixture().orders.size();
  const auto size = state.config().page_size;
  const auto pages = std::max<std::uint64_t>(1, (total + size - 1) / size);
  return handle_sisyphus_retrieval(state, state.next_random() % pages, size);
}

// Split the work over `workers` threads that synchronize on a shared
// accumulator, then do the same total work on one thread.
inline WorkResponse handle_more_is_less(ServiceState&, std::uint64_t workers,
                                        std::uint64_t iterations) {
  return detail::timed([&] {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    constexpr std::uint64_t chunk = 4096;

    const auto multi_start = SteadyClock::now();
    std::mutex acc_mu;
    double shared_acc = 0.0;
    // every worker waits for all the others after each chunk
    std::barrier round(static_cast<std::ptrdiff_t>(workers));
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::uint64_t w = 0; w < workers; ++w) {
        const std::uint64_t share = iterations / workers + (w < iterations % workers ? 1 : 0);
        try {
          pool.emplace_back([&, share, w] {
            double x = static_cast<double>(w);
            for (std::uint64_t done = 0; done < share; done += chunk) {
              x = detail::spin_kernel(std::min(chunk, share - done), x);
              {
                std::lock_guard lk(acc_mu);
                shared_acc += x;
              }
              round.arrive_and_wait();
            }
            round.arrive_and_drop();
          });
        } catch (...) {
          // workers that never started must not hold up the ones that did
          for (std::uint64_t k = w; k < workers; ++k) round.arrive_and_drop();
          throw;
        }
      }
    }
    const double multi_ms = elapsed_ms(multi_start);

    const auto single_start = SteadyClock::now();
    double single_acc = 0.0;
    double x = 0.0;
    for (std::uint64_t done = 0; done < iterations; done += chunk) {
      x = detail::spin_kernel(std::min(chunk, iterations - done), x);
      single_acc += x;
    }
    const double single_ms = elapsed_ms(single_start);
    volatile double sink = shared_acc + single_acc;
    (void)sink;

    WorkResponse r;
    r.summary = {{"workers", workers},
                 {"iterations", iterations},
                 {"multi_ms", multi_ms},
                 {"single_ms", single_ms}};
    return r;
  });
}

inline WorkResponse handle_more_is_less(ServiceState& state) {
  return handle_more_is_less(state, state.config().worker_count, state.config().iterations);
}

// Everything in one routine: parsing, counting, hashing, caching through a
// freshly opened fixture session, optional processing and storage.
inline WorkResponse handle_god_class(ServiceState& state, std::optional<std::string> payload) {
  if (!payload) {
    const auto& customers = state.fixture().customers;
    const auto& pick = customers[state.next_random() % customers.size()];
    payload = nlohmann::json{{"customer_id", pick.id}, {"process", state.next_random() % 4 == 0}}
                  .dump();
  }
  return detail::timed([&] {
    const auto& cfg = state.config();
    auto& god = state.god;

    nlohmann::json request = nlohmann::json::parse(*payload, nullptr, false);
    const bool well_formed = !request.is_discarded() && request.is_object() &&
                             request.contains("customer_id") && request["customer_id"].is_string();
    if (!well_formed) {
      std::lock_guard lk(god.mu);
      ++god.error_count;
      WorkResponse r;
      r.summary = {{"error", "malformed payload"},
                   {"request_count", god.request_count},
                   {"error_count", god.error_count}};
      return r;
    }
    {
      std::lock_guard lk(god.mu);
      ++god.request_count;
    }

    const std::string digest = cfg.iterations ? to_hex(sha256_chain(*payload, cfg.iterations)) : "";
    const auto customer_id = request["customer_id"].get<std::string>();

    bool cache_hit = false;
    {
      std::lock_guard lk(god.mu);
      cache_hit = god.cache.count(customer_id) > 0;
    }
    FixtureSession session(state.fixture(), cfg.lookup_cost_us, cfg.session_open_cost_us);
    const Customer* customer = session.customer(customer_id);
    nlohmann::json data = nullptr;
    if (customer) {
      data = {{"customer_id", customer->id}, {"company", customer->company_name}};
      std::lock_guard lk(god.mu);
      god.cache[customer_id] = customer->company_name;
    }

    const bool process = request.value("process", false);
    if (process && customer) {
      FixtureSession processing(state.fixture(), cfg.lookup_cost_us, cfg.session_open_cost_us);
      double total = 0.0;
      std::size_t lines = 0;
      for (auto oid : processing.recent_orders(customer_id, std::numeric_limits<std::size_t>::max()))
        for (auto key : processing.detail_keys(oid)) {
          const auto& d = processing.detail(key);
          total += d.unit_price * d.quantity * (1.0 - d.discount);
          ++lines;
        }
      data["lifetime_value"] = std::round(total * 100.0) / 100.0;
      data["order_lines"] = lines;
      std::lock_guard lk(god.mu);
      if (god.storage.size() < cfg.max_store_items) god.storage.push_back(data.dump());
    }

    WorkResponse r;
    std::lock_guard lk(god.mu);
    r.summary = {{"data", data},
                 {"digest", digest.substr(0, 16)},
                 {"cache_hit", cache_hit},
                 {"processed", process && customer},
                 {"request_count", god.request_count},
                 {"error_count", god.error_count},
                 {"cache_size", god.cache.size()},
                 {"stored", god.storage.size()}};
    return r;
  });
}

namespace detail {

struct ProductRecord {
  std::string key;
  std::string supplier;
  std::string price;
  std::string tag;
};

inline std::uint64_t checksum_records(const std::vector<ProductRecord>& recs) {
  std::uint64_t sum = 0;
  for (const auto& r : recs) sum += r.key.size() * 31 + r.supplier.size() * 7 + r.price.size() + r.tag.size();
  return sum;
}

}  // namespace detail

// Same logical work twice: phase A allocates fresh containers and strings on
// every iteration, phase B reuses buffers from the previous iteration.
inline WorkResponse handle_excessive_dynamic_allocation(ServiceState& state,
                                                        std::uint64_t iterations) {
  return detail::timed([&] {
    const auto& fx = state.fixture();
    using detail::ProductRecord;

    std::uint64_t checksum_a = 0;
    const auto a_start = SteadyClock::now();
    for (std::uint64_t it = 0; it < iterations; ++it) {
      std::vector<ProductRecord> records;
      std::vector<std::pair<std::string, std::size_t>> index;
      std::unordered_map<std::int64_t, std::vector<std::string>> by_supplier;
      for (const auto& p : fx.products) {
        const auto* s = fx.supplier(p.supplier_id);
        ProductRecord rec{p.name + "#" + std::to_string(p.id), s->company_name + " / " + s->country,
                          fmt::format("{:.2f} EUR", p.unit_price),
                          std::string("stock:") + std::to_string(p.units_in_stock) + ":" + s->country};
        index.emplace_back(rec.key, records.size());
        by_supplier[p.supplier_id].push_back(rec.key);
        records.push_back(std::move(rec));
      }
      std::sort(index.begin(), index.end());
      for (const auto& rec : records)
        checksum_a += std::lower_bound(index.begin(), index.end(),
                                       std::pair<std::string, std::size_t>{rec.key, 0})->second;
      for (const auto& [sid, keys] : by_supplier) checksum_a += keys.size() * static_cast<std::uint64_t>(sid);
      checksum_a += detail::checksum_records(records);
    }
    const double phase_a_ms = elapsed_ms(a_start);

    std::uint64_t checksum_b = 0;
    const auto b_start = SteadyClock::now();
    std::vector<ProductRecord> records(fx.products.size());
    std::vector<std::pair<std::string, std::size_t>> index(fx.products.size());
    std::vector<std::vector<std::string>> by_supplier(fx.suppliers.size() + 1);
    std::vector<std::size_t> used_slots(fx.suppliers.size() + 1);
    std::string number;
    for (std::uint64_t it = 0; it < iterations; ++it) {
      std::fill(used_slots.begin(), used_slots.end(), 0);
      for (std::size_t i = 0; i < fx.products.size(); ++i) {
        const auto& p = fx.products[i];
        const auto* s = fx.supplier(p.supplier_id);
        auto& rec = records[i];
        rec.key.assign(p.name).append("#");
        number.clear();
        fmt::format_to(std::back_inserter(number), "{}", p.id);
        rec.key.append(number);
        rec.supplier.assign(s->company_name).append(" / ").append(s->country);
        rec.price.clear();
        fmt::format_to(std::back_inserter(rec.price), "{:.2f} EUR", p.unit_price);
        rec.tag.assign("stock:");
        number.clear();
        fmt::format_to(std::back_inserter(number), "{}", p.units_in_stock);
        rec.tag.append(number).append(":").append(s->country);
        index[i].first.assign(rec.key);
        index[i].second = i;
        auto& bucket = by_supplier[static_cast<std::size_t>(p.supplier_id)];
        auto& slot = used_slots[static_cast<std::size_t>(p.supplier_id)];
        if (slot == bucket.size()) bucket.emplace_back();
        bucket[slot++].assign(rec.key);
      }
      std::sort(index.begin(), index.end());
      for (const auto& rec : records)
        checksum_b += std::lower_bound(index.begin(), index.end(), rec.key,
                                       [](const auto& e, const std::string& k) { return e.first < k; })
                          ->second;
      for (std::size_t sid = 1; sid < used_slots.size(); ++sid)
        checksum_b += used_slots[sid] * sid;
      checksum_b += detail::checksum_records(records);
    }
    const double phase_b_ms = elapsed_ms(b_start);

    WorkResponse r;
    r.summary = {{"iterations", iterations},
                 {"records_per_iteration", fx.products.size()},
                 {"phase_a_ms", phase_a_ms},
                 {"phase_b_ms", phase_b_ms},
                 {"checksum_a", checksum_a},
                 {"checksum_b", checksum_b}};
    return r;
  });
}

inline WorkResponse handle_excessive_dynamic_allocation(ServiceState& state) {
  return handle_excessive_dynamic_allocation(state, state.config().iterations);
}

// customer -> recent orders -> detail keys per order -> each detail row ->
// its product -> that product's supplier, one dependent lookup at a time.
inline WorkResponse handle_circuitous_treasure_hunt(ServiceState& state,
                                                    std::optional<std::string> customer_id) {
  if (!customer_id) {
    const auto& customers = state.fixture().customers;
    customer_id = customers[state.next_random() % customers.size()].id;
  }
  return detail::timed([&] {
    const auto& cfg = state.config();
    FixtureSession session(state.fixture(), cfg.lookup_cost_us);
    WorkResponse r;
    const Customer* customer = session.customer(*customer_id);
    if (!customer) {
      r.summary = {{"customer", nullptr}, {"orders", nlohmann::json::array()},
                   {"lookups", session.lookups()}};
      return r;
    }
    nlohmann::json orders = nlohmann::json::array();
    for (auto oid : session.recent_orders(customer->id, cfg.recent_orders)) {
      nlohmann::json lines = nlohmann::json::array();
      for (auto key : session.detail_keys(oid)) {
        const auto& d = session.detail(key);
        const Product* p = session.product(d.product_id);
        const Supplier* s = session.supplier(p->supplier_id);
        lines.push_back({{"product", p->name},
                         {"supplier", s->company_name},
                         {"quantity", d.quantity},
                         {"unit_price", d.unit_price}});
      }
      orders.push_back({{"order_id", oid}, {"lines", std::move(lines)}});
    }
    r.summary = {{"customer", customer->company_name},
                 {"orders", std::move(orders)},
                 {"lookups", session.lookups()}};
    return r;
  });
}

// Serialize every caller on one process-wide lock and hash while holding it.
inline WorkResponse handle_one_lane_bridge(ServiceState& state) {
  return detail::timed([&] {
    auto& bridge = state.bridge;
    const bool queued = !bridge.gate.try_lock();
    if (queued) bridge.gate.lock();
    std::lock_guard lk(bridge.gate, std::adopt_lock);

    const int inside = ++bridge.occupancy;
    int seen = bridge.max_occupancy.load();
    while (inside > seen && !bridge.max_occupancy.compare_exchange_weak(seen, inside)) {
    }
    const auto t0 = SteadyClock::now();
    const auto iterations = state.config().iterations;
    const std::string seed = bridge.last_digest + std::to_string(bridge.crossings);
    bridge.last_digest = iterations ? to_hex(sha256_chain(seed, iterations)) : seed;
    const std::uint64_t crossings = ++bridge.crossings;
    const double critical_ms = elapsed_ms(t0);
    --bridge.occupancy;

    WorkResponse r;
    r.summary = {{"crossings", crossings}, {"queued", queued}, {"critical_ms", critical_ms}};
    return r;
  });
}

// Light work by default; heavy work during the last `heavy_fraction` of each
// period. Heavy requests leave behind a work debt that decays over one heavy
// window and is paid off by the next normal-window requests.
inline WorkResponse handle_traffic_jam(ServiceState& state, double now_s) {
  constexpr double kHeavyMultiplier = 8.0;
  constexpr double kDebtPerHeavy = 2.0;
  constexpr double kMaxPayment = 4.0;
  return detail::timed([&] {
    const auto& cfg = state.config();
    const double period = cfg.window_period_s;
    const double heavy_len = cfg.heavy_fraction * period;
    const double base = static_cast<double>(cfg.iterations);

    double work = base;
    double paid = 0.0;
    bool heavy = false;
    double debt_after = 0.0;
    {
      auto& jam = state.jam;
      std::lock_guard lk(jam.mu);
      double pos = std::fmod(now_s - jam.origin_s, period);
      if (pos < 0) pos += period;
      heavy = pos >= period - heavy_len;
      const double dt = std::max(0.0, now_s - jam.last_s);
      jam.debt_units *= std::exp(-dt / heavy_len);
      jam.last_s = std::max(jam.last_s, now_s);
      if (heavy) {
        work = base * kHeavyMultiplier;
        jam.debt_units += base * kDebtPerHeavy;
      } else {
        paid = std::min(jam.debt_units, base * kMaxPayment);
        jam.debt_units -= paid;
        work = base + paid;
      }
      debt_after = jam.debt_units;
    }
    volatile double sink = detail::math_kernel(static_cast<std::uint64_t>(work));
    (void)sink;

    WorkResponse r;
    r.summary = {{"phase", heavy ? "heavy" : "normal"},
                 {"backlog", !heavy && paid > 0.0},
                 {"backlog_paid_units", paid},
                 {"debt_units", debt_after},
                 {"work_units", work}};
    return r;
  });
}

}  // namespace antipower::workload
