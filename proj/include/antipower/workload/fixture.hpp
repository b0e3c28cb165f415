#pragma once

// Seeded synthetic stand-in for the Northwind sample database. Same table
// roles, same foreign keys, and the canonical cardinalities at scale 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>

#include "antipower/common/clock.hpp"
#include "antipower/common/error.hpp"

namespace antipower::workload {

struct Customer {
  std::string id;
  std::string company_name;
  std::string contact_name;
  std::string city;
  std::string country;
};

struct Order {
  std::int64_t id;
  std::string customer_id;
  int order_day;  // days since 1996-07-04
  double freight;
  std::string ship_city;
};

struct OrderDetail {
  std::int64_t order_id;
  std::int64_t product_id;
  double unit_price;
  int quantity;
  double discount;
};

struct Product {
  std::int64_t id;
  std::string name;
  std::int64_t supplier_id;
  double unit_price;
  int units_in_stock;
};

struct Supplier {
  std::int64_t id;
  std::string company_name;
  std::string country;
};

// Row counts of the canonical dataset.
struct Cardinalities {
  std::size_t customers = 91;
  std::size_t orders = 830;
  std::size_t order_details = 2155;
  std::size_t products = 77;
  std::size_t suppliers = 29;

  Cardinalities scaled(std::uint64_t scale) const {
    const auto s = static_cast<std::size_t>(scale);
    return {customers * s, orders * s, order_details * s, products * s, suppliers * s};
  }
};

class RelationalFixture {
 public:
  std::vector<Customer> customers;
  std::vector<Order> orders;  // ordered by id, ids 1..N, dates non-decreasing
  std::vector<OrderDetail> order_details;
  std::vector<Product> products;    // ids 1..N
  std::vector<Supplier> suppliers;  // ids 1..N

  // Builds the primary-key and foreign-key indexes. Call after mutating tables.
  void build_indexes() {
    customer_index_.clear();
    orders_by_customer_.clear();
    details_by_order_.clear();
    for (std::size_t i = 0; i < customers.size(); ++i) customer_index_[customers[i].id] = i;
    for (std::size_t i = 0; i < orders.size(); ++i)
      orders_by_customer_[orders[i].customer_id].push_back(i);
    for (std::size_t i = 0; i < order_details.size(); ++i)
      details_by_order_[order_details[i].order_id].push_back(i);
  }

  const Customer* customer(const std::string& id) const {
    auto it = customer_index_.find(id);
    return it == customer_index_.end() ? nullptr : &customers[it->second];
  }

  const Order* order(std::int64_t id) const {
    if (id < 1 || static_cast<std::size_t>(id) > orders.size()) return nullptr;
    return &orders[static_cast<std::size_t>(id - 1)];
  }

  const Product* product(std::int64_t id) const {
    if (id < 1 || static_cast<std::size_t>(id) > products.size()) return nullptr;
    return &products[static_cast<std::size_t>(id - 1)];
  }

  const Supplier* supplier(std::int64_t id) const {
    if (id < 1 || static_cast<std::size_t>(id) > suppliers.size()) return nullptr;
    return &suppliers[static_cast<std::size_t>(id - 1)];
  }

  const std::vector<std::size_t>& orders_of(const std::string& customer_id) const {
    static const std::vector<std::size_t> none;
    auto it = orders_by_customer_.find(customer_id);
    return it == orders_by_customer_.end() ? none : it->second;
  }

  const std::vector<std::size_t>& details_of(std::int64_t order_id) const {
    static const std::vector<std::size_t> none;
    auto it = details_by_order_.find(order_id);
    return it == details_by_order_.end() ? none : it->second;
  }

  // Every foreign key that fails to resolve, one message each.
  std::vector<std::string> integrity_violations() const {
    std::vector<std::string> out;
    for (const auto& o : orders)
      if (!customer(o.customer_id))
        out.push_back(fmt::format("order {} -> missing customer {}", o.id, o.customer_id));
    for (const auto& d : order_details) {
      if (!order(d.order_id))
        out.push_back(fmt::format("order_detail -> missing order {}", d.order_id));
      if (!product(d.product_id))
        out.push_back(fmt::format("order_detail -> missing product {}", d.product_id));
    }
    for (const auto& p : products)
      if (!supplier(p.supplier_id))
        out.push_back(fmt::format("product {} -> missing supplier {}", p.id, p.supplier_id));
    return out;
  }

  // Canonical text dump; equal dumps mean equal tables.
  std::string dump() const {
    std::ostringstream os;
    os << "customers\n";
    for (const auto& c : customers)
      os << c.id << '|' << c.company_name << '|' << c.contact_name << '|' << c.city << '|'
         << c.country << '\n';
    os << "orders\n";
    for (const auto& o : orders)
      os << fmt::format("{}|{}|{}|{:.2f}|{}\n", o.id, o.customer_id, o.order_day, o.freight,
                        o.ship_city);
    os << "order_details\n";
    for (const auto& d : order_details)
      os << fmt::format("{}|{}|{:.2f}|{}|{:.2f}\n", d.order_id, d.product_id, d.unit_price,
                        d.quantity, d.discount);
    os << "products\n";
    for (const auto& p : products)
      os << fmt::format("{}|{}|{}|{:.2f}|{}\n", p.id, p.name, p.supplier_id, p.unit_price,
                        p.units_in_stock);
    os << "suppliers\n";
    for (const auto& s : suppliers) os << fmt::format("{}|{}|{}\n", s.id, s.company_name, s.country);
    return os.str();
  }

 private:
  std::unordered_map<std::string, std::size_t> customer_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> orders_by_customer_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> details_by_order_;
};

namespace detail {

inline constexpr const char* kCities[] = {"Berlin", "Madrid",   "London",    "Lyon",  "Graz",
                                          "Bergamo", "Seattle", "Sao Paulo", "Bern",  "Lille",
                                          "Oulu",   "Portland", "Cork",      "Aarhus"};
inline constexpr const char* kCountries[] = {"Germany", "Spain",   "UK",      "France",
                                             "Austria", "Italy",   "USA",     "Brazil",
                                             "Switzerland", "Finland", "Ireland", "Denmark"};
inline constexpr const char* kWords[] = {"Alpha", "Nord", "Blue", "Golden", "Royal", "Prime",
                                         "Old",   "Star", "Grand", "Green", "Sun",   "Bay"};

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const T (&arr)[N]) {
  return arr[rng() % N];
}

inline double money(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::round((lo + u * (hi - lo)) * 100.0) / 100.0;
}

}  // namespace detail

// Deterministic for a given (seed, scale). Every foreign key resolves.
inline RelationalFixture generate_fixture(std::uint64_t seed, std::uint64_t scale) {
  if (scale < 1) throw UsageError("fixture scale must be >= 1");
  const Cardinalities n = Cardinalities{}.scaled(scale);
  std::mt19937_64 rng(seed);
  RelationalFixture f;

  f.suppliers.reserve(n.suppliers);
  for (std::size_t i = 0; i < n.suppliers; ++i)
    f.suppliers.push_back({static_cast<std::int64_t>(i + 1),
                           fmt::format("{} Supply {}", detail::pick(rng, detail::kWords), i + 1),
                           detail::pick(rng, detail::kCountries)});

  f.products.reserve(n.products);
  for (std::size_t i = 0; i < n.products; ++i)
    f.products.push_back({static_cast<std::int64_t>(i + 1),
                          fmt::format("{} Product {}", detail::pick(rng, detail::kWords), i + 1),
                          static_cast<std::int64_t>(rng() % n.suppliers + 1),
                          detail::money(rng, 2.5, 263.5), static_cast<int>(rng() % 125)});

  f.customers.reserve(n.customers);
  for (std::size_t i = 0; i < n.customers; ++i)
    f.customers.push_back({fmt::format("C{:05d}", i + 1),
                           fmt::format("{} Trading {}", detail::pick(rng, detail::kWords), i + 1),
                           fmt::format("Contact {}", i + 1), detail::pick(rng, detail::kCities),
                           detail::pick(rng, detail::kCountries)});

  f.orders.reserve(n.orders);
  int day = 0;
  for (std::size_t i = 0; i < n.orders; ++i) {
    day += static_cast<int>(rng() % 2);
    f.orders.push_back({static_cast<std::int64_t>(i + 1), f.customers[rng() % n.customers].id, day,
                        detail::money(rng, 0.02, 1007.64), detail::pick(rng, detail::kCities)});
  }

  // One detail per order, the remainder spread at random; products are
  // distinct within an order.
  std::vector<std::vector<std::int64_t>> lines(n.orders);
  auto add_line = [&](std::size_t o) {
    if (lines[o].size() >= n.products) return false;
    std::int64_t p;
    do {
      p = static_cast<std::int64_t>(rng() % n.products + 1);
    } while (std::find(lines[o].begin(), lines[o].end(), p) != lines[o].end());
    lines[o].push_back(p);
    return true;
  };
  for (std::size_t o = 0; o < n.orders; ++o) add_line(o);
  for (std::size_t extra = n.order_details - n.orders; extra > 0;)
    if (add_line(rng() % n.orders)) --extra;

  f.order_details.reserve(n.order_details);
  for (std::size_t o = 0; o < n.orders; ++o)
    for (std::int64_t p : lines[o])
      f.order_details.push_back({static_cast<std::int64_t>(o + 1), p,
                                 f.products[static_cast<std::size_t>(p - 1)].unit_price,
                                 static_cast<int>(rng() % 120 + 1),
                                 static_cast<double>(rng() % 5) * 0.05});

  f.build_indexes();
  return f;
}

// Burns CPU for a fixed wall interval; stands in for a database round trip.
inline void spin_for_us(std::uint64_t us) {
  if (us == 0) return;
  const auto until = SteadyClock::now() + std::chrono::microseconds(us);
  volatile std::uint64_t sink = 0;
  while (SteadyClock::now() < until)
    for (int i = 0; i < 64; ++i) sink = sink + static_cast<std::uint64_t>(i);
}

// A read-only "connection" to the fixture. Every query is one lookup and
// pays `lookup_cost_us`.
class FixtureSession {
 public:
  FixtureSession(const RelationalFixture& fixture, std::uint64_t lookup_cost_us,
                 std::uint64_t open_cost_us = 0)
      : fixture_(&fixture), lookup_cost_us_(lookup_cost_us) {
    spin_for_us(open_cost_us);
  }

  std::size_t lookups() const { return lookups_; }

  const Customer* customer(const std::string& id) {
    charge();
    return fixture_->customer(id);
  }

  // Ids of the customer's `limit` most recent orders, newest first.
  std::vector<std::int64_t> recent_orders(const std::string& customer_id, std::size_t limit) {
    charge();
    std::vector<std::int64_t> ids;
    const auto& idx = fixture_->orders_of(customer_id);
    for (auto it = idx.rbegin(); it != idx.rend() && ids.size() < limit; ++it)
      ids.push_back(fixture_->orders[*it].id);
    return ids;
  }

  // Row handles (positions) of an order's detail lines.
  std::vector<std::size_t> detail_keys(std::int64_t order_id) {
    charge();
    return fixture_->details_of(order_id);
  }

  const OrderDetail& detail(std::size_t key) {
    charge();
    return fixture_->order_details.at(key);
  }

  const Product* product(std::int64_t id) {
    charge();
    return fixture_->product(id);
  }

  const Supplier* supplier(std::int64_t id) {
    charge();
    return fixture_->supplier(id);
  }

 private:
  void charge() {
    ++lookups_;
    spin_for_us(lookup_cost_us_);
  }

  const RelationalFixture* fixture_;
  std::uint64_t lookup_cost_us_;
  std::size_t lookups_ = 0;
};

}  // namespace antipower::workload
