#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "antipower/common/error.hpp"

namespace antipower::workload {

// The ten antipatterns of the Smith/Williams catalog.
enum class AntipatternKind {
  UnbalancedProcessing,
  UnnecessaryProcessing,
  TheRamp,
  SisyphusRetrieval,
  MoreIsLess,
  GodClass,
  ExcessiveDynamicAllocation,
  CircuitousTreasureHunt,
  OneLaneBridge,
  TrafficJam,
};

inline constexpr std::array<AntipatternKind, 10> all_kinds = {
    AntipatternKind::UnbalancedProcessing,       AntipatternKind::UnnecessaryProcessing,
    AntipatternKind::TheRamp,                    AntipatternKind::SisyphusRetrieval,
    AntipatternKind::MoreIsLess,                 AntipatternKind::GodClass,
    AntipatternKind::ExcessiveDynamicAllocation, AntipatternKind::CircuitousTreasureHunt,
    AntipatternKind::OneLaneBridge,              AntipatternKind::TrafficJam,
};

struct KindInfo {
  AntipatternKind kind;
  std::string_view slug;          // endpoint path without the leading '/'
  std::string_view display_name;  // row label used in report tables
  int default_users;              // closed-loop users for a campaign
};

// Default user counts: 50 everywhere except Unbalanced (10), Unnecessary (30)
// and Traffic Jam (30).
inline constexpr std::array<KindInfo, 10> kind_table = {{
    {AntipatternKind::UnbalancedProcessing, "unbalanced-processing", "Unbalanced Processing", 10},
    {AntipatternKind::UnnecessaryProcessing, "unnecessary-processing", "Unnecessary Processing", 30},
    {AntipatternKind::TheRamp, "the-ramp", "The Ramp", 50},
    {AntipatternKind::SisyphusRetrieval, "sisyphus-retrieval", "Sisyphus DB Retrieval", 50},
    {AntipatternKind::MoreIsLess, "more-is-less", "More Is Less", 50},
    {AntipatternKind::GodClass, "god-class", "God Class", 50},
    {AntipatternKind::ExcessiveDynamicAllocation, "excessive-dynamic-allocation",
     "Excessive Dynamic Allocation", 50},
    {AntipatternKind::CircuitousTreasureHunt, "circuitous-treasure-hunt", "Circuitous Treasure Hunt",
     50},
    {AntipatternKind::OneLaneBridge, "one-lane-bridge", "One Lane Bridge", 50},
    {AntipatternKind::TrafficJam, "traffic-jam", "Traffic Jam", 30},
}};

inline const KindInfo& info(AntipatternKind kind) {
  for (const auto& k : kind_table)
    if (k.kind == kind) return k;
  return kind_table.front();  // unreachable for valid enumerators
}

inline std::string_view slug(AntipatternKind kind) { return info(kind).slug; }
inline int default_users(AntipatternKind kind) { return info(kind).default_users; }

inline std::optional<AntipatternKind> parse_kind(std::string_view slug) {
  for (const auto& k : kind_table)
    if (k.slug == slug) return k.kind;
  return std::nullopt;
}

inline std::string valid_slugs();

// parse_kind that throws a usage error listing the valid slugs.
inline AntipatternKind require_kind(std::string_view slug) {
  if (auto k = parse_kind(slug)) return *k;
  throw UsageError("unknown antipattern '" + std::string(slug) + "'; valid: " + valid_slugs());
}

inline std::string valid_slugs() {
  std::string out;
  for (const auto& k : kind_table) {
    if (!out.empty()) out += ", ";
    out += k.slug;
  }
  return out;
}

}  // namespace antipower::workload
