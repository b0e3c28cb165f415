#pragma once

// Report bundle: one CSV per table, per-run timelines and a Markdown report.
// report.md is rendered from the CSV files, never from in-memory numbers, so
// the two cannot disagree.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "antipower/common/csv.hpp"
#include "antipower/orchestrator/artifact.hpp"
#include "antipower/stats/analyze.hpp"
#include "antipower/workload/kind.hpp"

namespace antipower::report {

namespace fs = std::filesystem;

namespace detail {

// Fixed decimals. Tiny negative estimates keep their sign ("-0.000000").
inline std::string f(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

inline std::string opt(const std::optional<double>& v, int decimals) {
  return v ? f(*v, decimals) : std::string{};
}

inline std::string flag(bool b) { return b ? "true" : "false"; }

inline std::string display_name(const std::string& slug) {
  if (auto k = workload::parse_kind(slug)) return std::string(workload::info(*k).display_name);
  return slug.empty() ? std::string("(unknown)") : slug;
}

inline const stats::Descriptive* find_metric(const stats::CampaignAnalysis& a, const char* name) {
  for (const auto& m : a.descriptive)
    if (m.metric == name) return &m.stats;
  return nullptr;
}

}  // namespace detail

inline csv::Table descriptive_table(const stats::CampaignAnalysis& a) {
  csv::Table t;
  t.header = {"experiment",  "rt_mean_ms",  "rt_min_ms",    "rt_max_ms",    "cpu_mean_w",
              "cpu_min_w",   "cpu_max_w",   "dram_mean_w",  "dram_min_w",   "dram_max_w",
              "cpu_util_mean", "req_rate_mean", "rows"};
  auto triple = [&](const char* name, int dec, std::vector<std::string>& row) {
    const auto* d = detail::find_metric(a, name);
    for (int i = 0; i < 3; ++i)
      row.push_back(d ? detail::f(i == 0 ? d->mean : i == 1 ? d->min : d->max, dec) : "");
  };
  std::vector<std::string> row{a.antipattern};
  triple("rt_ms", 2, row);
  triple("cpu_power_w", 2, row);
  triple("dram_power_w", 2, row);
  const auto* u = detail::find_metric(a, "cpu_util");
  row.push_back(u ? detail::f(u->mean, 4) : "");
  const auto* q = detail::find_metric(a, "req_rate");
  row.push_back(q ? detail::f(q->mean, 2) : "");
  row.push_back(std::to_string(a.pooled_rows));
  t.rows.push_back(row);
  return t;
}

inline csv::Table correlation_table(const stats::CampaignAnalysis& a) {
  csv::Table t;
  t.header = {"experiment",  "level", "cpu_pearson_r",  "cpu_spearman_rho",  "cpu_sign_agreement",
              "dram_pearson_r", "dram_spearman_rho", "dram_sign_agreement", "cpu_n", "dram_n"};
  for (const char* level : {"pooled", "per_run"}) {
    std::vector<std::string> row{a.antipattern, level};
    std::string n_cpu, n_dram;
    for (const char* power : {"cpu_power_w", "dram_power_w"}) {
      const stats::CorrelationRow* c = nullptr;
      for (const auto& r : a.correlations)
        if (r.level == level && r.power == power) c = &r;
      if (c) {
        row.push_back(detail::opt(c->pair.pearson_r, 3));
        row.push_back(detail::opt(c->pair.spearman_rho, 3));
        row.push_back(detail::flag(c->pair.sign_agreement()));
        (std::string(power) == "cpu_power_w" ? n_cpu : n_dram) = std::to_string(c->pair.n);
      } else {
        row.insert(row.end(), {"", "", "false"});
      }
    }
    row.push_back(n_cpu);
    row.push_back(n_dram);
    t.rows.push_back(row);
  }
  return t;
}

inline csv::Table regression_table(const stats::CampaignAnalysis& a) {
  csv::Table t;
  t.header = {"experiment", "model", "n", "beta_lat", "ci_low", "ci_high", "p_lat", "decision", "r2", "note"};
  for (const auto* m : {&a.cpu, &a.dram}) {
    std::vector<std::string> row{a.antipattern, stats::to_string(m->model)};
    if (m->error) {
      row.insert(row.end(), {"", "", "", "", "", "", "", *m->error});
    } else {
      std::string note;
      for (const auto& w : m->warnings) note += (note.empty() ? "" : "; ") + w;
      row.insert(row.end(), {std::to_string(m->n), detail::f(m->rt.beta, 6), detail::f(m->rt.ci_low, 6),
                             detail::f(m->rt.ci_high, 6), detail::f(m->rt.p_value, 6),
                             stats::to_string(m->rt.decision), detail::f(m->r2, 4), note});
    }
    t.rows.push_back(row);
  }
  return t;
}

inline csv::Table energy_table(const stats::CampaignAnalysis& a) {
  csv::Table t;
  t.header = {"experiment", "repetition", "cpu_kj", "dram_kj"};
  double cpu = 0, dram = 0;
  std::size_t nc = 0, nd = 0;
  for (const auto& e : a.energy) {
    t.rows.push_back({a.antipattern, std::to_string(e.repetition),
                      e.cpu_j ? detail::f(*e.cpu_j / 1000.0, 6) : "",
                      e.dram_j ? detail::f(*e.dram_j / 1000.0, 6) : ""});
    if (e.cpu_j) cpu += *e.cpu_j, ++nc;
    if (e.dram_j) dram += *e.dram_j, ++nd;
  }
  t.rows.push_back({a.antipattern, "mean", nc ? detail::f(cpu / static_cast<double>(nc) / 1000.0, 6) : "",
                    nd ? detail::f(dram / static_cast<double>(nd) / 1000.0, 6) : ""});
  return t;
}

inline csv::Table diagnostics_table(const stats::CampaignAnalysis& a) {
  csv::Table t;
  t.header = {"experiment", "model", "test", "n", "statistic", "p_value", "null_rejected"};
  for (const auto* m : {&a.cpu, &a.dram})
    for (const auto* d : {&m->breusch_pagan, &m->anderson_darling})
      if (*d)
        t.rows.push_back({a.antipattern, stats::to_string(m->model), (*d)->test, std::to_string((*d)->n),
                          detail::f((*d)->statistic, 6), detail::f((*d)->p_value, 6),
                          detail::flag((*d)->null_rejected)});
  return t;
}

inline csv::Table validity_table(const stats::CampaignAnalysis& a) {
  csv::Table t;
  t.header = {"repetition", "requests", "failures", "zero_failures", "mean_cpu_util", "cpu_floor_threshold",
              "cpu_floor"};
  for (const auto& v : a.validity)
    t.rows.push_back({std::to_string(v.repetition), std::to_string(v.requests), std::to_string(v.failures),
                      detail::flag(v.zero_failures), detail::opt(v.mean_cpu_util, 4),
                      detail::f(v.cpu_floor_threshold, 4), detail::flag(v.cpu_floor)});
  return t;
}

inline csv::Table timeline_table(const stats::RunTimeline& tl) {
  csv::Table t;
  t.header = {"t_s", "t_rel_s", "rt_ms", "req_rate", "failures", "cpu_util", "cpu_power_w", "dram_power_w"};
  for (const auto& r : tl.rows)
    t.rows.push_back({std::to_string(r.t_s), detail::f(r.t_rel_s, 3), detail::opt(r.rt_ms, 3),
                      std::to_string(r.req_rate), std::to_string(r.failures), detail::opt(r.cpu_util, 6),
                      detail::opt(r.cpu_power_w, 2), detail::opt(r.dram_power_w, 2)});
  return t;
}

inline nlohmann::json summary_json(const stats::CampaignAnalysis& a) {
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : a.skipped) skipped.push_back({{"repetition", s.repetition}, {"reason", s.reason}});
  return {{"experiment", a.antipattern},
          {"runs", a.runs},
          {"pooled_rows", a.pooled_rows},
          {"warmup_s", a.options.warmup_s},
          {"util_scope", stats::to_string(a.options.util_scope)},
          {"alpha", a.options.alpha},
          {"skipped", skipped}};
}

inline std::string render_markdown(const fs::path& bundle);

// Writes every CSV, the timelines and report.md into `dir`.
inline void write_bundle(const stats::CampaignAnalysis& a, const fs::path& dir) {
  fs::create_directories(dir);
  csv::write_file(dir / "descriptive.csv", descriptive_table(a));
  csv::write_file(dir / "correlations.csv", correlation_table(a));
  csv::write_file(dir / "regression.csv", regression_table(a));
  csv::write_file(dir / "energy.csv", energy_table(a));
  csv::write_file(dir / "diagnostics.csv", diagnostics_table(a));
  csv::write_file(dir / "validity.csv", validity_table(a));
  orchestrator::write_json_file(dir / "summary.json", summary_json(a));
  std::error_code ec;
  fs::remove_all(dir / "traces", ec);
  for (const auto& tl : a.timelines) {
    const auto d = dir / "traces" / ("rep-" + std::to_string(tl.repetition));
    fs::create_directories(d);
    csv::write_file(d / "timeline.csv", timeline_table(tl));
  }
  std::ofstream os(dir / "report.md", std::ios::binary | std::ios::trunc);
  os << render_markdown(dir);
  if (!os) throw std::runtime_error("cannot write " + (dir / "report.md").string());
}

// ---- Markdown --------------------------------------------------------------

namespace detail {

inline std::string md_row(const std::vector<std::string>& cells) {
  std::string s = "|";
  for (const auto& c : cells) s += " " + (c.empty() ? std::string("n/a") : c) + " |";
  return s + "\n";
}

inline std::string md_rule(std::size_t n) {
  std::string s = "|";
  for (std::size_t i = 0; i < n; ++i) s += " --- |";
  return s + "\n";
}

inline std::optional<csv::Table> try_read(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  return csv::read_file(p);
}

inline std::string cell(const csv::Table& t, const std::vector<std::string>& row, const char* col) {
  return row.at(t.column(col));
}

inline std::string arrow(const std::string& decision) {
  if (decision == "reject_up") return "Reject ↑";
  if (decision == "reject_down") return "Reject ↓";
  if (decision == "keep") return "Keep";
  return decision;
}

}  // namespace detail

inline std::string render_markdown(const fs::path& bundle) {
  using detail::cell;
  using detail::md_row;
  using detail::md_rule;
  std::string md;
  std::string name;
  if (fs::exists(bundle / "summary.json")) {
    const auto s = orchestrator::read_json_file(bundle / "summary.json");
    name = detail::display_name(s.value("experiment", std::string{}));
    md += "# Power and performance report: " + name + "\n\n";
    md += fmt::format("Runs analyzed: {}. Pooled steady-state seconds: {}. Warm-up excluded: {} s. "
                      "CPU utilization scope: {}. Significance level: {}.\n\n",
                      s.value("runs", 0), s.value("pooled_rows", 0), s.value("warmup_s", 0.0),
                      s.value("util_scope", std::string("process")), s.value("alpha", 0.05));
    for (const auto& sk : s.value("skipped", nlohmann::json::array()))
      md += fmt::format("- rep-{} skipped: {}\n", sk.value("repetition", -1), sk.value("reason", std::string{}));
    if (!s.value("skipped", nlohmann::json::array()).empty()) md += "\n";
  } else {
    md += "# Power and performance report\n\n";
  }

  if (auto t = detail::try_read(bundle / "descriptive.csv")) {
    md += "## Descriptive statistics\n\n";
    md += "Response time in ms, power in W.\n\n";
    md += md_row({"Experiment", "RT mean", "RT max", "CPU mean", "CPU max", "DRAM mean", "DRAM min", "DRAM max"});
    md += md_rule(8);
    for (const auto& r : t->rows)
      md += md_row({detail::display_name(cell(*t, r, "experiment")), cell(*t, r, "rt_mean_ms"),
                    cell(*t, r, "rt_max_ms"), cell(*t, r, "cpu_mean_w"), cell(*t, r, "cpu_max_w"),
                    cell(*t, r, "dram_mean_w"), cell(*t, r, "dram_min_w"), cell(*t, r, "dram_max_w")});
    md += "\n";
  }

  if (auto t = detail::try_read(bundle / "correlations.csv")) {
    md += "## Correlation with response time\n\n";
    md += "Values marked with * share the sign of the other coefficient for the same power domain.\n\n";
    md += md_row({"Experiment", "Rows", "CPU Pearson r", "CPU Spearman ρ", "DRAM Pearson r", "DRAM Spearman ρ"});
    md += md_rule(6);
    auto mark = [&](const std::vector<std::string>& r, const char* col, const char* agree) {
      std::string v = cell(*t, r, col);
      if (!v.empty() && cell(*t, r, agree) == "true") v += "*";
      return v;
    };
    for (const auto& r : t->rows)
      md += md_row({detail::display_name(cell(*t, r, "experiment")), cell(*t, r, "level"),
                    mark(r, "cpu_pearson_r", "cpu_sign_agreement"), mark(r, "cpu_spearman_rho", "cpu_sign_agreement"),
                    mark(r, "dram_pearson_r", "dram_sign_agreement"),
                    mark(r, "dram_spearman_rho", "dram_sign_agreement")});
    md += "\n";
  }

  if (auto t = detail::try_read(bundle / "regression.csv")) {
    md += "## Power regressed on response time\n\n";
    md += "Response-time coefficient (W per ms) with HC3 95% interval.\n\n";
    md += md_row({"Experiment", "CPU β", "CPU CI low", "CPU CI high", "CPU p", "CPU decision", "DRAM β",
                  "DRAM CI low", "DRAM CI high", "DRAM p", "DRAM decision"});
    md += md_rule(11);
    std::vector<std::string> row;
    std::string experiment;
    std::vector<std::string> notes;
    for (const auto& r : t->rows) {
      experiment = cell(*t, r, "experiment");
      row.insert(row.end(), {cell(*t, r, "beta_lat"), cell(*t, r, "ci_low"), cell(*t, r, "ci_high"),
                             cell(*t, r, "p_lat"), detail::arrow(cell(*t, r, "decision"))});
      if (!cell(*t, r, "note").empty()) notes.push_back(cell(*t, r, "model") + ": " + cell(*t, r, "note"));
    }
    row.insert(row.begin(), detail::display_name(experiment));
    row.resize(11);
    md += md_row(row);
    md += "\n";
    for (const auto& n : notes) md += "- " + n + "\n";
    if (!notes.empty()) md += "\n";
  }

  if (auto t = detail::try_read(bundle / "energy.csv")) {
    md += "## Energy\n\n";
    md += md_row({"Experiment", "Run", "CPU (kJ)", "DRAM (kJ)"});
    md += md_rule(4);
    for (const auto& r : t->rows)
      md += md_row({detail::display_name(cell(*t, r, "experiment")), cell(*t, r, "repetition"),
                    cell(*t, r, "cpu_kj"), cell(*t, r, "dram_kj")});
    md += "\n";
  }

  if (auto t = detail::try_read(bundle / "diagnostics.csv"); t && !t->rows.empty()) {
    md += "## Residual diagnostics\n\n";
    md += md_row({"Model", "Test", "n", "Statistic", "p", "Null rejected"});
    md += md_rule(6);
    for (const auto& r : t->rows)
      md += md_row({cell(*t, r, "model"), cell(*t, r, "test"), cell(*t, r, "n"), cell(*t, r, "statistic"),
                    cell(*t, r, "p_value"), cell(*t, r, "null_rejected")});
    md += "\n";
  }

  if (auto t = detail::try_read(bundle / "validity.csv")) {
    md += "## Validity\n\n";
    md += md_row({"Run", "Requests", "Failures", "zero_failures", "Mean CPU util", "Floor", "cpu_floor"});
    md += md_rule(7);
    for (const auto& r : t->rows)
      md += md_row({cell(*t, r, "repetition"), cell(*t, r, "requests"), cell(*t, r, "failures"),
                    cell(*t, r, "zero_failures"), cell(*t, r, "mean_cpu_util"), cell(*t, r, "cpu_floor_threshold"),
                    cell(*t, r, "cpu_floor")});
    md += "\n";
  }

  md += "## Timelines\n\n";
  std::vector<std::string> reps;
  if (fs::is_directory(bundle / "traces"))
    for (const auto& e : fs::directory_iterator(bundle / "traces"))
      if (fs::exists(e.path() / "timeline.csv")) reps.push_back(e.path().filename().string());
  std::sort(reps.begin(), reps.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;  // rep-2 before rep-10
  });
  if (reps.empty()) {
    md += "No timeline data found under traces/.\n";
  } else {
    md += "Per-second response time, request rate, failures, CPU utilization and power:\n\n";
    for (const auto& r : reps) md += "- traces/" + r + "/timeline.csv\n";
  }
  return md;
}

// Re-renders report.md from the CSVs already in `bundle`.
inline void write_report(const fs::path& bundle) {
  if (!fs::is_directory(bundle)) throw UsageError("bundle directory not found: " + bundle.string());
  std::ofstream os(bundle / "report.md", std::ios::binary | std::ios::trunc);
  os << render_markdown(bundle);
  if (!os) throw std::runtime_error("cannot write " + (bundle / "report.md").string());
}

}  // namespace antipower::report
