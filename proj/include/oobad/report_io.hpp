#pragma once

#include <charconv>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "oobad/csv.hpp"
#include "oobad/scoring.hpp"

namespace oobad {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// row_id,total_score,<one column per feature>. row_id is the 0-based data
/// row in the input file.
inline void write_report_csv(const AnomalyReport& report, std::ostream& out, bool sorted = false) {
  out << "row_id,total_score";
  for (const auto& name : report.feature_names) out << ',' << csv_escape(name);
  out << '\n';
  std::vector<std::size_t> order;
  if (sorted) {
    order = report.ranking();
  } else {
    order.resize(report.n_rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  }
  for (auto i : order) {
    out << report.source_rows[i] << ',' << format_double(report.total[i]);
    for (std::size_t k = 0; k < report.n_features(); ++k) out << ',' << format_double(report.scaled(i, k));
    out << '\n';
  }
}

/// Structured form carrying the config echo, per-feature metadata, warnings
/// and the per-row breakdown.
inline nlohmann::ordered_json report_to_json(const AnomalyReport& report, bool sorted = false) {
  nlohmann::ordered_json j;
  j["format"] = "oobad-report";
  j["version"] = 1;
  auto& cfg = j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config_echo) cfg[k] = v;
  j["n_rows"] = report.n_rows();
  auto& features = j["features"] = nlohmann::ordered_json::array();
  auto& warnings = j["warnings"] = nlohmann::ordered_json::array();
  for (const auto& f : report.features) {
    nlohmann::ordered_json fj;
    fj["name"] = f.name;
    fj["kind"] = f.kind.is_categorical() ? "categorical" : "numerical";
    if (f.kind.is_categorical()) fj["cardinality"] = f.kind.cardinality();
    fj["warning_count"] = f.warnings.size();
    features.push_back(std::move(fj));
    for (const auto& w : f.warnings)
      warnings.push_back({{"feature", f.name}, {"row_id", report.source_rows[w.row]}, {"message", w.message}});
  }
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  std::vector<std::size_t> order;
  if (sorted) {
    order = report.ranking();
  } else {
    order.resize(report.n_rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  }
  for (auto i : order) {
    nlohmann::ordered_json r;
    r["row_id"] = report.source_rows[i];
    r["total_score"] = report.total[i];
    auto& per = r["features"] = nlohmann::ordered_json::object();
    for (const auto& f : report.features)
      per[f.name] = {{"scaled", f.scaled[i]},
                     {"raw", f.raw[i]},
                     {"uncertainty", f.uncertainty[i]},
                     {"disagreement", f.disagreement[i]},
                     {"oob_trees", f.oob_counts[i]}};
    rows.push_back(std::move(r));
  }
  return j;
}

inline void write_report_json(const AnomalyReport& report, std::ostream& out, bool sorted = false) {
  out << report_to_json(report, sorted).dump(2) << '\n';
}

}  // namespace oobad
