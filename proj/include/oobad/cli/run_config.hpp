#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oobad/csv.hpp"
#include "oobad/dataset.hpp"
#include "oobad/error.hpp"
#include "oobad/forest.hpp"

namespace oobad::cli {

enum class OutputFormat { csv, json };

/// Resolved settings for one CLI invocation. Sources are merged with
/// precedence flag > config file > default.
struct RunConfig {
  std::string input;
  std::string output;
  std::string config_path;
  std::optional<std::size_t> trees;  // 500 for score/eval/filter, 100 for bench
  double min_leaf_fraction = 0.04;
  double cat_threshold = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string mtry = "sqrt";
  MissingValuePolicy missing = MissingValuePolicy::reject;
  std::map<std::string, KindOverride> column_kinds;
  OutputFormat format = OutputFormat::csv;
  bool sorted = false;
  std::string save_model;
  std::string load_model;
  // eval
  std::string label_col;
  std::size_t repeats = 10;
  // filter
  double pct = 0.0;
  std::string manifest;
  // bench
  std::vector<std::size_t> bench_sizes{1000, 2000, 4000, 8000};
  std::size_t bench_features = 5;
  std::size_t bench_repeats = 3;

  std::size_t trees_or(std::size_t fallback) const { return trees.value_or(fallback); }

  ForestConfig forest(std::size_t default_trees = 500) const {
    ForestConfig f;
    f.n_trees = trees_or(default_trees);
    f.min_leaf_fraction = min_leaf_fraction;
    f.mtry = MtryRule::parse(mtry);
    f.seed = seed;
    return f;
  }

  SchemaConfig schema() const {
    SchemaConfig s;
    s.categorical_ratio_threshold = cat_threshold;
    s.overrides = column_kinds;
    s.missing_value_policy = missing;
    return s;
  }
};

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  in >> v;
  if (!in || !(in >> std::ws).eof()) throw ConfigError("invalid value '" + value + "' for '" + key + "'");
  if constexpr (std::is_unsigned_v<T>) {
    if (value.find('-') != std::string::npos) throw ConfigError("'" + key + "' must be non-negative");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value.empty()) return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + value + "' for '" + key + "'");
}

}  // namespace detail

/// Applies one key=value setting. Keys mirror the long flag names.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "input") {
    cfg.input = value;
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "trees") {
    cfg.trees = parse_number<std::size_t>(key, value);
  } else if (key == "min-leaf-frac") {
    cfg.min_leaf_fraction = parse_number<double>(key, value);
  } else if (key == "cat-threshold") {
    cfg.cat_threshold = parse_number<double>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_number<unsigned>(key, value);
  } else if (key == "mtry") {
    (void)MtryRule::parse(value);
    cfg.mtry = value;
  } else if (key == "missing") {
    if (value == "reject")
      cfg.missing = MissingValuePolicy::reject;
    else if (value == "drop_rows" || value == "drop-rows")
      cfg.missing = MissingValuePolicy::drop_rows;
    else
      throw ConfigError("missing must be 'reject' or 'drop_rows', got '" + value + "'");
  } else if (key.rfind("column.", 0) == 0 && key.size() > 7) {
    const std::string name = key.substr(7);
    if (value == "categorical")
      cfg.column_kinds[name] = KindOverride::categorical;
    else if (value == "numerical")
      cfg.column_kinds[name] = KindOverride::numerical;
    else
      throw ConfigError("column kind must be 'categorical' or 'numerical', got '" + value + "'");
  } else if (key == "format") {
    if (value == "csv")
      cfg.format = OutputFormat::csv;
    else if (value == "json")
      cfg.format = OutputFormat::json;
    else
      throw ConfigError("format must be 'csv' or 'json', got '" + value + "'");
  } else if (key == "sorted") {
    cfg.sorted = detail::parse_bool(key, value);
  } else if (key == "save-model") {
    cfg.save_model = value;
  } else if (key == "load-model") {
    cfg.load_model = value;
  } else if (key == "label-col") {
    cfg.label_col = value;
  } else if (key == "repeats") {
    cfg.repeats = parse_number<std::size_t>(key, value);
  } else if (key == "pct") {
    cfg.pct = parse_number<double>(key, value);
  } else if (key == "manifest") {
    cfg.manifest = value;
  } else if (key == "sizes") {
    std::vector<std::size_t> sizes;
    std::istringstream in(value);
    std::string part;
    while (std::getline(in, part, ',')) sizes.push_back(parse_number<std::size_t>(key, std::string(oobad::detail::trim(part))));
    if (sizes.empty()) throw ConfigError("sizes must list at least one row count");
    cfg.bench_sizes = std::move(sizes);
  } else if (key == "features") {
    cfg.bench_features = parse_number<std::size_t>(key, value);
  } else if (key == "bench-repeats") {
    cfg.bench_repeats = parse_number<std::size_t>(key, value);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

/// Flat key=value lines; '#' starts a comment; blank lines ignored.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto body = oobad::detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key(oobad::detail::trim(body.substr(0, eq)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    entries.emplace_back(key, std::string(oobad::detail::trim(body.substr(eq + 1))));
  }
  return entries;
}

inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Defaults, then the config file (if any), then explicitly given flags.
inline RunConfig resolve_config(const std::vector<std::pair<std::string, std::string>>& flags,
                                const std::string& config_path) {
  RunConfig cfg;
  cfg.config_path = config_path;
  if (!config_path.empty())
    for (const auto& [k, v] : read_config_file(config_path)) apply_setting(cfg, k, v);
  for (const auto& [k, v] : flags) apply_setting(cfg, k, v);
  return cfg;
}

/// The fully-resolved configuration as key=value lines.
inline void print_config(const RunConfig& cfg, const std::string& command, std::ostream& out,
                         std::size_t default_trees) {
  out << "# oobad " << command << " resolved config\n";
  out << "input=" << cfg.input << '\n';
  out << "output=" << cfg.output << '\n';
  if (!cfg.config_path.empty()) out << "config=" << cfg.config_path << '\n';
  out << "trees=" << cfg.trees_or(default_trees) << '\n';
  out << "min-leaf-frac=" << cfg.min_leaf_fraction << '\n';
  out << "cat-threshold=" << cfg.cat_threshold << '\n';
  out << "mtry=" << cfg.mtry << '\n';
  out << "seed=" << cfg.seed << '\n';
  out << "threads=" << cfg.threads << '\n';
  out << "missing=" << (cfg.missing == MissingValuePolicy::reject ? "reject" : "drop_rows") << '\n';
  for (const auto& [name, kind] : cfg.column_kinds)
    out << "column." << name << '=' << (kind == KindOverride::categorical ? "categorical" : "numerical") << '\n';
  if (command == "score") {
    out << "format=" << (cfg.format == OutputFormat::csv ? "csv" : "json") << '\n';
    out << "sorted=" << (cfg.sorted ? "true" : "false") << '\n';
    if (!cfg.save_model.empty()) out << "save-model=" << cfg.save_model << '\n';
    if (!cfg.load_model.empty()) out << "load-model=" << cfg.load_model << '\n';
  } else if (command == "eval") {
    out << "label-col=" << cfg.label_col << '\n';
    out << "repeats=" << cfg.repeats << '\n';
  } else if (command == "filter") {
    out << "pct=" << cfg.pct << '\n';
    out << "manifest=" << cfg.manifest << '\n';
  } else if (command == "bench") {
    out << "sizes=";
    for (std::size_t i = 0; i < cfg.bench_sizes.size(); ++i) out << (i ? "," : "") << cfg.bench_sizes[i];
    out << "\nfeatures=" << cfg.bench_features << '\n';
    out << "bench-repeats=" << cfg.bench_repeats << '\n';
  }
}

}  // namespace oobad::cli
