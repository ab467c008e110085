#pragma once

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include "oobad/bench.hpp"
#include "oobad/cli/run_config.hpp"
#include "oobad/csv.hpp"
#include "oobad/dataset.hpp"
#include "oobad/error.hpp"
#include "oobad/eval.hpp"
#include "oobad/model_io.hpp"
#include "oobad/report_io.hpp"
#include "oobad/scoring.hpp"

namespace oobad::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2 };

/// Writes to `<path>.partial` and renames on commit, so a failed run never
/// leaves a truncated file behind. An empty path or "-" means stdout.
class OutputFile {
 public:
  explicit OutputFile(std::string path) : path_(std::move(path)) {
    if (to_stdout()) return;
    tmp_ = path_ + ".partial";
    file_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!file_) throw DataError("cannot open output file '" + path_ + "'");
  }
  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;
  ~OutputFile() {
    if (!to_stdout() && !committed_) {
      file_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return to_stdout() ? std::cout : file_; }

  void commit() {
    if (to_stdout()) {
      std::cout.flush();
      return;
    }
    file_.close();
    if (!file_) throw DataError("error writing '" + path_ + "'");
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  bool to_stdout() const { return path_.empty() || path_ == "-"; }
  std::string path_;
  std::string tmp_;
  std::ofstream file_;
  bool committed_ = false;
};

inline void require_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ConfigError("--input is required");
}

inline void print_summary(const AnomalyReport& report, std::ostream& err) {
  err << "rows=" << report.n_rows() << " features=" << report.n_features() << '\n';
  for (const auto& f : report.features) {
    err << "  " << f.name << " [" << (f.kind.is_categorical() ? "categorical" : "numerical");
    if (f.kind.is_categorical()) err << " C=" << f.kind.cardinality();
    err << "] warnings=" << f.warnings.size() << '\n';
  }
}

inline int cmd_score(const RunConfig& cfg, std::ostream& err) {
  print_config(cfg, "score", err, 500);
  require_input(cfg);
  const ForestConfig forest = cfg.forest();
  const Dataset data = load_csv(cfg.input, cfg.schema());

  AnomalyReport report;
  if (!cfg.load_model.empty()) {
    const ModelBundle model = load_model_file(cfg.load_model);
    if (model.feature_names != data.column_names()) throw ConfigError("model feature names do not match input columns");
    report = score_with_models(data, model.forests, cfg.threads);
    report.config_echo = {{"load_model", cfg.load_model}};
  } else if (!cfg.save_model.empty()) {
    ModelBundle model{data.column_names(), fit_models(data, forest, cfg.threads)};
    report = score_with_models(data, model.forests, cfg.threads);
    report.config_echo = describe(forest);
    OutputFile model_out(cfg.save_model);
    save_model(model, model_out.stream());
    model_out.commit();
  } else {
    report = score_dataset(data, forest, cfg.threads);
  }
  report.config_echo.emplace_back("input", cfg.input);
  report.config_echo.emplace_back("cat_threshold", std::to_string(cfg.cat_threshold));

  OutputFile out(cfg.output);
  if (cfg.format == OutputFormat::csv)
    write_report_csv(report, out.stream(), cfg.sorted);
  else
    write_report_json(report, out.stream(), cfg.sorted);
  out.commit();
  print_summary(report, err);
  return kSuccess;
}

inline int cmd_eval(const RunConfig& cfg, std::ostream& err) {
  print_config(cfg, "eval", err, 500);
  require_input(cfg);
  if (cfg.label_col.empty()) throw ConfigError("--label-col is required for eval");
  const ForestConfig forest = cfg.forest();
  const CsvTable table = read_csv(cfg.input);
  SchemaConfig schema = cfg.schema();
  schema.exclude.push_back(cfg.label_col);
  const Dataset data = build_dataset(table, schema);
  const auto labels = extract_binary_labels(table, data, cfg.label_col);

  const RepeatedAuc result = repeated_auc(data, labels, forest, cfg.repeats, cfg.threads);
  std::cout << std::setprecision(6) << std::fixed;
  std::cout << "mean_auc=" << result.mean << '\n';
  for (std::size_t r = 0; r < result.runs.size(); ++r)
    std::cout << "run " << r << " seed=" << result.seeds[r] << " auc=" << result.runs[r] << '\n';
  std::cout.unsetf(std::ios::floatfield);

  if (!cfg.output.empty() && cfg.output != "-") {
    OutputFile out(cfg.output);
    out.stream() << "run,seed,auc\n";
    for (std::size_t r = 0; r < result.runs.size(); ++r)
      out.stream() << r << ',' << result.seeds[r] << ',' << format_double(result.runs[r]) << '\n';
    out.commit();
  }
  err << "rows=" << data.n_rows() << " features=" << data.n_cols() << " repeats=" << cfg.repeats << '\n';
  return kSuccess;
}

inline int cmd_filter(const RunConfig& cfg, std::ostream& err) {
  print_config(cfg, "filter", err, 500);
  require_input(cfg);
  (void)removal_count(cfg.pct, 1);
  std::string manifest = cfg.manifest;
  if (manifest.empty()) {
    if (cfg.output.empty() || cfg.output == "-") throw ConfigError("--manifest is required when writing to stdout");
    manifest = cfg.output + ".removed.csv";
  }
  const ForestConfig forest = cfg.forest();
  const CsvTable table = read_csv(cfg.input);
  const Dataset data = build_dataset(table, cfg.schema());
  const AnomalyReport report = score_dataset(data, forest, cfg.threads);
  const FilterResult filtered = filter_top_percent(data, report, cfg.pct);

  OutputFile kept(cfg.output);
  kept.stream() << table.raw_header << '\n';
  for (auto src : filtered.kept.source_rows()) kept.stream() << table.raw_rows[src] << '\n';
  OutputFile removed(manifest);
  removed.stream() << "row_id,total_score\n";
  for (auto r : filtered.removed) removed.stream() << data.source_rows()[r] << ',' << format_double(report.total[r]) << '\n';
  removed.commit();
  kept.commit();
  err << "rows=" << data.n_rows() << " removed=" << filtered.removed.size() << " kept=" << filtered.kept.n_rows() << '\n';
  return kSuccess;
}

inline int cmd_bench(const RunConfig& cfg, std::ostream& err) {
  print_config(cfg, "bench", err, 100);
  BenchConfig bench;
  bench.sizes = cfg.bench_sizes;
  bench.n_features = cfg.bench_features;
  bench.n_trees = cfg.trees_or(100);
  bench.min_leaf_fraction = cfg.min_leaf_fraction;
  bench.seed = cfg.seed;
  bench.repeats = cfg.bench_repeats;
  bench.threads = cfg.threads;
  if (bench.n_features < 2) throw ConfigError("bench needs at least 2 features");
  const BenchResult result = run_bench(bench);
  OutputFile out(cfg.output);
  print_bench(bench, result, out.stream());
  out.commit();
  return kSuccess;
}

/// Maps exceptions onto exit codes: 1 for usage/config errors, 2 for data errors.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace oobad::cli
