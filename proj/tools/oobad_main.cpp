// oobad: out-of-bag anomaly scoring for mixed-type CSV data.

#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "oobad/cli/commands.hpp"

namespace {

using oobad::cli::RunConfig;

// Collects long-form options as raw strings so they can be merged with the
// config file after parsing.
class FlagSet {
 public:
  void add(CLI::App* app, const std::string& key, const std::string& help) {
    auto& slot = values_[key];
    options_.emplace_back(key, app->add_option("--" + key, slot, help));
  }
  void add_flag(CLI::App* app, const std::string& key, const std::string& help) {
    options_.emplace_back(key, app->add_flag("--" + key, help));
  }
  void add_columns(CLI::App* app) {
    columns_opt_ = app->add_option("--column", columns_, "Column kind override NAME=categorical|numerical (repeatable)");
  }

  std::vector<std::pair<std::string, std::string>> given() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, opt] : options_) {
      if (opt->count() == 0) continue;
      const auto it = values_.find(key);
      out.emplace_back(key, it == values_.end() ? "true" : it->second);
    }
    for (const auto& c : columns_) {
      const auto eq = c.find('=');
      if (eq == std::string::npos) throw oobad::ConfigError("--column expects NAME=KIND, got '" + c + "'");
      out.emplace_back("column." + c.substr(0, eq), c.substr(eq + 1));
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
  std::vector<std::string> columns_;
  CLI::Option* columns_opt_ = nullptr;
};

void add_shared(FlagSet& flags, CLI::App* app, std::string& config_path) {
  flags.add(app, "input", "Input CSV file (first row is the header)");
  flags.add(app, "output", "Output file (default: stdout)");
  app->add_option("--config", config_path, "key=value config file; flags override it");
  flags.add(app, "seed", "Master random seed (default 0)");
  flags.add(app, "trees", "Trees per forest (default 500; bench 100)");
  flags.add(app, "min-leaf-frac", "Minimum leaf size as a fraction of rows (default 0.04)");
  flags.add(app, "cat-threshold", "Distinct/rows ratio below which integer columns are categorical (default 0.05)");
  flags.add(app, "threads", "Worker threads, 0 = all cores (default 0)");
  flags.add(app, "mtry", "Candidate predictors per split: sqrt, all, or an integer (default sqrt)");
  flags.add(app, "missing", "Missing cells: reject or drop_rows (default reject)");
  flags.add_columns(app);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-bag anomaly detection for tabular data"};
  app.require_subcommand(1);

  struct Command {
    CLI::App* app;
    FlagSet flags;
    std::string config_path;
  };
  std::map<std::string, Command> commands;

  auto* score = app.add_subcommand("score", "Score every row and write an anomaly report");
  auto& sc = commands["score"] = {score, {}, {}};
  add_shared(sc.flags, score, sc.config_path);
  sc.flags.add(score, "format", "csv or json (default csv)");
  sc.flags.add_flag(score, "sorted", "Order rows by descending total score");
  sc.flags.add(score, "save-model", "Write the fitted forests to this file");
  sc.flags.add(score, "load-model", "Score with forests from this file instead of fitting");

  auto* eval = app.add_subcommand("eval", "ROC AUC against a binary label column over repeated runs");
  auto& ev = commands["eval"] = {eval, {}, {}};
  add_shared(ev.flags, eval, ev.config_path);
  ev.flags.add(eval, "label-col", "Binary label column (1 = anomaly); excluded from features");
  ev.flags.add(eval, "repeats", "Number of seeded runs (default 10)");

  auto* filter = app.add_subcommand("filter", "Drop the highest-scoring rows and write the rest");
  auto& fi = commands["filter"] = {filter, {}, {}};
  add_shared(fi.flags, filter, fi.config_path);
  fi.flags.add(filter, "pct", "Fraction of rows to remove, in [0, 1)");
  fi.flags.add(filter, "manifest", "Removed-rows manifest (default <output>.removed.csv)");

  auto* bench = app.add_subcommand("bench", "Time scoring on synthetic data of growing size");
  auto& be = commands["bench"] = {bench, {}, {}};
  add_shared(be.flags, bench, be.config_path);
  be.flags.add(bench, "sizes", "Comma-separated row counts (default 1000,2000,4000,8000)");
  be.flags.add(bench, "features", "Feature columns (default 5)");
  be.flags.add(bench, "bench-repeats", "Timed runs per point, minimum is reported (default 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : oobad::cli::kUsageError;
  }

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    return oobad::cli::guarded(
        [&] {
          const RunConfig cfg = oobad::cli::resolve_config(cmd.flags.given(), cmd.config_path);
          if (name == "score") return oobad::cli::cmd_score(cfg, std::cerr);
          if (name == "eval") return oobad::cli::cmd_eval(cfg, std::cerr);
          if (name == "filter") return oobad::cli::cmd_filter(cfg, std::cerr);
          return oobad::cli::cmd_bench(cfg, std::cerr);
        },
        std::cerr);
  }
  return oobad::cli::kUsageError;
}
