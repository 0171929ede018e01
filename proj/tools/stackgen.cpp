#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "stackgen/harness.hpp"
#include "stackgen/report.hpp"
#include "stackgen/version.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> datasets;
  bool strict = false;
  bool stacking_naive = false;
  bool quiet = false;
};

stackgen::ExperimentConfig build_config(const Options& o) {
  auto cfg = o.config.empty() ? stackgen::ExperimentConfig{} : stackgen::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.datasets.empty()) cfg.datasets = o.datasets;
  if (o.strict) cfg.strict = true;
  if (o.stacking_naive) cfg.set_stacking_naive(true);
  return cfg;
}

int cmd_fetch(const Options& o) {
  const auto cfg = build_config(o);
  for (const auto& r : stackgen::fetch_datasets(cfg.datasets, stackgen::fetch_options_for(cfg))) {
    const char* how = r.source == stackgen::FetchSource::cache ? "cached" : r.source == stackgen::FetchSource::mirror ? "mirror" : "downloaded";
    std::cout << r.name << '\t' << how << '\t' << r.path.string() << '\n';
  }
  return 0;
}

int cmd_run(const Options& o) {
  const auto cfg = build_config(o);
  stackgen::ProgressFn progress;
  if (!o.quiet) progress = [](const std::string& msg) { std::cerr << "[run] " << msg << '\n'; };
  const auto report = stackgen::run_experiment(cfg, stackgen::make_dataset_loader(cfg, stackgen::fetch_options_for(cfg)), progress);
  for (const auto& path : stackgen::render_report(report, cfg.output_dir, cfg.formats, cfg.roc)) std::cout << path.string() << '\n';
  return 0;
}

int cmd_report(const Options& o) {
  const std::filesystem::path dir = o.out.empty() ? build_config(o).output_dir : std::filesystem::path(o.out);
  const auto report = stackgen::load_report_csv(dir / "report.csv");
  const auto md = stackgen::render_markdown(report);
  stackgen::render_report(report, dir, {"md"});
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-validated comparison of base learners, ensembles and stacked generalization on tabular data"};
  app.set_version_flag("--version", std::string(stackgen::kVersion));
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Master seed, overrides the config");
  app.add_option("--out", o.out, "Output directory, overrides the config");
  app.add_option("--dataset", o.datasets, "Dataset to use, repeatable, overrides the config");
  app.add_flag("--strict", o.strict, "Fail when a learner falls more than 3 points below the majority rate");
  app.add_flag("--stacking-naive", o.stacking_naive, "Train the stacking meta-learner on in-sample base predictions");
  app.add_flag("-q,--quiet", o.quiet, "No progress output");

  auto* fetch = app.add_subcommand("fetch", "Download and verify datasets into the cache");
  auto* run = app.add_subcommand("run", "Run the cross-validated experiment and write reports");
  auto* report = app.add_subcommand("report", "Re-render report.md from an existing report.csv");
  for (auto* sub : {fetch, run, report}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*fetch) return cmd_fetch(o);
    if (*run) return cmd_run(o);
    if (*report) return cmd_report(o);
  } catch (const std::exception& e) {
    std::cerr << "stackgen: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
