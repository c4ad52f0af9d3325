// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links
//
// Monte-Carlo experiment driver. Each figure subcommand runs its seeded
// trial sweep and writes one CSV (9 significant digits) under --out.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "irsbeam/experiments.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t trials = 0;
  bool trials_set = false;
  std::string out_dir;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file (key = value sections)");
  cmd->add_option("--seed", opts.seed, "base seed for the per-trial streams")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--trials", opts.trials, "Monte-Carlo trials per figure point")
      ->each([&](const std::string&) { opts.trials_set = true; });
  cmd->add_option("--out", opts.out_dir, "output directory for CSV files");
  cmd->add_option("--workers", opts.workers, "worker thread count");
}

irsbeam::ExperimentConfig resolve(const CommonOptions& opts) {
  irsbeam::ExperimentConfig cfg = opts.config_path.empty()
                                      ? irsbeam::default_config()
                                      : irsbeam::load_config(opts.config_path);
  if (opts.seed_set) cfg.base_seed = opts.seed;
  if (opts.trials_set) cfg.trials = opts.trials;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.workers > 0) cfg.workers = opts.workers;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"irsbeam: IRS-assisted mmWave beam training and positioning experiments"};
  app.require_subcommand(1);

  struct FigureCommand {
    const char* name;
    const char* help;
    std::vector<std::string> (*runner)(const irsbeam::ExperimentConfig&);
  };
  const std::vector<FigureCommand> figures = {
      {"fig5", "AoA/AoD MSE vs transmit power, with numeric CRB", irsbeam::run_fig5},
      {"fig6", "blocked-link histograms vs user density", irsbeam::run_fig6},
      {"fig7", "beam misalignment vs training length, with exhaustive sweep",
       irsbeam::run_fig7},
      {"fig8", "position RMSE vs transmit power", irsbeam::run_fig8},
      {"fig9", "blockage estimation error rates (3 methods)", irsbeam::run_fig9},
      {"fig10", "ML vs position-refined AoA/AoD MSE", irsbeam::run_fig10},
      {"contour", "objective landscapes and peak gaps over training length",
       irsbeam::run_contour},
  };

  std::vector<CommonOptions> options(figures.size() + 1);
  for (std::size_t i = 0; i < figures.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(figures[i].name, figures[i].help);
    add_common(cmd, options[i]);
  }
  CLI::App* validate = app.add_subcommand("validate", "run the property suites");
  add_common(validate, options.back());

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < figures.size(); ++i) {
      if (!app.got_subcommand(figures[i].name)) continue;
      const auto cfg = resolve(options[i]);
      const auto written = figures[i].runner(cfg);
      for (const std::string& path : written) std::printf("wrote %s\n", path.c_str());
      return 0;
    }
    if (app.got_subcommand("validate")) {
      const auto cfg = resolve(options.back());
      const auto results = irsbeam::run_property_suite(cfg.base_seed);
      int failures = 0;
      for (const auto& r : results) {
        std::printf("[%s] %s%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.empty() ? "" : ": ", r.detail.c_str());
        if (!r.pass) ++failures;
      }
      std::printf("%zu checks, %d failures\n", results.size(), failures);
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
