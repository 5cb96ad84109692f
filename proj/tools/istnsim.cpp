// SPDX-License-Identifier: Apache-2.0
//
// istnsim: link-level Monte Carlo runner for the satellite-terrestrial
// multistatic-ISAC simulator. Subcommands: run, validate, oracle.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "istn/experiment.hpp"
#include "istn/oracles.hpp"
#include "istn/version.hpp"

namespace fs = std::filesystem;

namespace {

struct CliArgs {
  std::string config;
  std::string out_dir;
  int workers = -1;
  int seeds = -1;
  bool dump_metrics = false;
  std::vector<std::string> overrides;
};

int apply_overrides(istn::RunConfig& cfg, const CliArgs& args) {
  for (const auto& ov : args.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      std::cerr << "override must be key=value: " << ov << "\n";
      return 1;
    }
    const std::string key = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);
    if (!istn::apply_config_key(cfg, key, value)) {
      std::cerr << "unknown override key: " << key << "\n";
      return 1;
    }
  }
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.workers >= 0) cfg.workers = args.workers;
  if (args.seeds >= 0) cfg.exp.seeds = args.seeds;
  return 0;
}

int cmd_run(const CliArgs& args) {
  istn::RunConfig cfg;
  try {
    cfg = istn::load_config(args.config);
    if (const int rc = apply_overrides(cfg, args); rc != 0) return rc;
    const auto issues = istn::validate_config(cfg);
    if (!issues.empty()) {
      for (const auto& s : issues) std::cerr << "config error: " << s << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    fs::create_directories(cfg.out_dir);
    const istn::ResultTable table = istn::run_experiment(cfg.exp, cfg.params, cfg.workers);

    std::ofstream results(fs::path(cfg.out_dir) / "results.csv");
    istn::write_results_csv(table, cfg.exp, results);
    std::ofstream diags(fs::path(cfg.out_dir) / "diagnostics.csv");
    istn::write_diagnostics_csv(table, cfg.exp, diags);
    std::ofstream manifest(fs::path(cfg.out_dir) / "manifest.txt");
    manifest << istn::manifest_text(cfg);
    if (args.dump_metrics) {
      std::ofstream metrics(fs::path(cfg.out_dir) / "metrics.csv");
      istn::write_metrics_csv(table, cfg.exp, metrics);
    }

    std::cout << "wrote " << (fs::path(cfg.out_dir) / "results.csv").string() << " ("
              << table.rows.size() << " rows)\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
}

int cmd_validate(const CliArgs& args) {
  try {
    istn::RunConfig cfg = istn::load_config(args.config);
    if (const int rc = apply_overrides(cfg, args); rc != 0) return rc;
    const auto issues = istn::validate_config(cfg);
    if (issues.empty()) {
      std::cout << "ok\n";
      return 0;
    }
    for (const auto& s : issues) std::cerr << "config error: " << s << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_oracle(const std::string& suite) {
  try {
    const auto checks = istn::oracles::run_suite(suite);
    int failed = 0;
    for (const auto& c : checks) {
      std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name;
      if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
      std::cout << "\n";
      failed += c.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all checks passed\n"
                              : std::to_string(failed) + " check(s) failed\n");
    return failed == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "oracle failed: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satellite-terrestrial multistatic-ISAC link simulator"};
  app.set_version_flag("--version", istn::kVersion);
  app.require_subcommand(1);

  CliArgs args;

  auto* run = app.add_subcommand("run", "execute an experiment and write CSV results");
  run->add_option("config", args.config, "config file")->required();
  run->add_option("--out", args.out_dir, "output directory (default from config)");
  run->add_option("--workers", args.workers, "worker threads; 1 = serial reference");
  run->add_option("--seeds", args.seeds, "override the Monte Carlo seed count");
  run->add_option("--override", args.overrides, "key=value config override (repeatable)");
  run->add_flag("--dump-metrics", args.dump_metrics,
                "also write per-entity metrics.csv (seed, cell, entity rows)");

  auto* validate = app.add_subcommand("validate", "check a config without running");
  validate->add_option("config", args.config, "config file")->required();
  validate->add_option("--override", args.overrides, "key=value config override (repeatable)");

  std::string suite = "all";
  auto* oracle = app.add_subcommand("oracle", "run the independent cross-check suites");
  oracle->add_option("suite", suite,
                     "channel | metrics | convex | convex_full | wmmse | association | all");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(args);
  if (validate->parsed()) return cmd_validate(args);
  return cmd_oracle(suite);
}
