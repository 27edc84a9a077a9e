// bpu-lab: run a configured experiment and write its report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bpulab/errors.hpp"
#include "bpulab/experiments.hpp"

namespace {

using bpulab::cli::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

void print_catalog() {
  for (const auto& e : bpulab::cli::experiment_catalog()) std::cout << e.name << "\t" << e.summary << "\n";
}

int run(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "bpu-lab: cannot read config '" << path << "'\n";
    return kUsage;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    std::cerr << "bpu-lab: config is not valid JSON: " << e.what() << "\n";
    return kUsage;
  }

  bpulab::cli::ExperimentConfig cfg;
  try {
    cfg = bpulab::cli::parse_config(doc);
  } catch (const bpulab::ConfigError& e) {
    std::cerr << "bpu-lab: invalid config: " << e.what() << "\n";
    return kUsage;
  }

  bpulab::cli::ExperimentResult result;
  try {
    result = bpulab::cli::run_experiment(cfg);
  } catch (const bpulab::ConfigError& e) {
    std::cerr << "bpu-lab: invalid config: " << e.what() << "\n";
    return kUsage;
  }

  for (const auto& v : result.verdicts) std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << "\n";
  if (!cfg.output.empty()) {
    try {
      const auto files = bpulab::cli::emit_report(cfg, result, cfg.output);
      for (const auto& f : files.csv) std::cout << "wrote " << f << "\n";
      std::cout << "wrote " << files.manifest << "\n";
    } catch (const bpulab::IoError& e) {
      std::cerr << "bpu-lab: " << e.what() << "\n";
      return kFail;
    }
  } else {
    std::cout << bpulab::cli::manifest(cfg, result).dump(2) << "\n";
  }
  std::cout << (result.pass() ? "PASS" : "FAIL") << "\n";
  return result.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for BPU maps on the projective line"};
  app.require_subcommand(0, 1);
  bool list_flag = false;
  app.add_flag("--list-experiments", list_flag, "List the available experiments");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run_cmd->add_option("--config", config_path, "Path to the JSON config")->required();
  auto* list_cmd = app.add_subcommand("list-experiments", "List the available experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (list_flag || list_cmd->parsed()) {
    print_catalog();
    return kPass;
  }
  if (run_cmd->parsed()) return run(config_path);
  std::cerr << app.help();
  return kUsage;
}
