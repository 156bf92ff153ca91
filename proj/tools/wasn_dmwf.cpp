// Experiment runner: loads a key-value config, runs the batch-oracle or
// online simulation, and writes manifest + CSV + plot data.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wasn/config.hpp"
#include "wasn/netsim.hpp"
#include "wasn/report.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw wasn::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!tok.empty()) out.push_back(tok);
      tok.clear();
    } else {
      tok += c;
    }
  }
  if (!tok.empty()) out.push_back(tok);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dMWF / DANSE wireless acoustic sensor network simulator"};
  std::string config_path;
  std::string mode;
  std::string out_dir = "out";
  std::string algos;
  long long seed = -1;
  int trials = -1;
  app.add_option("--config", config_path, "experiment config file")
      ->required();
  app.add_option("--mode", mode, "override mode: batch_oracle | online");
  app.add_option("--seed", seed, "override experiment seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--algos", algos, "override algorithm list (comma separated)");
  app.add_option("--trials", trials, "override trial count");
  CLI11_PARSE(app, argc, argv);

  wasn::ExperimentConfig cfg;
  std::string config_content;
  try {
    config_content = read_file(config_path);
    const wasn::ConfigFile file =
        wasn::ConfigFile::parse_string(config_content, config_path);
    cfg = wasn::experiment_from_config(file);
    if (!mode.empty()) {
      if (mode == "batch_oracle") {
        cfg.mode = wasn::ExperimentMode::batch_oracle;
      } else if (mode == "online") {
        cfg.mode = wasn::ExperimentMode::online;
      } else {
        throw wasn::ConfigError("--mode: unknown mode '" + mode + "'");
      }
    }
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (trials >= 0) cfg.trials = trials;
    if (!algos.empty()) {
      cfg.algos.clear();
      for (const std::string& name : split_list(algos)) {
        const auto a = wasn::algo_from_name(name);
        if (!a)
          throw wasn::ConfigError("--algos: unknown algorithm '" + name + "'");
        cfg.algos.push_back(*a);
      }
    }
    cfg.validate();
  } catch (const wasn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const wasn::ExperimentResult result = wasn::run_experiment(cfg);
    const wasn::OutputFiles files = wasn::write_experiment_outputs(
        out_dir, config_path, config_content, cfg, result);
    std::cout << "wrote " << files.manifest;
    for (const std::string& f : files.files) std::cout << "\n  " << f;
    std::cout << "\n";
    if (!result.failures.empty()) {
      std::cerr << result.failures.size()
                << " (trial, algorithm) pair(s) failed numerically; see "
                   "failures.csv\n";
      const size_t budget = static_cast<size_t>(cfg.trials) *
                            cfg.algos.size();
      if (result.failures.size() >= budget) return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
