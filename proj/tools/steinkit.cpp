// steinkit: reports and exact checks for normal approximation of the
// isolated-vertex count and the Jack measure content statistic.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "steinkit/cli/commands.hpp"

namespace {

using steinkit::cli::ConfigError;
using steinkit::cli::ExperimentConfig;

struct Flags {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_flags(CLI::App* sub, Flags& flags, bool test_mode) {
  sub->add_option("--config", flags.config_file, "key=value file; flags given here override it");
  const std::pair<const char*, const char*> names[] = {
      {"grid", "parameter grid"},
      {"samples", "Monte Carlo sample count"},
      {"seed", "master seed"},
      {"confidence", "DKW confidence level (default 0.05)"},
      {"epsilon", "epsilon for the Jack region"},
      {"out", "output file (default stdout)"},
      {"format", "csv or json"},
      {"thresholds", "n_bar,m_bar,c_bar"},
      {"threads", "worker count, 0 for all cores"},
  };
  for (const auto& [name, help] : names) sub->add_option(std::string("--") + name, flags.values[name], help);
  if (test_mode)
    sub->add_option("--perturb-kerov", flags.values["perturb-kerov"],
                    "test mode: scale Kerov weights by (1 + factor)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steinkit"};
  app.require_subcommand(1);
  const std::map<std::string, std::string> about = {
      {"er-report", "isolated vertices of G(n,m): moments, lemma checks, Kolmogorov rates"},
      {"jack-report", "Jack measure content statistic: rates, Wasserstein, degeneracy"},
      {"verify", "exhaustive and exact identity checks"},
      {"recursion", "closed form and fixed point of the rate recursion"},
      {"hyp", "hypergeometric queries and bounds"},
  };
  std::map<std::string, Flags> flags;
  for (const auto& [name, help] : about) add_flags(app.add_subcommand(name, help), flags[name], name == "verify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : steinkit::cli::kExitConfig;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    auto* sub = app.get_subcommand(command);
    auto& f = flags[command];
    ExperimentConfig config;
    config.command = command;
    config.grid = steinkit::cli::default_grid(command);
    if (!f.config_file.empty()) steinkit::cli::apply_config_file(config, f.config_file);
    for (const auto& [key, value] : f.values)
      if (sub->count("--" + key) > 0) steinkit::cli::apply_setting(config, key, value);
    steinkit::cli::validate(config);
    return steinkit::cli::run(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return steinkit::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return steinkit::cli::kExitCheckFailed;
  }
}
