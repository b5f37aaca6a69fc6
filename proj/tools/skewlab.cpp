#include <CLI11.hpp>

#include <iostream>

#include "skewlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Attractors, repellers and stationary measures of step skew products over Markov chains."};
  app.require_subcommand(1);

  std::string config;
  skewlab::Overrides ov;
  for (const auto& name : skewlab::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", config, "system configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--seed", ov.seed, "random seed");
    sub->add_option("--bins", ov.bins, "histogram bins per state");
    sub->add_option("--steps", ov.steps, "random walk steps");
    sub->add_option("--workers", ov.workers, "worker threads");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return skewlab::run_file(config, app.get_subcommands().front()->get_name(), ov, std::cout, std::cerr);
}
