// greedylab: run greedy-approximation experiments, validate traces against
// rate bounds, and fit empirical convergence rates.

#include "greedylab/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"Rescaled pure greedy algorithm experiments"};
  app.require_subcommand(1);

  std::string config;
  int jobs = 1;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Execute every target x algorithm run of a config");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");

  std::string trace;
  std::string target;
  auto* validate = app.add_subcommand("validate", "Check a trace against its rate bound");
  validate->add_option("trace", trace, "Trace JSON")->required();
  validate->add_option("target", target, "Target JSON with certificate")->required();

  std::vector<std::string> traces;
  int m_min = 1;
  std::string rate_out = ".";
  auto* rate = app.add_subcommand("rate", "Fit log-log convergence slopes; emit plot data");
  rate->add_option("traces", traces, "Trace JSON files")->required();
  rate->add_option("--m-min", m_min, "Smallest m used in the fit");
  rate->add_option("--out", rate_out, "Directory for rate_plot.csv and rate_fits.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : greedylab::kExitUsage;
  }

  if (*run) {
    greedylab::RunOptions options;
    options.jobs = jobs;
    if (!out_dir.empty()) options.out_dir = out_dir;
    return greedylab::cmd_run(config, options, std::cout, std::cerr);
  }
  if (*validate) return greedylab::cmd_validate(trace, target, std::cout, std::cerr);
  std::vector<std::filesystem::path> paths(traces.begin(), traces.end());
  return greedylab::cmd_rate(paths, m_min, rate_out, std::cout, std::cerr);
}
