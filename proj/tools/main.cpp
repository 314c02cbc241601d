#include <iostream>

#include "CLI11.hpp"
#include "lagree/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Byzantine lattice agreement simulation harness"};
  app.require_subcommand(1);

  lagree::RunOptions run_opts;
  uint64_t seed_override = 0;
  auto* run = app.add_subcommand("run", "simulate one scenario and write its trace");
  run->add_option("--config", run_opts.config_path, "scenario config JSON")->required();
  run->add_option("--out", run_opts.trace_out, "trace output path (JSON lines)")->required();
  run->add_option("--roles", run_opts.roles_out, "resolved config output path");
  run->add_option("--summary", run_opts.summary_out, "metrics summary output path");
  auto* seed_opt = run->add_option("--seed", seed_override, "override the config's seed");

  std::string trace_path;
  std::string roles_path;
  auto* check = app.add_subcommand("check", "check a recorded trace against its config");
  check->add_option("--trace", trace_path, "trace file from a run")->required();
  check->add_option("--roles", roles_path, "config file describing the run")->required();

  lagree::SweepOptions sweep_opts;
  std::string seeds_text = "1";
  auto* sweep = app.add_subcommand("sweep", "run and check a scenario across many seeds");
  sweep->add_option("--config", sweep_opts.config_path, "scenario config JSON")->required();
  sweep->add_option("--seeds", seeds_text, "seed range: N for [0,N) or A:B for [A,B)");
  sweep->add_option("--out", sweep_opts.csv_out, "CSV report path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      if (seed_opt->count() > 0) run_opts.seed = seed_override;
      return lagree::cmd_run(run_opts);
    }
    if (check->parsed()) {
      return lagree::cmd_check(trace_path, roles_path);
    }
    auto [begin, end] = lagree::parse_seed_range(seeds_text);
    sweep_opts.seed_begin = begin;
    sweep_opts.seed_end = end;
    return lagree::cmd_sweep(sweep_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
