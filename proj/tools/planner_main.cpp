// planner: command-line front end for the relayplan solvers.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#include "relayplan/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  using namespace relayplan;

  CLI::App app{"UAV relay trajectory and user-association planner"};
  app.require_subcommand(1);

  std::string scenario, out, param;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<double> radii = {200.0, 500.0, 800.0};
  std::vector<double> values;
  int multi_start = 0, workers = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario, "scenario JSON file")->required();
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--workers", workers, "worker threads for independent runs")
        ->check(CLI::PositiveNumber);
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "RNG seed (stochastic steps take no hidden entropy)")
        ->each([&](const std::string&) { seed_given = true; });
  };

  CLI::App* solve = app.add_subcommand("solve", "run the alternating optimizer");
  add_common(solve);
  add_seed(solve);
  solve->add_option("--multi-start", multi_start, "restarts; best result wins")
      ->check(CLI::NonNegativeNumber);

  CLI::App* benchmark = app.add_subcommand("benchmark", "compare against baseline schemes");
  add_common(benchmark);
  add_seed(benchmark);
  benchmark->add_option("--radii", radii, "circle baseline radii in meters")->delimiter(',');
  benchmark->add_option("--multi-start", multi_start, "extra best-of-n row")
      ->check(CLI::NonNegativeNumber);

  CLI::App* sweep = app.add_subcommand("sweep", "re-solve across one parameter grid");
  add_common(sweep);
  sweep->add_option("--param", param, "one of p_uav, altitude, a_max, v_max")->required();
  sweep->add_option("--values", values, "grid values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  const auto opt_seed =
      seed_given ? std::optional<std::uint64_t>(seed) : std::optional<std::uint64_t>();
  if (solve->parsed())
    return cli::cmd_solve({scenario, out, multi_start, opt_seed, workers});
  if (benchmark->parsed())
    return cli::cmd_benchmark({scenario, out, radii, opt_seed, multi_start, workers});
  return cli::cmd_sweep({scenario, out, param, values, workers});
}
