// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include "relayplan/baselines.hpp"
#include "relayplan/immua.hpp"
#include "relayplan/io.hpp"
#include "relayplan/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace relayplan::cli {

// Exit status contract shared by every command: 0 = converged and feasible,
// 1 = usage error (bad flags, unreadable or invalid scenario), 2 = the
// instance is infeasible or the solver could not produce a feasible result.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;

namespace detail {

struct LoadedScenario {
  Scenario scn;
  std::string text;  // original file bytes, echoed into run artifacts
};

// Loads and validates a scenario file; any failure is a usage error.
inline std::optional<LoadedScenario> load(const std::filesystem::path& path,
                                          std::ostream& log) {
  try {
    LoadedScenario out;
    out.text = io::read_text_file(path);
    out.scn = io::scenario_from_json(io::json::parse(out.text));
    return out;
  } catch (const std::exception& e) {
    log << "error: " << path.string() << ": " << e.what() << '\n';
    return std::nullopt;
  }
}

inline io::ComparisonRow comparison_row(const Scenario& scn, const std::string& scheme,
                                        const TrajectoryPlan& plan,
                                        const AssociationMatrix& assoc) {
  io::ComparisonRow row;
  row.scheme = scheme;
  const RateProfile rp = rate_profile(scn, plan, assoc);
  row.per_user = rp.per_user;
  for (int k = 0; k < scn.num_ceus(); ++k) row.sum_rate += scn.weights[k] * rp.per_user[k];
  row.min_floor_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < scn.num_ceus(); ++k)
    row.min_floor_slack = std::min(row.min_floor_slack, rp.per_user[k] - scn.rate_floor[k]);
  row.min_causality_slack = std::numeric_limits<double>::infinity();
  for (double s : causality_slack(rp)) row.min_causality_slack = std::min(row.min_causality_slack, s);
  return row;
}

// Runs fn(i) for i in [0, count) on `workers` threads; exceptions are
// captured per index and rethrown by the coordinator, keeping the output
// deterministic regardless of the pool size.
template <typename Fn>
inline void parallel_for(int count, int workers, Fn fn) {
  const int pool = std::clamp(workers, 1, std::max(1, count));
  if (pool == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < pool; ++t)
    threads.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (std::thread& th : threads) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

struct SolveArgs {
  std::filesystem::path scenario;
  std::filesystem::path out;
  int multi_start = 0;  // 0: single default-initialized run
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

// Runs the alternating optimizer (optionally best-of-n restarts) and writes
// the full run-artifact directory.
inline int cmd_solve(const SolveArgs& args, std::ostream& log = std::cout) {
  const auto loaded = detail::load(args.scenario, log);
  if (!loaded) return kExitUsage;
  if (args.multi_start > 0 && !args.seed) {
    log << "error: --multi-start requires --seed (no hidden entropy)\n";
    return kExitUsage;
  }

  immua::Result res;
  try {
    const immua::Config cfg;
    res = args.multi_start > 0
              ? baselines::multi_start(loaded->scn, cfg, args.multi_start, *args.seed,
                                       args.workers)
              : immua::run(loaded->scn, cfg);
  } catch (const std::exception& e) {
    log << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  }

  io::write_run_artifacts(args.out, loaded->scn, loaded->text, res.plan, res.assoc,
                          res.objective_trace);
  const AuditReport rep = audit_joint(loaded->scn, res.plan, res.assoc);
  log << "objective " << res.objective_trace.back() << " bps/Hz after "
      << res.outer_iterations << " outer iterations; audit: " << rep.summary() << '\n';
  if (!res.converged || !rep.ok()) {
    log << "infeasible: " << (res.note.empty() ? rep.summary() : res.note) << '\n';
    return kExitInfeasible;
  }
  return kExitOk;
}

struct BenchmarkArgs {
  std::filesystem::path scenario;
  std::filesystem::path out;
  std::vector<double> radii = {200.0, 500.0, 800.0};
  std::optional<std::uint64_t> seed;  // required: the random-association row
  int multi_start = 0;                // optional extra row
  int workers = 1;
};

// Evaluates the benchmark schemes and the optimizer on one scenario and
// writes a comparison table.  Fixed trajectories (static hover, circles) get
// an optimized association; fixed association policies (random, clockwise)
// get an optimized trajectory with rate floors dropped, since a fixed policy
// cannot guarantee per-user floors.
inline int cmd_benchmark(const BenchmarkArgs& args, std::ostream& log = std::cout) {
  const auto loaded = detail::load(args.scenario, log);
  if (!loaded) return kExitUsage;
  if (!args.seed) {
    log << "error: benchmark requires --seed for its random-association row\n";
    return kExitUsage;
  }
  const Scenario& scn = loaded->scn;
  std::vector<io::ComparisonRow> rows;

  try {
    // Fixed-trajectory schemes: association solved with floors in force.
    auto fixed_plan_row = [&](const std::string& scheme, const TrajectoryPlan& plan) {
      const association::Solution sol = association::solve(scn, plan);
      rows.push_back(detail::comparison_row(scn, scheme, plan, sol.assoc));
      if (!sol.primal_feasible) log << scheme << ": " << sol.note << '\n';
    };
    fixed_plan_row("static", baselines::static_trajectory(scn));
    for (double radius : args.radii) {
      try {
        fixed_plan_row("circle_" + std::to_string(static_cast<long long>(radius)),
                       baselines::circle_trajectory(scn, radius));
      } catch (const std::exception& e) {
        log << "circle radius " << radius << " skipped: " << e.what() << '\n';
      }
    }

    // Fixed-association schemes: trajectory optimized, floors dropped.
    Scenario no_floor = scn;
    for (double& f : no_floor.rate_floor) f = 0.0;
    immua::Config fixed_cfg;
    fixed_cfg.optimize_association = false;
    const TrajectoryPlan hover = baselines::static_trajectory(no_floor);
    {
      const AssociationMatrix assoc = baselines::random_association(no_floor, hover, *args.seed);
      const immua::Result res = immua::run_from(no_floor, fixed_cfg, hover, assoc);
      rows.push_back(detail::comparison_row(scn, "random_association", res.plan, res.assoc));
    }
    {
      const AssociationMatrix assoc = baselines::clockwise_association(no_floor, hover);
      const immua::Result res = immua::run_from(no_floor, fixed_cfg, hover, assoc);
      rows.push_back(detail::comparison_row(scn, "clockwise_association", res.plan, res.assoc));
    }

    const immua::Config cfg;
    const immua::Result full = immua::run(scn, cfg);
    rows.push_back(detail::comparison_row(scn, "immua", full.plan, full.assoc));
    if (args.multi_start > 0) {
      const immua::Result best =
          baselines::multi_start(scn, cfg, args.multi_start, *args.seed, args.workers);
      rows.push_back(detail::comparison_row(scn, "multi_start", best.plan, best.assoc));
    }
  } catch (const std::exception& e) {
    log << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  }

  std::filesystem::create_directories(args.out);
  io::write_comparison_csv(args.out / "comparison.csv", scn, rows);
  for (const io::ComparisonRow& row : rows)
    log << row.scheme << ": " << row.sum_rate << " bps/Hz\n";
  return kExitOk;
}

struct SweepArgs {
  std::filesystem::path scenario;
  std::filesystem::path out;
  std::string param;  // one of p_uav, altitude, a_max, v_max
  std::vector<double> values;
  int workers = 1;
};

// Re-solves the scenario across a grid of one scalar parameter and writes a
// value -> objective table.
inline int cmd_sweep(const SweepArgs& args, std::ostream& log = std::cout) {
  const auto loaded = detail::load(args.scenario, log);
  if (!loaded) return kExitUsage;
  double Scenario::*field = nullptr;
  if (args.param == "p_uav") field = &Scenario::p_uav;
  else if (args.param == "altitude") field = &Scenario::altitude;
  else if (args.param == "a_max") field = &Scenario::a_max;
  else if (args.param == "v_max") field = &Scenario::v_max;
  if (field == nullptr) {
    log << "error: --param must be one of p_uav, altitude, a_max, v_max (got '"
        << args.param << "')\n";
    return kExitUsage;
  }
  if (args.values.empty()) {
    log << "error: --values must list at least one number\n";
    return kExitUsage;
  }

  std::vector<double> objectives(args.values.size(), 0.0);
  try {
    detail::parallel_for(static_cast<int>(args.values.size()), args.workers, [&](int i) {
      Scenario scn = loaded->scn;
      scn.*field = args.values[i];
      scn.validate();
      objectives[i] = immua::run(scn).objective_trace.back();
    });
  } catch (const std::exception& e) {
    log << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  }

  std::filesystem::create_directories(args.out);
  io::write_sweep_csv(args.out / "sweep.csv", args.param, args.values, objectives);
  for (std::size_t i = 0; i < args.values.size(); ++i)
    log << args.param << " = " << args.values[i] << " -> " << objectives[i] << " bps/Hz\n";
  return kExitOk;
}

}  // namespace relayplan::cli
