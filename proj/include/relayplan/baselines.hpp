// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include "relayplan/association_solver.hpp"
#include "relayplan/immua.hpp"
#include "relayplan/mobility_solver.hpp"
#include "relayplan/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

namespace relayplan::baselines {

// Benchmark plan: hover at the start point for the whole period.
inline TrajectoryPlan static_trajectory(const Scenario& scn) {
  return TrajectoryPlan::hover(scn);
}

namespace detail {

// Rest-to-rest straight-line speed samples covering exactly `dist`: a
// symmetric trapezoid capped at `vcap` with per-step change at most `dv`,
// grown until its area reaches the target and then scaled down (scaling
// never violates the caps).  Returns speeds per sample, first and last zero.
inline std::vector<double> ramp_profile(double dist, double dt, double vcap, double dv) {
  for (int steps = 2;; ++steps) {
    std::vector<double> speed(steps + 1, 0.0);
    for (int i = 0; i <= steps; ++i) speed[i] = std::min(vcap, dv * std::min(i, steps - i));
    double area = 0.0;
    for (int i = 0; i < steps; ++i) area += 0.5 * dt * (speed[i] + speed[i + 1]);
    if (area >= dist) {
      for (double& s : speed) s *= dist / area;
      return speed;
    }
    if (steps > 100000) throw std::domain_error("ramp_profile: distance out of reach");
  }
}

}  // namespace detail

// Benchmark plan: a circle of the given radius centered at the start point,
// reached by a straight outbound ramp, swept at uniform angular speed for
// every slot the budget allows (which may be several revolutions or a
// partial arc), and left by a straight homebound ramp; leftover slots hover
// at the start.  The plan is built as a velocity sequence and integrated
// with the trapezoid rule, so the discrete position/velocity updates hold
// exactly; the cruise samples form an exact polygon inscribed in the
// requested circle (sample speed (2r/dt) tan(eta/2) for heading step eta),
// while the short speed-ramp samples at the junctions deviate from the
// circle by O(eta^2 r).
inline TrajectoryPlan circle_trajectory(const Scenario& scn, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("circle_trajectory: radius must be positive and finite");
  const int N = scn.num_slots;
  const double dt = scn.slot_len();
  const int steps_total = N - 1;
  const double dv = scn.a_max * dt;

  // Outbound ramp to the circle's east point, at rest on both ends.
  const std::vector<double> out = detail::ramp_profile(radius, dt, scn.v_max, dv);
  const int ramp_steps = static_cast<int>(out.size()) - 1;

  // Cruise geometry, shrunk until the velocity chain respects every limit.
  for (double shrink = 1.0; shrink > 0.05; shrink *= 0.95) {
    // Largest heading step allowed by the speed cap and by the turning
    // acceleration 2 V sin(eta/2) <= a_max dt, with `shrink` in reserve.
    const double eta_speed = 2.0 * std::atan(scn.v_max * dt / (2.0 * radius));
    const double eta_turn = dt * std::sqrt(scn.a_max / radius);
    const double eta = shrink * std::min(eta_speed, eta_turn);
    const double v_cruise = (2.0 * radius / dt) * std::tan(eta / 2.0);

    // Tangential speed-up inside the arc, heading advancing with arc length.
    std::vector<double> arc_speed;
    for (double s = 0.0; s < v_cruise - 1e-12; s = std::min(v_cruise, s + 0.6 * dv))
      arc_speed.push_back(s);
    arc_speed.push_back(v_cruise);
    const int join_steps = static_cast<int>(arc_speed.size()) - 1;

    // Cruise for every slot left after the ramps, the junction speed-ups,
    // and a homebound reserve (the exit sits one radius from the start, so
    // the home ramp mirrors the outbound one; two slots of slack cover the
    // small junction wander).
    const int cruise_steps = steps_total - 2 * ramp_steps - 2 * join_steps - 2;
    if (cruise_steps < 1) break;

    // Assemble the velocity samples, then integrate.
    std::vector<Vec2> w(N, Vec2::Zero());
    int n = 0;
    for (int i = 1; i <= ramp_steps; ++i) w[++n] = Vec2(out[i], 0.0);
    double heading = std::numbers::pi / 2.0;  // counterclockwise from the east point
    for (int i = 1; i <= join_steps; ++i) {
      heading += dt * 0.5 * (arc_speed[i - 1] + arc_speed[i]) / radius;
      w[++n] = arc_speed[i] * Vec2(std::cos(heading), std::sin(heading));
    }
    for (int i = 0; i < cruise_steps; ++i) {
      heading += eta;
      w[++n] = v_cruise * Vec2(std::cos(heading), std::sin(heading));
    }
    for (int i = join_steps - 1; i >= 0; --i) {
      heading += dt * 0.5 * (arc_speed[i + 1] + arc_speed[i]) / radius;
      w[++n] = arc_speed[i] * Vec2(std::cos(heading), std::sin(heading));
    }
    const int homeward_from = n;

    TrajectoryPlan plan;
    plan.positions.assign(N, scn.start_point);
    plan.velocities = w;
    plan.accelerations.assign(N, Vec2::Zero());
    for (int i = 0; i < homeward_from; ++i)
      plan.positions[i + 1] =
          plan.positions[i] + 0.5 * dt * (plan.velocities[i] + plan.velocities[i + 1]);

    // Homebound ramp: aim straight from wherever the arc ended.
    const Vec2 back = scn.start_point - plan.positions[homeward_from];
    const std::vector<double> home =
        detail::ramp_profile(std::max(back.norm(), 1e-12), dt, scn.v_max, dv);
    if (homeward_from + static_cast<int>(home.size()) - 1 > steps_total) continue;
    const Vec2 dir = back.norm() > 0.0 ? Vec2(back / back.norm()) : Vec2(1.0, 0.0);
    for (int i = 1; i < static_cast<int>(home.size()); ++i) {
      plan.velocities[homeward_from + i] = home[i] * dir;
      plan.positions[homeward_from + i] =
          plan.positions[homeward_from + i - 1] +
          0.5 * dt *
              (plan.velocities[homeward_from + i - 1] + plan.velocities[homeward_from + i]);
    }
    plan.positions[homeward_from + home.size() - 1] = scn.start_point;  // exact closure
    for (std::size_t i = homeward_from + home.size(); i < static_cast<std::size_t>(N); ++i) {
      plan.positions[i] = scn.start_point;
      plan.velocities[i] = Vec2::Zero();
    }
    for (int i = 0; i + 1 < N; ++i)
      plan.accelerations[i] = (plan.velocities[i + 1] - plan.velocities[i]) / dt;

    if (audit_plan(scn, plan).ok()) return plan;
  }
  throw std::domain_error(
      "circle_trajectory: no circular sweep of this radius fits the slot budget "
      "under the speed and acceleration limits");
}

// Benchmark policy: serve a uniformly random user in every slot but the
// first, then restore causality by idling the earliest violating slots.
inline AssociationMatrix random_association(const Scenario& scn, const TrajectoryPlan& plan,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, scn.num_ceus() - 1);
  AssociationMatrix assoc = AssociationMatrix::all_idle(scn);
  for (int n = 1; n < scn.num_slots; ++n) assoc.served[n] = pick(rng);
  return association::repair_causality(scn, association::rate_table(scn, plan), assoc);
}

// Users in clockwise tour order around their centroid, starting from user 0.
inline std::vector<int> clockwise_order(const Scenario& scn) {
  const int K = scn.num_ceus();
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : scn.ceu_positions) centroid += p;
  centroid /= K;
  std::vector<double> bearing(K);
  for (int k = 0; k < K; ++k) {
    const Vec2 d = scn.ceu_positions[k] - centroid;
    bearing[k] = std::atan2(d.y(), d.x());
  }
  // Angle swept clockwise from user 0's bearing; ties keep index order.
  auto swept = [&](int k) {
    return std::fmod(bearing[0] - bearing[k] + 4.0 * std::numbers::pi,
                     2.0 * std::numbers::pi);
  };
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return swept(a) < swept(b); });
  return order;
}

// Benchmark policy: visit the users in clockwise order, giving each an equal
// contiguous block of slots (sizes differing by at most one, earlier blocks
// take the remainder), then restore causality.
inline AssociationMatrix clockwise_association(const Scenario& scn, const TrajectoryPlan& plan) {
  const int N = scn.num_slots, K = scn.num_ceus();
  const std::vector<int> order = clockwise_order(scn);
  AssociationMatrix assoc = AssociationMatrix::all_idle(scn);
  const int base = (N - 1) / K, rem = (N - 1) % K;
  int slot = 1;
  for (int b = 0; b < K; ++b)
    for (int i = 0, len = base + (b < rem ? 1 : 0); i < len; ++i) assoc.served[slot++] = order[b];
  return association::repair_causality(scn, association::rate_table(scn, plan), assoc);
}

struct BruteForceResult {
  AssociationMatrix assoc;
  double value = 0.0;
  bool feasible_found = false;
};

// Exhaustive oracle over every per-slot assignment (including idle), kept
// deliberately independent of the dual solver so it can vouch for it.
// Returns the exactly feasible maximizer of the weighted average rate; the
// enumeration is in increasing lexicographic order (idle before user 0) and
// acceptance is strict, so ties resolve to the lexicographically smallest.
inline BruteForceResult brute_force_association(const Scenario& scn,
                                                const TrajectoryPlan& plan) {
  const int N = scn.num_slots, K = scn.num_ceus();
  if ((N - 1) * std::log2(K + 1.0) > 20.0 + 1e-9)
    throw std::invalid_argument("brute_force_association: search space exceeds 2^20");
  const association::RateTable table = association::rate_table(scn, plan);
  BruteForceResult best;
  best.assoc = AssociationMatrix::all_idle(scn);
  AssociationMatrix cand = AssociationMatrix::all_idle(scn);
  for (;;) {
    if (association::exact_feasible(scn, table, cand)) {
      const double v = association::weighted_value(scn, table, cand);
      if (!best.feasible_found || v > best.value) {
        best.feasible_found = true;
        best.value = v;
        best.assoc = cand;
      }
    }
    int j = N - 1;  // odometer over slots 2..N, rightmost fastest
    while (j >= 1 && cand.served[j] == K - 1) cand.served[j--] = -1;
    if (j < 1) break;
    ++cand.served[j];
  }
  return best;
}

// One randomized feasible starting pair for multi_start.  A random initial
// velocity and per-slot accelerations are projected back into the flight
// envelope, giving a smooth excursion from the start point; the association
// is a causality-repaired uniform draw, replaced by a solved one when rate
// floors make the draw infeasible.
inline std::pair<TrajectoryPlan, AssociationMatrix> random_start(
    const Scenario& scn, const association::SolveOptions& assoc_opts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  TrajectoryPlan plan = TrajectoryPlan::hover(scn);
  plan.velocities[0] = scn.v_max * Vec2(unit(rng), unit(rng));
  for (int n = 0; n + 1 < scn.num_slots; ++n)
    plan.accelerations[n] = scn.a_max * Vec2(unit(rng), unit(rng));
  plan = mobility::feasibility_restore(scn, plan);

  AssociationMatrix assoc = random_association(scn, plan, rng());
  if (!audit_joint(scn, plan, assoc).ok()) {
    const association::Solution repaired = association::solve(scn, plan, assoc_opts);
    if (!repaired.primal_feasible)
      throw std::runtime_error("multi_start: no feasible association at a random start: " +
                               repaired.note);
    assoc = repaired.assoc;
  }
  return {plan, assoc};
}

// Best-of-n restart wrapper: start 0 is the default initialization, starts
// 1..n-1 are seeded random pairs.  Starts run independently (optionally on a
// small thread pool) and the winner is the highest final exact objective,
// ties resolved to the lowest start index, so the result is deterministic
// for a given seed regardless of worker count.
inline immua::Result multi_start(const Scenario& scn, const immua::Config& cfg, int num_starts,
                                 std::uint64_t seed, int workers = 1) {
  if (num_starts < 1) throw std::invalid_argument("multi_start: need at least one start");
  std::vector<immua::Result> results(num_starts);
  std::vector<std::string> failures(num_starts);
  std::vector<char> succeeded(num_starts, 0);

  auto run_one = [&](int i) {
    try {
      if (i == 0) {
        results[i] = immua::run(scn, cfg);
      } else {
        auto [plan, assoc] =
            random_start(scn, cfg.association, seed + 0x9E3779B97F4A7C15ull * i);
        results[i] = immua::run_from(scn, cfg, std::move(plan), std::move(assoc));
      }
      succeeded[i] = 1;
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  };

  const int pool = std::clamp(workers, 1, num_starts);
  if (pool == 1) {
    for (int i = 0; i < num_starts; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < pool; ++t)
      threads.emplace_back([&] {
        for (int i = next.fetch_add(1); i < num_starts; i = next.fetch_add(1)) run_one(i);
      });
    for (std::thread& th : threads) th.join();
  }

  int best = -1;
  for (int i = 0; i < num_starts; ++i) {
    if (!succeeded[i]) continue;
    if (best < 0 || results[i].objective_trace.back() > results[best].objective_trace.back())
      best = i;
  }
  if (best < 0)
    throw std::runtime_error("multi_start: every start failed; first: " + failures[0]);
  return results[best];
}

}  // namespace relayplan::baselines
