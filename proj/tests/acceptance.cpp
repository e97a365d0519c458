// Acceptance gate: one check per release criterion, each printing a single
// [PASS]/[FAIL] line; the process exits nonzero if any check fails.
//
// The best-of-100 multi-start comparison (criterion 9) runs only when the
// binary is invoked with the argument "slow"; it needs roughly 45 core-minutes
// (spread across all cores) and is kept out of the default CI lane.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#include "relayplan/baselines.hpp"
#include "relayplan/immua.hpp"
#include "relayplan/mobility_solver.hpp"

#include "golden/mobility_golden_value.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace relayplan;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Fixtures (mirrors tests/test_util.hpp without the gtest dependency).
// ---------------------------------------------------------------------------

Scenario reference_scenario() {
  const double r = 1000.0;
  const double s3 = std::sqrt(3.0);
  Scenario scn;
  scn.gbs_positions = {{0.0, r}, {s3 * r, r}, {s3 * r / 2.0, -r / 2.0}};
  scn.ceu_positions = {{1310.116219432397, 707.08294825294274},
                       {650.49009029668196, 962.21697138869149},
                       {417.40304920129682, 290.8039604383539},
                       {1118.5254037844386, 62.65717108885849}};
  scn.altitude = 100.0;
  scn.period = 240.0;
  scn.num_slots = 60;
  scn.start_point = {s3 * r / 2.0, r / 2.0};
  scn.v_max = 50.0;
  scn.a_max = 5.0;
  scn.p_gbs = 10.0;
  scn.p_uav = 1.0;
  scn.ref_gain = db_to_linear(-60.0);
  scn.noise_power = dbm_to_watts(-114.0);
  scn.num_antennas = 8;
  scn.fading_sq_norms = {8.0, 8.0, 8.0};
  scn.rate_floor = {0.5, 0.5, 0.5, 0.5};
  scn.weights = {1.0, 1.0, 1.0, 1.0};
  scn.validate();
  return scn;
}

Scenario mobility_oracle_scenario() {
  const double s3 = std::sqrt(3.0);
  Scenario scn;
  scn.gbs_positions = {{0.0, 1000.0}, {s3 * 1000.0, 1000.0}};
  scn.ceu_positions = {{700.0, 600.0}, {1050.0, 420.0}};
  scn.altitude = 100.0;
  scn.period = 24.0;
  scn.num_slots = 6;
  scn.start_point = {s3 / 2.0 * 1000.0, 500.0};
  scn.v_max = 50.0;
  scn.a_max = 5.0;
  scn.p_gbs = 10.0;
  scn.p_uav = 1.0;
  scn.ref_gain = 1e-6;
  scn.noise_power = dbm_to_watts(-114.0);
  scn.num_antennas = 8;
  scn.fading_sq_norms = {8.0, 8.0};
  scn.rate_floor = {0.0, 0.0};
  scn.weights = {1.0, 1.0};
  scn.validate();
  return scn;
}

// Random small association instance in the backhaul-dominant regime (the
// relay's buffer never runs dry, so the brute-force landscape is rich).
struct AssociationInstance {
  Scenario scn;
  TrajectoryPlan plan;
};

AssociationInstance random_association_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto real = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto integer = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  const bool weighted = seed % 2 == 1;
  for (;;) {
    Scenario scn;
    const int nb = integer(2, 3);
    for (int m = 0; m < nb; ++m) {
      const double ang = real(0.0, 2.0 * std::numbers::pi);
      const double rad = real(600.0, 1000.0);
      scn.gbs_positions.emplace_back(rad * std::cos(ang), rad * std::sin(ang));
    }
    const int K = integer(1, 3);
    for (int k = 0; k < K; ++k) {
      const double ang = real(0.0, 2.0 * std::numbers::pi);
      const double rad = real(0.0, 300.0);
      scn.ceu_positions.emplace_back(rad * std::cos(ang), rad * std::sin(ang));
    }
    scn.altitude = real(100.0, 140.0);
    scn.num_slots = integer(4, 8);
    scn.period = 4.0 * scn.num_slots;
    scn.start_point = Vec2(real(-50.0, 50.0), real(-50.0, 50.0));
    scn.p_gbs = real(8.0, 20.0);
    scn.p_uav = real(0.2, 0.8);
    scn.fading_sq_norms.clear();
    for (int m = 0; m < nb; ++m) scn.fading_sq_norms.push_back(real(5.0, 12.0));
    scn.rate_floor.assign(K, 0.0);
    scn.weights.assign(K, 1.0);
    if (weighted)
      for (int k = 0; k < K; ++k) scn.weights[k] = real(0.5, 2.0);

    TrajectoryPlan plan;
    plan.velocities.assign(scn.num_slots, Vec2::Zero());
    plan.accelerations.assign(scn.num_slots, Vec2::Zero());
    for (int n = 0; n < scn.num_slots; ++n) {
      const double ang = real(0.0, 2.0 * std::numbers::pi);
      const double rad = real(0.0, 300.0);
      plan.positions.emplace_back(rad * std::cos(ang), rad * std::sin(ang));
    }

    double min_uplink = 1e300, max_user = 0.0;
    for (int n = 0; n < scn.num_slots; ++n) {
      if (n + 1 < scn.num_slots)
        min_uplink = std::min(min_uplink, scn.uplink_rate(plan.positions[n]));
      if (n >= 1)
        for (int k = 0; k < K; ++k)
          max_user = std::max(max_user, scn.slot_user_rate(plan.positions[n], k));
    }
    if (min_uplink > max_user) return {scn, plan};
  }
}

// Deterministic scattered-then-projected feasible plan around the start.
TrajectoryPlan random_feasible_plan(const Scenario& scn, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-spread, spread);
  TrajectoryPlan plan = TrajectoryPlan::hover(scn);
  plan.velocities[0] = Vec2(off(rng), off(rng)) / 40.0;
  for (int n = 0; n + 1 < scn.num_slots; ++n)
    plan.accelerations[n] = Vec2(off(rng), off(rng)) / 200.0;
  return mobility::feasibility_restore(scn, plan);
}

AssociationMatrix random_served(const Scenario& scn, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(-1, scn.num_ceus() - 1);
  AssociationMatrix assoc = AssociationMatrix::all_idle(scn);
  for (int n = 1; n < scn.num_slots; ++n) assoc.served[n] = pick(rng);
  return assoc;
}

// ---------------------------------------------------------------------------
// Criterion bookkeeping: every solver/baseline output produced while checking
// criteria 7, 8, and 11 is recorded here and re-audited under criterion 10.
// ---------------------------------------------------------------------------

struct AuditEntry {
  std::string label;
  bool passed = false;
  std::string detail;
};
std::vector<AuditEntry> g_audits;

void record_joint(const Scenario& scn, const TrajectoryPlan& plan,
                  const AssociationMatrix& assoc, const std::string& label) {
  const AuditReport rep = audit_joint(scn, plan, assoc, 1e-6);
  g_audits.push_back({label, rep.ok(), rep.summary()});
}

void record_association(const Scenario& scn, const TrajectoryPlan& plan,
                        const AssociationMatrix& assoc, const std::string& label) {
  AuditReport rep = audit_association(scn, assoc);
  bool ok = rep.ok();
  std::string detail = rep.summary();
  if (ok) {
    const RateProfile rp = rate_profile(scn, plan, assoc);
    const std::vector<double> slack = causality_slack(rp);
    double up = 0.0;
    for (std::size_t j = 0; j < slack.size(); ++j) {
      up += rp.uplink[j];
      if (slack[j] < -1e-6 * std::max(1.0, up)) {
        ok = false;
        detail = "causality violated at prefix " + std::to_string(j + 2);
        break;
      }
    }
  }
  g_audits.push_back({label, ok, detail});
}

int g_failures = 0;

void report(int index, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s — %s\n", ok ? "PASS" : "FAIL", index, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Bound sandwich on random positions in a 2 km box.
// ---------------------------------------------------------------------------
void criterion_1() {
  const auto t0 = Clock::now();
  const Scenario scn = reference_scenario();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> box(-1000.0, 1000.0);

  int violations = 0, upper_checked = 0;
  double worst = 0.0;
  surrogate::SurrogateModel model =
      surrogate::build(scn, random_feasible_plan(scn, 7, 800.0));
  std::uniform_int_distribution<int> slot(0, scn.num_slots - 1);
  for (int i = 0; i < 10000; ++i) {
    if (i % 2500 == 0 && i > 0)
      model = surrogate::build(scn, random_feasible_plan(scn, 7 + i, 800.0));
    const Vec2 pos = scn.start_point + Vec2(box(rng), box(rng));
    const int n = slot(rng);
    const double up_gap = surrogate::uplink_lower(model, scn, pos, n) - scn.uplink_rate(pos);
    if (up_gap > 1e-9) ++violations;
    worst = std::max(worst, up_gap);
    for (int k = 0; k < scn.num_ceus(); ++k) {
      const double exact = scn.slot_user_rate(pos, k);
      const double lo_gap = surrogate::user_rate_lower(model, scn, pos, k, n) - exact;
      if (lo_gap > 1e-9) ++violations;
      worst = std::max(worst, lo_gap);
      const Vec2 d = pos - scn.ceu_positions[k];
      if (std::abs(d.x()) > 1.1e-3 && std::abs(d.y()) > 1.1e-3) {  // off singular axes
        ++upper_checked;
        const double hi_gap = exact - surrogate::user_rate_upper(scn, pos, k);
        if (hi_gap > 1e-9) ++violations;
        worst = std::max(worst, hi_gap);
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = violations == 0 && secs < 5.0;
  report(1, ok, "bound sandwich on 10^4 random positions",
         std::to_string(violations) + " violations, worst gap " + fmt(worst) + ", " +
             std::to_string(upper_checked) + " upper-bound checks, " + fmt(secs) + " s");
}

// ---------------------------------------------------------------------------
// 2. Taylor tangency of the lower bounds at their expansion points.
// ---------------------------------------------------------------------------
void criterion_2() {
  const Scenario scn = reference_scenario();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> slot(0, scn.num_slots - 1);
  std::uniform_int_distribution<int> user(0, scn.num_ceus() - 1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const TrajectoryPlan plan = random_feasible_plan(scn, 1000 + i, 900.0);
    const surrogate::SurrogateModel model = surrogate::build(scn, plan);
    const int n = slot(rng), k = user(rng);
    const double exact = scn.slot_user_rate(plan.positions[n], k);
    const double bound = surrogate::user_rate_lower(model, scn, plan.positions[n], k, n);
    worst = std::max(worst, std::abs(bound - exact) / std::max(1e-300, std::abs(exact)));
  }
  report(2, worst <= 1e-12, "lower-bound tangency at 100 expansion points",
         "worst relative gap " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 3. Analytic gradient of the surrogate objective vs central differences.
// ---------------------------------------------------------------------------
void criterion_3() {
  Scenario scn = reference_scenario();
  scn.period = 80.0;
  scn.num_slots = 20;
  scn.rate_floor.assign(scn.num_ceus(), 0.0);
  scn.validate();
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const TrajectoryPlan plan = random_feasible_plan(scn, 3000 + trial, 700.0);
    const AssociationMatrix assoc = random_served(scn, 9000 + trial);
    const surrogate::SurrogateModel model =
        surrogate::build(scn, random_feasible_plan(scn, 5000 + trial, 700.0));

    const auto [value, grad] =
        mobility::surrogate_objective_and_gradient(scn, model, assoc, plan);
    (void)value;
    Eigen::VectorXd numeric = Eigen::VectorXd::Zero(grad.size());
    const double h = 1e-4;
    for (int n = 0; n < scn.num_slots; ++n) {
      for (int d = 0; d < 2; ++d) {
        TrajectoryPlan p = plan, m = plan;
        p.positions[n][d] += h;
        m.positions[n][d] -= h;
        numeric[2 * n + d] =
            (mobility::surrogate_objective_and_gradient(scn, model, assoc, p).first -
             mobility::surrogate_objective_and_gradient(scn, model, assoc, m).first) /
            (2.0 * h);
      }
    }
    const double err = (grad - numeric).norm() / std::max(1.0, grad.norm());
    worst = std::max(worst, err);
  }
  report(3, worst <= 1e-5, "surrogate gradient vs central differences on 50 plans",
         "worst relative error " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 4. Midpoint concavity/convexity certificates.
// ---------------------------------------------------------------------------
void criterion_4() {
  const Scenario scn = reference_scenario();
  const surrogate::SurrogateModel model = surrogate::build(scn, TrajectoryPlan::hover(scn));
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> coord(-800.0, 800.0);
  std::uniform_int_distribution<int> slot(0, scn.num_slots - 1);
  std::uniform_int_distribution<int> user(0, scn.num_ceus() - 1);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = slot(rng), k = user(rng);
    const Vec2 p = scn.start_point + Vec2(coord(rng), coord(rng));
    const Vec2 q = scn.start_point + Vec2(coord(rng), coord(rng));
    const Vec2 mid = 0.5 * (p + q);
    if (surrogate::uplink_lower(model, scn, mid, n) + 1e-9 <
        0.5 * (surrogate::uplink_lower(model, scn, p, n) +
               surrogate::uplink_lower(model, scn, q, n)))
      ++violations;
    if (surrogate::user_rate_lower(model, scn, mid, k, n) + 1e-9 <
        0.5 * (surrogate::user_rate_lower(model, scn, p, k, n) +
               surrogate::user_rate_lower(model, scn, q, k, n)))
      ++violations;
  }
  for (int i = 0; i < 1000; ++i) {
    const int k = user(rng);
    const double sx = (i % 2) ? 1.0 : -1.0, sy = (i % 3) ? 1.0 : -1.0;
    std::uniform_real_distribution<double> off(1.0, 900.0);
    const Vec2 p = scn.ceu_positions[k] + Vec2(sx * off(rng), sy * off(rng));
    const Vec2 q = scn.ceu_positions[k] + Vec2(sx * off(rng), sy * off(rng));
    const Vec2 mid = 0.5 * (p + q);
    if (surrogate::user_rate_upper(scn, mid, k) - 1e-9 >
        0.5 * (surrogate::user_rate_upper(scn, p, k) + surrogate::user_rate_upper(scn, q, k)))
      ++violations;
  }
  report(4, violations == 0, "midpoint curvature certificates on 10^3 plan pairs",
         std::to_string(violations) + " violations");
}

// ---------------------------------------------------------------------------
// 5. Dual association solver vs the exhaustive oracle.
// ---------------------------------------------------------------------------
void criterion_5() {
  const auto t0 = Clock::now();
  int mismatches = 0, shape_faults = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const AssociationInstance inst = random_association_instance(seed);
    const association::Solution sol = association::solve(inst.scn, inst.plan, {});
    const baselines::BruteForceResult oracle =
        baselines::brute_force_association(inst.scn, inst.plan);
    const double gap = std::abs(sol.primal_value - oracle.value);
    worst = std::max(worst, gap);
    if (!sol.primal_feasible || gap > 1e-6) ++mismatches;
    if (audit_association(inst.scn, sol.assoc).ok())
      record_association(inst.scn, inst.plan, sol.assoc,
                         "association instance seed " + std::to_string(seed));
    else
      ++shape_faults;
  }
  const double secs = seconds_since(t0);
  const bool ok = mismatches == 0 && shape_faults == 0 && secs < 30.0;
  report(5, ok, "dual association matches brute force on 200 instances",
         std::to_string(mismatches) + " mismatches, worst gap " + fmt(worst) + ", " +
             fmt(secs) + " s");
}

// ---------------------------------------------------------------------------
// 6. Mobility solver vs the recorded convex-solver optimum.
// ---------------------------------------------------------------------------
void criterion_6() {
  const Scenario scn = mobility_oracle_scenario();
  AssociationMatrix assoc;
  assoc.num_users = scn.num_ceus();
  assoc.served = {-1, 0, 1, 0, 1, 0};
  const TrajectoryPlan hover = TrajectoryPlan::hover(scn);
  const surrogate::SurrogateModel model = surrogate::build(scn, hover);
  const mobility::MobilitySolution sol = mobility::solve(scn, model, assoc, hover);
  const double rel = std::abs(sol.objective - golden::kMobilityGoldenObjective) /
                     std::abs(golden::kMobilityGoldenObjective);
  record_joint(scn, sol.plan, assoc, "mobility oracle instance");
  report(6, sol.surrogate_feasible && rel <= 1e-4,
         "trajectory subproblem reproduces the recorded optimum",
         "objective " + fmt(sol.objective) + ", relative gap " + fmt(rel));
}

// ---------------------------------------------------------------------------
// 7/8/11 share full optimizer runs on the reference scenario; results are
// cached by configuration label.
// ---------------------------------------------------------------------------
struct RunCache {
  std::map<std::string, immua::Result> runs;

  const immua::Result& get(const Scenario& scn, const std::string& label) {
    auto it = runs.find(label);
    if (it == runs.end()) {
      it = runs.emplace(label, immua::run(scn, {})).first;
      record_joint(scn, it->second.plan, it->second.assoc, "optimizer run " + label);
    }
    return it->second;
  }
};
RunCache g_cache;

void criterion_7() {
  const auto t0 = Clock::now();
  const Scenario scn = reference_scenario();
  const immua::Result& res = g_cache.get(scn, "reference");
  const double secs = seconds_since(t0);

  bool monotone = true;
  for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
    if (res.objective_trace[i] < res.objective_trace[i - 1] - 1e-8) monotone = false;
  const double final_value = res.objective_trace.back();
  const std::size_t probe = std::min<std::size_t>(5, res.objective_trace.size() - 1);
  const bool early = res.objective_trace[probe] >= 0.99 * final_value;
  const bool ok = res.converged && monotone && res.outer_iterations <= 10 && early &&
                  secs < 120.0;
  report(7, ok, "optimizer monotone and converged on the reference scenario",
         "objective " + fmt(final_value) + ", " + std::to_string(res.outer_iterations) +
             " outer iterations, trace[" + std::to_string(probe) + "]/final " +
             fmt(res.objective_trace[probe] / final_value) + ", " + fmt(secs) + " s");
}

double association_optimized_value(const Scenario& scn, const TrajectoryPlan& plan,
                                   const std::string& label) {
  const association::Solution sol = association::solve(scn, plan, {});
  if (!sol.primal_feasible) return -1.0;
  record_joint(scn, plan, sol.assoc, label);
  double value = 0.0;
  const RateProfile rp = rate_profile(scn, plan, sol.assoc);
  for (int k = 0; k < scn.num_ceus(); ++k) value += scn.weights[k] * rp.per_user[k];
  return value;
}

void criterion_8() {
  bool ok = true;
  std::string detail;
  std::vector<double> static_values;
  for (double vmax : {30.0, 40.0, 50.0}) {
    Scenario scn = reference_scenario();
    scn.v_max = vmax;
    scn.validate();
    const std::string tag = "vmax " + std::to_string(static_cast<int>(vmax));

    const double st = association_optimized_value(scn, baselines::static_trajectory(scn),
                                                  "static " + tag);
    const double c200 = association_optimized_value(
        scn, baselines::circle_trajectory(scn, 200.0), "circle 200 " + tag);
    const double c500 = association_optimized_value(
        scn, baselines::circle_trajectory(scn, 500.0), "circle 500 " + tag);
    const double c800 = association_optimized_value(
        scn, baselines::circle_trajectory(scn, 800.0), "circle 800 " + tag);
    static_values.push_back(st);

    const immua::Result& res =
        g_cache.get(scn, vmax == 50.0 ? "reference" : "reference " + tag);
    const double opt = res.objective_trace.back();

    const bool beats_all = opt > st && opt > c200 && opt > c500 && opt > c800;
    const bool ring_order = c500 > c200 && c500 > c800;
    ok = ok && beats_all && ring_order && st > 0 && c200 > 0 && c500 > 0 && c800 > 0;
    detail += tag + ": optimizer " + fmt(opt) + " static " + fmt(st) + " circles " +
              fmt(c200) + "/" + fmt(c500) + "/" + fmt(c800) + "; ";
  }
  for (double v : static_values)
    if (std::abs(v - static_values.front()) > 1e-12) ok = false;
  report(8, ok, "optimizer dominates baselines; 500 m circle best; static speed-invariant",
         detail);
}

void criterion_9_slow() {
  const auto t0 = Clock::now();
  const Scenario scn = reference_scenario();
  const double base = g_cache.get(scn, "reference").objective_trace.back();
  // Restarts are independent and the pooled result is bitwise identical to
  // the serial one, so use every core to stay inside the time budget.
  const int workers = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  const immua::Result best = baselines::multi_start(scn, {}, 100, 424242, workers);
  record_joint(scn, best.plan, best.assoc, "multi-start best of 100");
  const double ratio = base / best.objective_trace.back();
  const double secs = seconds_since(t0);
  report(9, ratio >= 0.97, "default run within 3% of best-of-100 multi-start",
         "default " + fmt(base) + ", best " + fmt(best.objective_trace.back()) + ", ratio " +
             fmt(ratio) + ", " + fmt(secs) + " s");
}

void criterion_10() {
  int failed = 0;
  std::string first;
  for (const AuditEntry& e : g_audits)
    if (!e.passed && ++failed == 1) first = e.label + " (" + e.detail + ")";
  report(10, failed == 0 && !g_audits.empty(),
         "feasibility audits on every recorded output",
         std::to_string(g_audits.size() - failed) + "/" + std::to_string(g_audits.size()) +
             " audits clean" + (failed ? ", first failure: " + first : ""));
}

void criterion_11() {
  bool ok = true;
  std::string detail;

  auto run_value = [&](const char* field, double value) {
    Scenario scn = reference_scenario();
    if (std::string(field) == "p_uav")
      scn.p_uav = value;
    else if (std::string(field) == "a_max")
      scn.a_max = value;
    else
      scn.altitude = value;
    scn.validate();
    const std::string label = (value == 1.0 && std::string(field) == "p_uav") ||
                                      (value == 5.0 && std::string(field) == "a_max") ||
                                      (value == 100.0 && std::string(field) == "altitude")
                                  ? "reference"
                                  : std::string(field) + " " + fmt(value);
    return g_cache.get(scn, label).objective_trace.back();
  };

  std::vector<double> pu;
  for (double v : {0.5, 1.0, 2.0}) pu.push_back(run_value("p_uav", v));
  ok = ok && pu[0] <= pu[1] + 1e-9 && pu[1] <= pu[2] + 1e-9;
  detail += "p_uav " + fmt(pu[0]) + " <= " + fmt(pu[1]) + " <= " + fmt(pu[2]) + "; ";

  std::vector<double> am;
  for (double v : {2.0, 5.0}) am.push_back(run_value("a_max", v));
  ok = ok && am[0] <= am[1] + 1e-9;
  detail += "a_max " + fmt(am[0]) + " <= " + fmt(am[1]) + "; ";

  std::vector<double> alt;
  for (double v : {100.0, 150.0, 200.0}) alt.push_back(run_value("altitude", v));
  ok = ok && alt[0] + 1e-9 >= alt[1] && alt[1] + 1e-9 >= alt[2];
  detail += "altitude " + fmt(alt[0]) + " >= " + fmt(alt[1]) + " >= " + fmt(alt[2]);

  report(11, ok, "objective monotone along power, agility, and altitude sweeps", detail);
}

}  // namespace

int main(int argc, char** argv) {
  const bool slow = argc > 1 && std::string(argv[1]) == "slow";

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (slow)
    criterion_9_slow();
  else
    std::printf("[SKIP] criterion  9: best-of-100 multi-start — run with the 'slow' "
                "argument (about half an hour on one core)\n");
  criterion_11();
  criterion_10();  // audits everything the earlier checks produced

  if (g_failures == 0) {
    std::printf("acceptance: all checks passed\n");
    return 0;
  }
  std::printf("acceptance: %d check(s) FAILED\n", g_failures);
  return 1;
}
