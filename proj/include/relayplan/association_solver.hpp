// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include "relayplan/scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace relayplan::association {

// For a fixed trajectory the association subproblem is an integer program:
// pick at most one user per slot to maximize the weighted sum of average user
// rates subject to the per-user rate floors and the relay causality
// constraints (a prefix budget: bits forwarded through slot n cannot exceed
// bits received through slot n-1).  We solve its LP relaxation through the
// Lagrangian dual: for fixed multipliers the Lagrangian separates per slot
// and the inner maximizer is integral in closed form, and the multipliers
// follow a projected subgradient with a diminishing step.

// Exact per-slot rates of the fixed trajectory, precomputed once.
struct RateTable {
  Eigen::MatrixXd m;          // K x N relay-to-user rates (all slots)
  Eigen::VectorXd uplink;     // N, GBS-to-relay rates; the final slot is 0
  Eigen::VectorXd cum_uplink; // cum_uplink[j] = sum_{i<j} uplink[i]
};

inline RateTable rate_table(const Scenario& scn, const TrajectoryPlan& plan) {
  const int N = scn.num_slots, K = scn.num_ceus();
  RateTable t;
  t.m.resize(K, N);
  t.uplink.setZero(N);
  t.cum_uplink.setZero(N);
  for (int n = 0; n < N; ++n) {
    if (n + 1 < N) t.uplink[n] = scn.uplink_rate(plan.positions[n]);
    for (int k = 0; k < K; ++k) t.m(k, n) = scn.slot_user_rate(plan.positions[n], k);
  }
  for (int n = 1; n < N; ++n) t.cum_uplink[n] = t.cum_uplink[n - 1] + t.uplink[n - 1];
  return t;
}

// Multipliers of the dual: lambda[n-2] for the prefix-causality constraint
// ending at slot n (1-based n = 2..N), eta[k] for user k's rate floor.
struct DualState {
  Eigen::VectorXd lambda;
  Eigen::VectorXd eta;
  int step_index = 0;   // t in the diminishing schedule delta_0 / sqrt(t)
  double step0 = 0.0;
  double step_size = 0.0;  // last applied step
};

inline DualState make_dual(const Scenario& scn, const RateTable& table) {
  DualState d;
  d.lambda.setZero(scn.num_slots - 1);
  d.eta.setZero(scn.num_ceus());
  double max_rate = 0.0;
  for (int n = 1; n < scn.num_slots; ++n) max_rate = std::max(max_rate, table.m.col(n).maxCoeff());
  d.step0 = max_rate > 0.0 ? 1.0 / max_rate : 1.0;
  return d;
}

// Suffix sums Lam[j] = sum over prefixes ending at or after slot j of lambda,
// i.e. the total multiplier weight that slot j's transmission appears under.
inline Eigen::VectorXd lambda_suffix(const DualState& dual, int num_slots) {
  Eigen::VectorXd suf = Eigen::VectorXd::Zero(num_slots);
  for (int j = num_slots - 1; j >= 1; --j)
    suf[j] = dual.lambda[j - 1] + (j + 1 < num_slots ? suf[j + 1] : 0.0);
  return suf;
}

// Lagrangian coefficient of serving user k in slot j.
inline double lagrangian_coeff(const Scenario& scn, const RateTable& table,
                               const Eigen::VectorXd& suffix, const DualState& dual, int k,
                               int j) {
  return table.m(k, j) * ((scn.weights[k] + dual.eta[k]) / scn.num_slots - suffix[j]);
}

// Closed-form maximizer of the Lagrangian: per slot, serve the user with the
// largest positive coefficient (ties to the lowest index), else stay idle.
inline AssociationMatrix inner_maximize(const Scenario& scn, const RateTable& table,
                                        const DualState& dual) {
  const int N = scn.num_slots, K = scn.num_ceus();
  AssociationMatrix assoc;
  assoc.num_users = K;
  assoc.served.assign(N, -1);
  const Eigen::VectorXd suffix = lambda_suffix(dual, N);
  for (int j = 1; j < N; ++j) {
    int best = -1;
    double best_val = 0.0;
    for (int k = 0; k < K; ++k) {
      const double a = lagrangian_coeff(scn, table, suffix, dual, k, j);
      if (a > best_val) {
        best_val = a;
        best = k;
      }
    }
    assoc.served[j] = best;
  }
  return assoc;
}

// Dual function value at the current multipliers.
inline double dual_objective(const Scenario& scn, const RateTable& table,
                             const DualState& dual) {
  const int N = scn.num_slots, K = scn.num_ceus();
  const Eigen::VectorXd suffix = lambda_suffix(dual, N);
  double g = 0.0;
  for (int j = 1; j < N; ++j) {
    double best = 0.0;
    for (int k = 0; k < K; ++k)
      best = std::max(best, lagrangian_coeff(scn, table, suffix, dual, k, j));
    g += best;
  }
  for (int j = 1; j < N; ++j) g += dual.lambda[j - 1] * table.cum_uplink[j];
  for (int k = 0; k < K; ++k) g -= dual.eta[k] * scn.rate_floor[k];
  return g;
}

// Weighted objective sum_k w_k * (1/N) * sum_n rho_{k,n} m_{k,n}.
inline double weighted_value(const Scenario& scn, const RateTable& table,
                             const AssociationMatrix& assoc) {
  double v = 0.0;
  for (int j = 1; j < scn.num_slots; ++j)
    if (assoc.served[j] >= 0)
      v += scn.weights[assoc.served[j]] * table.m(assoc.served[j], j);
  return v / scn.num_slots;
}

// Exact feasibility of an integer association: every causality prefix holds
// and every rate floor is met (small absolute tolerance for roundoff).
inline bool exact_feasible(const Scenario& scn, const RateTable& table,
                           const AssociationMatrix& assoc, std::string* why = nullptr) {
  const int N = scn.num_slots, K = scn.num_ceus();
  double sent = 0.0;
  for (int j = 1; j < N; ++j) {
    if (assoc.served[j] >= 0) sent += table.m(assoc.served[j], j);
    if (sent > table.cum_uplink[j] + 1e-9) {
      if (why) *why = "causality prefix at slot " + std::to_string(j + 1);
      return false;
    }
  }
  std::vector<double> per_user(K, 0.0);
  for (int j = 1; j < N; ++j)
    if (assoc.served[j] >= 0) per_user[assoc.served[j]] += table.m(assoc.served[j], j);
  for (int k = 0; k < K; ++k)
    if (per_user[k] / N < scn.rate_floor[k] - 1e-9) {
      if (why) *why = "rate floor of user " + std::to_string(k + 1);
      return false;
    }
  return true;
}

// Restores causality by idling the earliest slot whose prefix is violated
// (that slot is necessarily a served one), repeatedly.
inline AssociationMatrix repair_causality(const Scenario& scn, const RateTable& table,
                                          AssociationMatrix assoc) {
  const int N = scn.num_slots;
  for (;;) {
    double sent = 0.0;
    int violated = -1;
    for (int j = 1; j < N; ++j) {
      if (assoc.served[j] >= 0) sent += table.m(assoc.served[j], j);
      if (sent > table.cum_uplink[j] + 1e-9) {
        violated = j;
        break;
      }
    }
    if (violated < 0) return assoc;
    assoc.served[violated] = -1;
  }
}

// Greedy floor restoration: while some user is below its floor, hand the
// most-starved user (largest absolute deficit, ties to the lowest index) its
// best remaining slot, taking only idle slots or slots whose occupant stays
// at or above its own floor after the loss.  Ends with a causality repair;
// the result may still be infeasible (callers re-check), but on instances
// where the backhaul is not the bottleneck this constructs a floor-feasible
// association whenever the greedy order admits one.
inline AssociationMatrix floor_repair(const Scenario& scn, const RateTable& table,
                                      AssociationMatrix assoc) {
  const int N = scn.num_slots, K = scn.num_ceus();
  std::vector<double> got(K, 0.0);
  for (int j = 1; j < N; ++j)
    if (assoc.served[j] >= 0) got[assoc.served[j]] += table.m(assoc.served[j], j);
  for (int round = 0; round < K * N; ++round) {
    int starving = -1;
    double worst = 1e-12;
    for (int k = 0; k < K; ++k) {
      const double deficit = scn.rate_floor[k] * N - got[k];
      if (deficit > worst) {
        worst = deficit;
        starving = k;
      }
    }
    if (starving < 0) break;
    int best_j = -1;
    double best_gain = 0.0;
    for (int j = 1; j < N; ++j) {
      const int occ = assoc.served[j];
      if (occ == starving) continue;
      if (occ >= 0 && got[occ] - table.m(occ, j) < scn.rate_floor[occ] * N) continue;
      if (table.m(starving, j) > best_gain) {
        best_gain = table.m(starving, j);
        best_j = j;
      }
    }
    if (best_j < 0) break;  // no legal slot left for the worst deficit
    if (assoc.served[best_j] >= 0) got[assoc.served[best_j]] -= table.m(assoc.served[best_j], best_j);
    assoc.served[best_j] = starving;
    got[starving] += table.m(starving, best_j);
  }
  return repair_causality(scn, table, assoc);
}

// Projected subgradient update of the multipliers (positive part of the
// gradient step) using the inner solution `assoc`.
inline void subgradient_step(const Scenario& scn, const RateTable& table,
                             const AssociationMatrix& assoc, DualState& dual) {
  const int N = scn.num_slots, K = scn.num_ceus();
  dual.step_index += 1;
  const double delta = dual.step0 / std::sqrt(static_cast<double>(dual.step_index));
  dual.step_size = delta;
  double sent = 0.0;
  for (int j = 1; j < N; ++j) {
    if (assoc.served[j] >= 0) sent += table.m(assoc.served[j], j);
    const double slack = table.cum_uplink[j] - sent;
    dual.lambda[j - 1] = std::max(0.0, dual.lambda[j - 1] - delta * slack);
  }
  std::vector<double> per_user(K, 0.0);
  for (int j = 1; j < N; ++j)
    if (assoc.served[j] >= 0) per_user[assoc.served[j]] += table.m(assoc.served[j], j);
  for (int k = 0; k < K; ++k) {
    const double surplus = per_user[k] / N - scn.rate_floor[k];
    dual.eta[k] = std::max(0.0, dual.eta[k] - delta * surplus);
  }
}

struct SolveOptions {
  int max_iterations = 5000;
  double rel_tol = 1e-5;  // on consecutive dual values
  int patience = 20;      // consecutive small changes required to stop
};

struct Solution {
  AssociationMatrix assoc;
  double dual_value = 0.0;    // best (lowest) dual value seen: an upper bound
  double primal_value = 0.0;  // weighted value of the returned association
  bool primal_feasible = false;
  int iterations = 0;
  std::string note;  // diagnostics when no feasible primal was found
};

// Runs the dual loop, tracking the best exactly-feasible integer association
// encountered (raw inner solutions and their causality-repaired variants).
inline Solution solve(const Scenario& scn, const TrajectoryPlan& plan,
                      const SolveOptions& opts = {}) {
  const RateTable table = rate_table(scn, plan);
  DualState dual = make_dual(scn, table);
  Solution sol;
  sol.assoc = AssociationMatrix::all_idle(scn);
  sol.primal_value = -1.0;  // any feasible candidate (even all-idle) beats this
  std::string last_reason;

  auto consider = [&](const AssociationMatrix& cand) {
    std::string why;
    if (!exact_feasible(scn, table, cand, &why)) {
      last_reason = why;
      return;
    }
    const double v = weighted_value(scn, table, cand);
    if (v > sol.primal_value) {
      sol.primal_value = v;
      sol.assoc = cand;
      sol.primal_feasible = true;
    }
  };
  // Constructive fallback independent of the dual dynamics, so active floors
  // are covered even when no inner iterate happens to satisfy them.
  bool floors_active = false;
  for (double f : scn.rate_floor) floors_active |= f > 0.0;
  if (floors_active) consider(floor_repair(scn, table, AssociationMatrix::all_idle(scn)));

  double prev_g = 0.0;
  int calm = 0;
  bool have_dual = false;
  for (int t = 1; t <= opts.max_iterations; ++t) {
    sol.iterations = t;
    const AssociationMatrix assoc = inner_maximize(scn, table, dual);
    const double g = dual_objective(scn, table, dual);
    sol.dual_value = have_dual ? std::min(sol.dual_value, g) : g;

    consider(assoc);
    consider(repair_causality(scn, table, assoc));
    if (floors_active) consider(floor_repair(scn, table, assoc));

    if (have_dual && std::abs(g - prev_g) <= opts.rel_tol * std::max(1.0, std::abs(g))) {
      if (++calm >= opts.patience) break;
    } else {
      calm = 0;
    }
    prev_g = g;
    have_dual = true;
    subgradient_step(scn, table, assoc, dual);
  }

  if (!sol.primal_feasible) {
    sol.primal_value = 0.0;
    sol.note = "no exactly feasible association found; last failure: " + last_reason;
  }
  return sol;
}

}  // namespace relayplan::association
