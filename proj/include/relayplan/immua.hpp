// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include "relayplan/association_solver.hpp"
#include "relayplan/mobility_solver.hpp"
#include "relayplan/scenario.hpp"
#include "relayplan/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace relayplan::immua {

// The outer loop alternates two subproblem solvers: given the current
// association, rebuild the surrogate bounds at the current plan and improve
// the trajectory; given the new trajectory, re-optimize the association.  A
// candidate pair is accepted only if the exact weighted sum rate does not
// decrease -- the surrogate is a lower bound that is not tight away from its
// expansion point, so surrogate progress alone does not imply exact progress.
// When a full step fails that test, one halved trajectory step is tried; if
// that also fails, the previous iterate is kept and the loop stops.

struct Config {
  int max_outer = 30;
  double tol_outer = 1e-4;  // relative change of the exact objective
  bool optimize_association = true;  // false: keep the initial association fixed
  mobility::SolveOptions mobility{};
  association::SolveOptions association{};
};

struct Result {
  TrajectoryPlan plan;
  AssociationMatrix assoc;
  std::vector<double> objective_trace;  // exact objective: initial value, then
                                        // one entry per outer iteration
  bool converged = false;
  int outer_iterations = 0;
  std::string note;  // violation report or stop reason when not converged
};

// Exact weighted sum of average user rates, no surrogates involved.
inline double exact_objective(const Scenario& scn, const TrajectoryPlan& plan,
                              const AssociationMatrix& assoc) {
  const RateProfile rp = rate_profile(scn, plan, assoc);
  double total = 0.0;
  for (int k = 0; k < scn.num_ceus(); ++k) total += scn.weights[k] * rp.per_user[k];
  return total;
}

// Starting iterate: hover at the start point, and in every slot after the
// first serve the user nearest to the start point whenever the running
// causality budget under the hover rates allows it (ties to the lowest
// index).  The result always satisfies the flight envelope and causality;
// rate floors may be unmet and are left to the caller to repair.
inline std::pair<TrajectoryPlan, AssociationMatrix> initialize(const Scenario& scn) {
  TrajectoryPlan plan = TrajectoryPlan::hover(scn);
  AssociationMatrix assoc = AssociationMatrix::all_idle(scn);
  int nearest = 0;
  for (int k = 1; k < scn.num_ceus(); ++k)
    if ((scn.ceu_positions[k] - scn.start_point).norm() <
        (scn.ceu_positions[nearest] - scn.start_point).norm())
      nearest = k;
  const double up = scn.uplink_rate(scn.start_point);
  const double down = scn.slot_user_rate(scn.start_point, nearest);
  double up_cum = 0.0, down_cum = 0.0;
  for (int n = 1; n < scn.num_slots; ++n) {
    up_cum += up;  // uplink of slot n (the relay decodes it before slot n+1)
    if (down_cum + down <= up_cum) {
      assoc.served[n] = nearest;
      down_cum += down;
    }
  }
  return {plan, assoc};
}

namespace detail {

// Convex combination of two plans.  The kinematic update equations are
// affine and every envelope constraint is a norm ball, so the blend of two
// feasible plans is exactly feasible.
inline TrajectoryPlan blend_plans(const TrajectoryPlan& a, const TrajectoryPlan& b, double t) {
  TrajectoryPlan out = a;
  for (std::size_t n = 0; n < a.positions.size(); ++n) {
    out.positions[n] = (1.0 - t) * a.positions[n] + t * b.positions[n];
    out.velocities[n] = (1.0 - t) * a.velocities[n] + t * b.velocities[n];
    out.accelerations[n] = (1.0 - t) * a.accelerations[n] + t * b.accelerations[n];
  }
  return out;
}

// Best association for the given plan among the dual-solver result and the
// incumbent, judged by the exact objective.  Keeping the incumbent in the
// candidate set guarantees the association step never loses exact value.
inline AssociationMatrix best_association(const Scenario& scn, const Config& cfg,
                                          const TrajectoryPlan& plan,
                                          const AssociationMatrix& incumbent) {
  if (!cfg.optimize_association) return incumbent;
  const association::Solution sol = association::solve(scn, plan, cfg.association);
  if (!sol.primal_feasible) return incumbent;
  if (exact_objective(scn, plan, sol.assoc) >= exact_objective(scn, plan, incumbent))
    return sol.assoc;
  return incumbent;
}

}  // namespace detail

// Runs the alternation from a caller-supplied starting pair.  The pair must
// already satisfy the exact constraints; this is checked and violations are
// thrown so that a bad warm start cannot silently produce an audited-bad run.
inline Result run_from(const Scenario& scn, const Config& cfg, TrajectoryPlan plan,
                       AssociationMatrix assoc) {
  {
    const AuditReport rep = audit_joint(scn, plan, assoc);
    if (!rep.ok())
      throw std::invalid_argument("immua: infeasible starting iterate: " + rep.summary());
  }

  Result res;
  res.objective_trace.push_back(exact_objective(scn, plan, assoc));

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const double obj_cur = res.objective_trace.back();

    // (a) Trajectory step: surrogate bounds frozen at the current plan.
    const surrogate::SurrogateModel model = surrogate::build(scn, plan);
    const mobility::MobilitySolution msol =
        mobility::solve(scn, model, assoc, plan, cfg.mobility);
    TrajectoryPlan plan_cand = msol.surrogate_feasible ? msol.plan : plan;

    // (b) Association step at the candidate plan.
    AssociationMatrix assoc_cand = detail::best_association(scn, cfg, plan_cand, assoc);
    double obj_cand = exact_objective(scn, plan_cand, assoc_cand);

    // Monotone acceptance on the exact objective, with one halved trajectory
    // step as the fallback before giving up on further progress.
    const double slack = 1e-12 * std::max(1.0, std::abs(obj_cur));
    if (obj_cand < obj_cur - slack) {
      plan_cand = detail::blend_plans(plan, plan_cand, 0.5);
      assoc_cand = detail::best_association(scn, cfg, plan_cand, assoc);
      obj_cand = exact_objective(scn, plan_cand, assoc_cand);
    }
    if (obj_cand < obj_cur - slack) {
      res.converged = true;
      res.note = "stopped: no monotone step available";
      break;
    }

    plan = std::move(plan_cand);
    assoc = std::move(assoc_cand);
    res.objective_trace.push_back(obj_cand);
    res.outer_iterations = outer;

    if (std::abs(obj_cand - obj_cur) < cfg.tol_outer * std::max(1.0, std::abs(obj_cand))) {
      res.converged = true;
      break;
    }
  }

  res.plan = std::move(plan);
  res.assoc = std::move(assoc);
  const AuditReport rep = audit_joint(scn, res.plan, res.assoc);
  if (!rep.ok()) {
    res.converged = false;
    res.note = rep.summary();
  }
  return res;
}

// Runs the alternation from the default start.  When rate floors make the
// nearest-user initial association infeasible, the association subproblem is
// solved once at the hover plan to obtain a feasible starting iterate; if
// even that fails the scenario is reported infeasible.
inline Result run(const Scenario& scn, const Config& cfg = {}) {
  auto [plan, assoc] = initialize(scn);
  if (!audit_joint(scn, plan, assoc).ok()) {
    const association::Solution boot = association::solve(scn, plan, cfg.association);
    if (!boot.primal_feasible)
      throw std::runtime_error("immua: no feasible association at the hover plan: " + boot.note);
    assoc = boot.assoc;
  }
  return run_from(scn, cfg, std::move(plan), std::move(assoc));
}

}  // namespace relayplan::immua
