// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include "relayplan/scenario.hpp"
#include "relayplan/surrogate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayplan::mobility {

// For a fixed association the trajectory subproblem maximizes the surrogate
// weighted sum of average user rates over (u, v, a) subject to the flight
// envelope, the surrogate rate floors, and the surrogate causality prefixes.
// With the concave lower bounds in the objective and floors, and the
// convex-per-axis upper bound inside causality, the subproblem is convex; we
// solve it with an equality-constrained log-barrier Newton method.
//
// The floor and causality constraints may be violated at the expansion point
// even when their exact counterparts hold (the bounds are one-sided), so each
// gets a nonnegative slack with an exact-penalty weight P: a solution whose
// slack stays positive is reported as surrogate-infeasible rather than
// failing the solve.  Internally the slacks are stored scaled by P (sigma =
// P * s), which keeps the penalty gradient at unit scale and the barrier
// curvature near 1/mu instead of P^2/mu.
//
// Variable layout: x = [u(2N) | v(2N) | a(2(N-1)) | sigma_floor | sigma_caus]
// with the final-slot acceleration fixed to zero (not a variable).  The
// equalities are the two endpoint pins and the velocity/position update
// recursions; the inequalities enter the barrier as squared norm balls plus
// the slacked surrogate constraints and slack nonnegativity.

struct SolveOptions {
  double mu0 = 10.0;            // initial barrier weight
  double mu_shrink = 0.1;       // per-stage multiplier
  double barrier_target = 1e-6; // stop once num_ineq * mu falls below this
  int max_newton = 60;          // Newton iterations per stage
  double armijo = 0.01;         // sufficient-decrease parameter
  double backtrack = 0.5;       // step-halving factor
  double penalty_scale = 1e3;   // P = penalty_scale * max slot rate
  bool record_trace = false;    // keep per-Newton-step rows
};

struct TraceRow {
  int stage = 0;
  double mu = 0.0;
  int newton = 0;
  double barrier_objective = 0.0;
  double step_len = 0.0;
  double kkt_residual = 0.0;
};

struct MobilitySolution {
  TrajectoryPlan plan;
  double objective = 0.0;  // surrogate weighted average-rate value
  bool surrogate_feasible = true;
  std::string infeasible_family;       // "rate_floor" or "causality" when not
  std::vector<double> floor_slack;     // per served user, floor-constraint slack
  std::vector<double> causality_slack; // per prefix, causality-constraint slack
  double max_slack = 0.0;
  double kkt_residual = 0.0;        // max of the three components below
  double kkt_stationarity = 0.0;
  double kkt_equality = 0.0;
  double kkt_complementarity = 0.0;
  int barrier_stages = 0;
  int newton_steps = 0;
  std::vector<TraceRow> trace;
};

namespace detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Static description of one solve: dimensions, offsets, equality system, and
// the per-slot served-user table.
struct Problem {
  const Scenario* scn = nullptr;
  const surrogate::SurrogateModel* model = nullptr;
  int N = 0;
  std::vector<int> served;       // per slot, -1 or user index
  std::vector<int> floor_users;  // users with at least one served slot
  double penalty = 0.0;          // P
  int off_u = 0, off_v = 0, off_a = 0, off_sf = 0, off_sc = 0;
  int num_vars = 0, num_eq = 0, num_ineq = 0;
  MatrixXd A;
  VectorXd b;

  int ux(int n) const { return off_u + 2 * n; }
  int vx(int n) const { return off_v + 2 * n; }
  int ax(int n) const { return off_a + 2 * n; }
  int sf(int i) const { return off_sf + i; }
  int sc(int j) const { return off_sc + (j - 1); }  // prefixes j = 1..N-1

  Vec2 u_at(const VectorXd& x, int n) const { return {x[ux(n)], x[ux(n) + 1]}; }
  Vec2 v_at(const VectorXd& x, int n) const { return {x[vx(n)], x[vx(n) + 1]}; }
};

inline Problem make_problem(const Scenario& scn, const surrogate::SurrogateModel& model,
                            const AssociationMatrix& assoc, double penalty) {
  Problem p;
  p.scn = &scn;
  p.model = &model;
  p.N = scn.num_slots;
  p.served = assoc.served;
  p.penalty = penalty;
  std::vector<bool> seen(scn.num_ceus(), false);
  for (int n = 1; n < p.N; ++n)
    if (p.served[n] >= 0) seen[p.served[n]] = true;
  for (int k = 0; k < scn.num_ceus(); ++k)
    if (seen[k]) p.floor_users.push_back(k);
  const int N = p.N, Kf = static_cast<int>(p.floor_users.size());
  p.off_u = 0;
  p.off_v = 2 * N;
  p.off_a = 4 * N;
  p.off_sf = 6 * N - 2;
  p.off_sc = p.off_sf + Kf;
  p.num_vars = p.off_sc + (N - 1);
  p.num_eq = 4 * N;
  // step, speed, accel, floors, causality, slack nonnegativity
  p.num_ineq = (N - 1) + N + (N - 1) + Kf + (N - 1) + (Kf + N - 1);

  const double dt = scn.slot_len();
  p.A = MatrixXd::Zero(p.num_eq, p.num_vars);
  p.b = VectorXd::Zero(p.num_eq);
  int r = 0;
  for (int d = 0; d < 2; ++d, ++r) {  // u[0] = start
    p.A(r, p.ux(0) + d) = 1.0;
    p.b[r] = scn.start_point[d];
  }
  for (int d = 0; d < 2; ++d, ++r) {  // u[N-1] = start
    p.A(r, p.ux(N - 1) + d) = 1.0;
    p.b[r] = scn.start_point[d];
  }
  for (int n = 0; n + 1 < N; ++n)
    for (int d = 0; d < 2; ++d, ++r) {  // v[n+1] = v[n] + dt a[n]
      p.A(r, p.vx(n + 1) + d) = 1.0;
      p.A(r, p.vx(n) + d) = -1.0;
      p.A(r, p.ax(n) + d) = -dt;
    }
  for (int n = 0; n + 1 < N; ++n)
    for (int d = 0; d < 2; ++d, ++r) {  // u[n+1] = u[n] + dt v[n] + dt^2/2 a[n]
      p.A(r, p.ux(n + 1) + d) = 1.0;
      p.A(r, p.ux(n) + d) = -1.0;
      p.A(r, p.vx(n) + d) = -dt;
      p.A(r, p.ax(n) + d) = -0.5 * dt * dt;
    }
  return p;
}

// Per-slot surrogate pieces at the current positions, shared by the
// constraint bodies below.
struct SlotTerms {
  // Downlink upper bound of the served user (zero rows when idle):
  std::vector<double> up_val;
  std::vector<Vec2> up_grad, up_hess;  // per-axis first/second derivatives
  // Uplink lower bound:
  std::vector<double> low_val;
  std::vector<Vec2> low_grad;
  std::vector<double> low_curv;  // sum of 2 * a_r over GBSs: Hessian of -low_val is curv * I
};

inline SlotTerms slot_terms(const Problem& p, const VectorXd& x) {
  const Scenario& scn = *p.scn;
  const surrogate::SurrogateModel& model = *p.model;
  const int N = p.N;
  const double q = scn.p_uav * scn.ref_gain / scn.noise_power;
  const double h2 = scn.altitude * scn.altitude;
  SlotTerms t;
  t.up_val.assign(N, 0.0);
  t.up_grad.assign(N, Vec2::Zero());
  t.up_hess.assign(N, Vec2::Zero());
  t.low_val.assign(N, 0.0);
  t.low_grad.assign(N, Vec2::Zero());
  t.low_curv.assign(N, 0.0);
  for (int n = 0; n < N; ++n) {
    const Vec2 u = p.u_at(x, n);
    if (n >= 1 && p.served[n] >= 0) {
      const Vec2 d = u - scn.ceu_positions[p.served[n]];
      const surrogate::AxisTerm tx = surrogate::upper_axis_term(q, d.x());
      const surrogate::AxisTerm ty = surrogate::upper_axis_term(q, d.y());
      t.up_val[n] = std::log2(1.0 + q / (3.0 * h2)) / 3.0 + tx.value + ty.value;
      t.up_grad[n] = Vec2(tx.d1, ty.d1);
      t.up_hess[n] = Vec2(tx.d2, ty.d2);
    }
    if (n + 1 < N) {
      double val = 0.0, curv = 0.0;
      Vec2 grad = Vec2::Zero();
      for (int m = 0; m < scn.num_gbs(); ++m) {
        const Vec2 dm = u - scn.gbs_positions[m];
        val += -model.a_r(n, m) * (dm.squaredNorm() - model.exp_sq_gbs(n, m)) + model.b_r(n, m);
        grad += -2.0 * model.a_r(n, m) * dm;
        curv += 2.0 * model.a_r(n, m);
      }
      t.low_val[n] = val;
      t.low_grad[n] = grad;
      t.low_curv[n] = curv;
    }
  }
  return t;
}

// Constraint bodies without their slacks: floor i and causality prefix j.
inline double floor_body(const Problem& p, const VectorXd& x, int i) {
  const Scenario& scn = *p.scn;
  const int k = p.floor_users[i];
  double avg = 0.0;
  for (int n = 1; n < p.N; ++n)
    if (p.served[n] == k)
      avg += surrogate::user_rate_lower(*p.model, scn, p.u_at(x, n), k, n);
  return scn.rate_floor[k] - avg / p.N;
}

inline double causality_body(const SlotTerms& t, int j) {
  double body = 0.0;
  for (int i = 1; i <= j; ++i) body += t.up_val[i];
  for (int i = 0; i < j; ++i) body -= t.low_val[i];
  return body;
}

// All constraint values g_i(x) <= 0, in a fixed order (step, speed, accel,
// floor, causality, slack nonnegativity).
inline VectorXd constraint_values(const Problem& p, const VectorXd& x) {
  const Scenario& scn = *p.scn;
  const int N = p.N, Kf = static_cast<int>(p.floor_users.size());
  const double dt = scn.slot_len();
  const double step2 = scn.v_max * dt * scn.v_max * dt;
  const double v2 = scn.v_max * scn.v_max, a2 = scn.a_max * scn.a_max;
  VectorXd g(p.num_ineq);
  int r = 0;
  for (int n = 0; n + 1 < N; ++n)
    g[r++] = (p.u_at(x, n + 1) - p.u_at(x, n)).squaredNorm() - step2;
  for (int n = 0; n < N; ++n) g[r++] = p.v_at(x, n).squaredNorm() - v2;
  for (int n = 0; n + 1 < N; ++n) g[r++] = Vec2(x[p.ax(n)], x[p.ax(n) + 1]).squaredNorm() - a2;
  const SlotTerms t = slot_terms(p, x);
  for (int i = 0; i < Kf; ++i) g[r++] = floor_body(p, x, i) - x[p.sf(i)] / p.penalty;
  for (int j = 1; j < N; ++j) g[r++] = causality_body(t, j) - x[p.sc(j)] / p.penalty;
  for (int i = 0; i < Kf; ++i) g[r++] = -x[p.sf(i)];
  for (int j = 1; j < N; ++j) g[r++] = -x[p.sc(j)];
  return g;
}

// Objective gradient and the full constraint Jacobian at x, used to certify
// first-order optimality of the returned point.
struct KktData {
  VectorXd grad_f;  // gradient of the smooth objective -F/N + sum(sigma)
  VectorXd g;       // constraint values, same order as constraint_values
  MatrixXd jac;     // num_ineq x num_vars constraint Jacobian
};

inline KktData kkt_data(const Problem& p, const VectorXd& x) {
  const Scenario& scn = *p.scn;
  const int N = p.N, Kf = static_cast<int>(p.floor_users.size());
  KktData kd;
  kd.grad_f = VectorXd::Zero(p.num_vars);
  kd.g = constraint_values(p, x);
  kd.jac = MatrixXd::Zero(p.num_ineq, p.num_vars);
  for (int n = 1; n < N; ++n) {
    const int k = p.served[n];
    if (k < 0) continue;
    const Vec2 du = p.u_at(x, n) - scn.ceu_positions[k];
    kd.grad_f.segment<2>(p.ux(n)) += (2.0 * scn.weights[k] * p.model->c_k(n, k) / p.N) * du;
  }
  for (int i = p.off_sf; i < p.num_vars; ++i) kd.grad_f[i] = 1.0;

  const SlotTerms t = slot_terms(p, x);
  int r = 0;
  for (int n = 0; n + 1 < N; ++n, ++r) {  // step balls
    const Vec2 diff = p.u_at(x, n + 1) - p.u_at(x, n);
    kd.jac.block<1, 2>(r, p.ux(n + 1)) = 2.0 * diff.transpose();
    kd.jac.block<1, 2>(r, p.ux(n)) = -2.0 * diff.transpose();
  }
  for (int n = 0; n < N; ++n, ++r)  // speed balls
    kd.jac.block<1, 2>(r, p.vx(n)) = 2.0 * p.v_at(x, n).transpose();
  for (int n = 0; n + 1 < N; ++n, ++r)  // acceleration balls
    kd.jac.block<1, 2>(r, p.ax(n)) = 2.0 * Vec2(x[p.ax(n)], x[p.ax(n) + 1]).transpose();
  for (int i = 0; i < Kf; ++i, ++r) {  // floors
    const int k = p.floor_users[i];
    for (int n = 1; n < N; ++n) {
      if (p.served[n] != k) continue;
      const Vec2 du = p.u_at(x, n) - scn.ceu_positions[k];
      kd.jac.block<1, 2>(r, p.ux(n)) = (2.0 * p.model->c_k(n, k) / p.N) * du.transpose();
    }
    kd.jac(r, p.sf(i)) = -1.0 / p.penalty;
  }
  for (int j = 1; j < N; ++j, ++r) {  // causality prefixes
    for (int i = 0; i <= j; ++i) {
      Vec2 e = Vec2::Zero();
      if (i >= 1 && p.served[i] >= 0) e += t.up_grad[i];
      if (i < j) e -= t.low_grad[i];
      kd.jac.block<1, 2>(r, p.ux(i)) = e.transpose();
    }
    kd.jac(r, p.sc(j)) = -1.0 / p.penalty;
  }
  for (int i = 0; i < Kf; ++i, ++r) kd.jac(r, p.sf(i)) = -1.0;  // slack nonnegativity
  for (int j = 1; j < N; ++j, ++r) kd.jac(r, p.sc(j)) = -1.0;
  return kd;
}

// Given the positions, each scaled slack sigma decouples: minimizing
// sigma + mu * (-log(sigma/P - B) - log(sigma)) over sigma > max(P*B, 0)
// is a scalar quadratic with root sigma* = (PB + 2mu + sqrt((PB)^2 + 4mu^2))/2.
// Setting every slack to its exact minimizer zeroes the slack block of the
// barrier gradient without moving the trajectory.
inline void polish_slacks(const Problem& p, VectorXd& x, double mu) {
  const SlotTerms t = slot_terms(p, x);
  auto best = [&](double body) {
    const double pb = p.penalty * body;
    return 0.5 * (pb + 2.0 * mu + std::sqrt(pb * pb + 4.0 * mu * mu));
  };
  for (int i = 0; i < static_cast<int>(p.floor_users.size()); ++i)
    x[p.sf(i)] = best(floor_body(p, x, i));
  for (int j = 1; j < p.N; ++j) x[p.sc(j)] = best(causality_body(t, j));
}

// Smooth objective: negative surrogate weighted value plus the (scaled)
// penalty term, f = -F(u) + sum(sigma).
inline double smooth_objective(const Problem& p, const VectorXd& x) {
  const Scenario& scn = *p.scn;
  double F = 0.0;
  for (int n = 1; n < p.N; ++n) {
    const int k = p.served[n];
    if (k >= 0)
      F += scn.weights[k] * surrogate::user_rate_lower(*p.model, scn, p.u_at(x, n), k, n);
  }
  double sig = 0.0;
  for (int i = p.off_sf; i < p.num_vars; ++i) sig += x[i];
  return -F / p.N + sig;
}

// Barrier value phi = f + mu * sum(-log(-g)); +inf outside the interior.
inline double barrier_value(const Problem& p, const VectorXd& x, double mu, bool* interior) {
  const VectorXd g = constraint_values(p, x);
  if ((g.array() >= 0.0).any()) {
    if (interior) *interior = false;
    return std::numeric_limits<double>::infinity();
  }
  if (interior) *interior = true;
  return smooth_objective(p, x) + mu * (-(-g.array()).log().sum());
}

// Full assembly of the barrier gradient and Hessian at an interior point.
struct Derivatives {
  double phi = 0.0;
  VectorXd grad;
  MatrixXd hess;
};

inline Derivatives derivatives(const Problem& p, const VectorXd& x, double mu) {
  const Scenario& scn = *p.scn;
  const int N = p.N, Kf = static_cast<int>(p.floor_users.size());
  const double dt = scn.slot_len();
  const int n_var = p.num_vars;
  Derivatives d;
  d.grad = VectorXd::Zero(n_var);
  d.hess = MatrixXd::Zero(n_var, n_var);
  double phi = 0.0;

  // Smooth objective: -F/N + sum(sigma).
  for (int n = 1; n < N; ++n) {
    const int k = p.served[n];
    if (k < 0) continue;
    const Vec2 du = p.u_at(x, n) - scn.ceu_positions[k];
    const double c = p.model->c_k(n, k) * scn.weights[k];
    d.grad.segment<2>(p.ux(n)) += (2.0 * c / p.N) * du;
    d.hess(p.ux(n), p.ux(n)) += 2.0 * c / p.N;
    d.hess(p.ux(n) + 1, p.ux(n) + 1) += 2.0 * c / p.N;
  }
  for (int i = p.off_sf; i < n_var; ++i) d.grad[i] += 1.0;
  phi = smooth_objective(p, x);

  const SlotTerms t = slot_terms(p, x);
  // Scratch for one constraint's sparse gradient.
  std::vector<int> idx;
  std::vector<double> val;
  auto add_constraint = [&](double g) {
    // Accumulate barrier contributions of constraint g with gradient
    // (idx, val); second-derivative (curvature) terms are added by callers.
    const double inv = 1.0 / (-g);
    phi += mu * (-std::log(-g));
    for (std::size_t a = 0; a < idx.size(); ++a) {
      d.grad[idx[a]] += mu * inv * val[a];
      for (std::size_t bq = 0; bq < idx.size(); ++bq)
        d.hess(idx[a], idx[bq]) += mu * inv * inv * val[a] * val[bq];
    }
  };

  const double step2 = scn.v_max * dt * scn.v_max * dt;
  const double v2 = scn.v_max * scn.v_max, a2 = scn.a_max * scn.a_max;
  for (int n = 0; n + 1 < N; ++n) {  // step balls
    const Vec2 diff = p.u_at(x, n + 1) - p.u_at(x, n);
    const double g = diff.squaredNorm() - step2;
    idx = {p.ux(n + 1), p.ux(n + 1) + 1, p.ux(n), p.ux(n) + 1};
    val = {2.0 * diff.x(), 2.0 * diff.y(), -2.0 * diff.x(), -2.0 * diff.y()};
    add_constraint(g);
    const double w = mu / (-g) * 2.0;
    for (int dd = 0; dd < 2; ++dd) {
      d.hess(p.ux(n + 1) + dd, p.ux(n + 1) + dd) += w;
      d.hess(p.ux(n) + dd, p.ux(n) + dd) += w;
      d.hess(p.ux(n + 1) + dd, p.ux(n) + dd) -= w;
      d.hess(p.ux(n) + dd, p.ux(n + 1) + dd) -= w;
    }
  }
  for (int n = 0; n < N; ++n) {  // speed balls
    const Vec2 v = p.v_at(x, n);
    const double g = v.squaredNorm() - v2;
    idx = {p.vx(n), p.vx(n) + 1};
    val = {2.0 * v.x(), 2.0 * v.y()};
    add_constraint(g);
    const double w = mu / (-g) * 2.0;
    d.hess(p.vx(n), p.vx(n)) += w;
    d.hess(p.vx(n) + 1, p.vx(n) + 1) += w;
  }
  for (int n = 0; n + 1 < N; ++n) {  // acceleration balls
    const Vec2 a = Vec2(x[p.ax(n)], x[p.ax(n) + 1]);
    const double g = a.squaredNorm() - a2;
    idx = {p.ax(n), p.ax(n) + 1};
    val = {2.0 * a.x(), 2.0 * a.y()};
    add_constraint(g);
    const double w = mu / (-g) * 2.0;
    d.hess(p.ax(n), p.ax(n)) += w;
    d.hess(p.ax(n) + 1, p.ax(n) + 1) += w;
  }
  for (int i = 0; i < Kf; ++i) {  // floors (with slack)
    const int k = p.floor_users[i];
    const double g = floor_body(p, x, i) - x[p.sf(i)] / p.penalty;
    idx.clear();
    val.clear();
    for (int n = 1; n < N; ++n) {
      if (p.served[n] != k) continue;
      const Vec2 du = p.u_at(x, n) - scn.ceu_positions[k];
      const double c = p.model->c_k(n, k);
      idx.push_back(p.ux(n));
      val.push_back(2.0 * c / p.N * du.x());
      idx.push_back(p.ux(n) + 1);
      val.push_back(2.0 * c / p.N * du.y());
    }
    idx.push_back(p.sf(i));
    val.push_back(-1.0 / p.penalty);
    add_constraint(g);
    const double w = mu / (-g);
    for (int n = 1; n < N; ++n) {
      if (p.served[n] != k) continue;
      const double c = p.model->c_k(n, k);
      d.hess(p.ux(n), p.ux(n)) += w * 2.0 * c / p.N;
      d.hess(p.ux(n) + 1, p.ux(n) + 1) += w * 2.0 * c / p.N;
    }
  }
  for (int j = 1; j < N; ++j) {  // causality prefixes (with slack)
    const double g = causality_body(t, j) - x[p.sc(j)] / p.penalty;
    idx.clear();
    val.clear();
    for (int i = 0; i <= j; ++i) {
      const bool has_up = i >= 1 && p.served[i] >= 0;
      const bool has_low = i < j;
      if (!has_up && !has_low) continue;
      Vec2 e = Vec2::Zero();
      if (has_up) e += t.up_grad[i];
      if (has_low) e -= t.low_grad[i];
      idx.push_back(p.ux(i));
      val.push_back(e.x());
      idx.push_back(p.ux(i) + 1);
      val.push_back(e.y());
    }
    idx.push_back(p.sc(j));
    val.push_back(-1.0 / p.penalty);
    add_constraint(g);
    const double w = mu / (-g);
    for (int i = 0; i <= j; ++i) {
      Vec2 curv = Vec2::Zero();
      if (i >= 1 && p.served[i] >= 0) curv += t.up_hess[i];
      if (i < j) curv += Vec2(t.low_curv[i], t.low_curv[i]);
      d.hess(p.ux(i), p.ux(i)) += w * curv.x();
      d.hess(p.ux(i) + 1, p.ux(i) + 1) += w * curv.y();
    }
  }
  for (int i = 0; i < Kf; ++i) {  // slack nonnegativity
    idx = {p.sf(i)};
    val = {-1.0};
    add_constraint(-x[p.sf(i)]);
  }
  for (int j = 1; j < N; ++j) {
    idx = {p.sc(j)};
    val = {-1.0};
    add_constraint(-x[p.sc(j)]);
  }
  d.phi = phi;
  return d;
}

}  // namespace detail

// Surrogate objective value and analytic gradient over the stacked free
// variables [u(2N) | v(2N) | a(2(N-1))] (the value depends on positions only,
// so the velocity and acceleration sections of the gradient are zero).
inline std::pair<double, Eigen::VectorXd> surrogate_objective_and_gradient(
    const Scenario& scn, const surrogate::SurrogateModel& model, const AssociationMatrix& assoc,
    const TrajectoryPlan& plan) {
  const int N = scn.num_slots;
  double value = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(6 * N - 2);
  for (int n = 1; n < N; ++n) {
    const int k = assoc.served[n];
    if (k < 0) continue;
    const double w = scn.weights[k];
    value += w * surrogate::user_rate_lower(model, scn, plan.positions[n], k, n);
    const Vec2 du = plan.positions[n] - scn.ceu_positions[k];
    grad.segment<2>(2 * n) = -(2.0 * w * model.c_k(n, k) / N) * du;
  }
  return {value / N, grad};
}

// Projects an arbitrary plan onto the kinematic equalities and endpoint pins
// by a least-squares pass over (v[1], accelerations), then scales that motion
// into the speed/acceleration/step balls (all scale linearly with it).  The
// zero-motion hover is always a fixed point of the constraint set, so the
// projection cannot fail.
inline TrajectoryPlan feasibility_restore(const Scenario& scn, const TrajectoryPlan& plan) {
  const int N = scn.num_slots;
  const double dt = scn.slot_len();
  if (static_cast<int>(plan.positions.size()) != N ||
      static_cast<int>(plan.velocities.size()) != N ||
      static_cast<int>(plan.accelerations.size()) != N)
    throw std::invalid_argument("feasibility_restore: plan has wrong slot count");

  // Closure constraint per axis: (N-1) dt v0 + dt^2 sum (N-1.5-i) a_i = 0.
  Eigen::VectorXd coef(1 + (N - 1));
  coef[0] = (N - 1) * dt;
  for (int i = 0; i + 1 < N; ++i) coef[1 + i] = dt * dt * (N - 1.5 - i);
  const double cc = coef.squaredNorm();

  Eigen::MatrixXd z(1 + (N - 1), 2);  // rows: v0 then a_0..a_{N-2}; cols x,y
  for (int d = 0; d < 2; ++d) {
    z(0, d) = plan.velocities[0][d];
    for (int i = 0; i + 1 < N; ++i) z(1 + i, d) = plan.accelerations[i][d];
  }
  for (int d = 0; d < 2; ++d) {
    const double resid = coef.dot(z.col(d));
    z.col(d) -= coef * (resid / cc);
  }

  auto integrate = [&](double scale) {
    TrajectoryPlan out;
    out.positions.assign(N, scn.start_point);
    out.velocities.assign(N, Vec2::Zero());
    out.accelerations.assign(N, Vec2::Zero());
    out.velocities[0] = scale * Vec2(z(0, 0), z(0, 1));
    for (int i = 0; i + 1 < N; ++i) out.accelerations[i] = scale * Vec2(z(1 + i, 0), z(1 + i, 1));
    for (int n = 0; n + 1 < N; ++n) {
      out.velocities[n + 1] = out.velocities[n] + dt * out.accelerations[n];
      out.positions[n + 1] =
          out.positions[n] + dt * out.velocities[n] + 0.5 * dt * dt * out.accelerations[n];
    }
    return out;
  };

  TrajectoryPlan full = integrate(1.0);
  double worst = 1.0;
  for (int n = 0; n < N; ++n)
    worst = std::max(worst, full.velocities[n].norm() / scn.v_max);
  for (int n = 0; n + 1 < N; ++n) {
    worst = std::max(worst, full.accelerations[n].norm() / scn.a_max);
    worst = std::max(worst,
                     (full.positions[n + 1] - full.positions[n]).norm() / (scn.v_max * dt));
  }
  return worst > 1.0 ? integrate(1.0 / worst) : full;
}

// Solves the convexified trajectory subproblem from a kinematically feasible
// warm start.  See the header comment for the formulation.
inline MobilitySolution solve(const Scenario& scn, const surrogate::SurrogateModel& model,
                              const AssociationMatrix& assoc, const TrajectoryPlan& warm,
                              const SolveOptions& opts = {}) {
  using detail::Problem;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int N = scn.num_slots;
  if (static_cast<int>(model.expansion.size()) != N)
    throw std::invalid_argument("mobility::solve: surrogate built for a different slot count");
  if (assoc.num_slots() != N) throw std::invalid_argument("mobility::solve: association size");
  for (const Vec2& u : warm.positions)
    if (!u.allFinite()) throw std::invalid_argument("mobility::solve: non-finite warm start");

  // Exact-penalty weight from the largest warm-start slot rate.
  double max_rate = 1.0;
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < scn.num_ceus(); ++k)
      max_rate = std::max(max_rate, scn.slot_user_rate(warm.positions[n], k));
  const Problem p = detail::make_problem(scn, model, assoc, opts.penalty_scale * max_rate);
  const int Kf = static_cast<int>(p.floor_users.size());

  // Pack the motion variables; blend toward hover until the envelope
  // constraints are strictly interior (the warm start may touch its bounds).
  auto pack = [&](const TrajectoryPlan& plan, double gamma) {
    VectorXd x = VectorXd::Zero(p.num_vars);
    for (int n = 0; n < N; ++n) {
      const Vec2 u = (1.0 - gamma) * plan.positions[n] + gamma * scn.start_point;
      const Vec2 v = (1.0 - gamma) * plan.velocities[n];
      x.segment<2>(p.ux(n)) = u;
      x.segment<2>(p.vx(n)) = v;
      if (n + 1 < N) x.segment<2>(p.ax(n)) = (1.0 - gamma) * plan.accelerations[n];
    }
    return x;
  };
  const double dt = scn.slot_len();
  VectorXd x;
  {
    const double gammas[] = {0.0, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0};
    bool ok = false;
    for (double gamma : gammas) {
      x = pack(warm, gamma);
      bool strict = true;
      for (int n = 0; n + 1 < N && strict; ++n)
        strict &= (p.u_at(x, n + 1) - p.u_at(x, n)).squaredNorm() <
                  (scn.v_max * dt) * (scn.v_max * dt) * (1.0 - 1e-9);
      for (int n = 0; n < N && strict; ++n)
        strict &= p.v_at(x, n).squaredNorm() < scn.v_max * scn.v_max * (1.0 - 1e-9);
      for (int n = 0; n + 1 < N && strict; ++n)
        strict &= Vec2(x[p.ax(n)], x[p.ax(n) + 1]).squaredNorm() <
                  scn.a_max * scn.a_max * (1.0 - 1e-9);
      if (strict) {
        ok = true;
        break;
      }
    }
    if (!ok) x = pack(warm, 1.0);  // hover: strictly interior for any scenario
  }

  // Slack initialization: strictly cover each constraint body.
  {
    const detail::SlotTerms t = detail::slot_terms(p, x);
    for (int i = 0; i < Kf; ++i) {
      const double body = detail::floor_body(p, x, i);
      x[p.sf(i)] = p.penalty * (std::max(0.0, body) + 1e-6 * std::max(1.0, std::abs(body)));
    }
    for (int j = 1; j < N; ++j) {
      const double body = detail::causality_body(t, j);
      x[p.sc(j)] = p.penalty * (std::max(0.0, body) + 1e-6 * std::max(1.0, std::abs(body)));
    }
  }

  MobilitySolution sol;
  double mu = opts.mu0;
  VectorXd nu = VectorXd::Zero(p.num_eq);
  int stage = 0;
  while (true) {
    ++stage;
    int calm = 0;  // consecutive iterations with a negligible Newton decrement
    for (int it = 0; it < opts.max_newton; ++it) {
      detail::Derivatives der = detail::derivatives(p, x, mu);
      const VectorXd r_pri = p.A * x - p.b;

      // KKT step via the Schur complement on the equalities, with Jacobi
      // scaling (barrier curvatures span ~16 orders of magnitude) and one
      // round of iterative refinement; fall back to a factorization of the
      // full saddle system if the Hessian resists.
      VectorXd dx;
      const VectorXd dscale = der.hess.diagonal().cwiseMax(1e-300).cwiseSqrt();
      const MatrixXd hs =
          dscale.cwiseInverse().asDiagonal() * der.hess * dscale.cwiseInverse().asDiagonal();
      Eigen::LLT<MatrixXd> llt(hs);
      if (llt.info() == Eigen::Success) {
        const MatrixXd a_sc = p.A * dscale.cwiseInverse().asDiagonal();
        const MatrixXd s = a_sc * llt.solve(a_sc.transpose());
        const Eigen::LDLT<MatrixXd> s_ldlt(s);
        auto solve_kkt = [&](const VectorXd& grad_like, const VectorXd& rpri_like, VectorXd& odx,
                             VectorXd& onu) {
          const VectorXd gs = dscale.cwiseInverse().asDiagonal() * grad_like;
          onu = s_ldlt.solve(rpri_like - a_sc * llt.solve(gs));
          odx = dscale.cwiseInverse().asDiagonal() *
                (-llt.solve(gs + a_sc.transpose() * onu));
        };
        solve_kkt(der.grad, r_pri, dx, nu);
        VectorXd ddx, dnu;
        solve_kkt(der.grad + der.hess * dx + p.A.transpose() * nu, p.A * dx + r_pri, ddx, dnu);
        dx += ddx;
        nu += dnu;
      } else {
        MatrixXd kkt = MatrixXd::Zero(p.num_vars + p.num_eq, p.num_vars + p.num_eq);
        kkt.topLeftCorner(p.num_vars, p.num_vars) = der.hess;
        kkt.topRightCorner(p.num_vars, p.num_eq) = p.A.transpose();
        kkt.bottomLeftCorner(p.num_eq, p.num_vars) = p.A;
        VectorXd rhs(p.num_vars + p.num_eq);
        rhs.head(p.num_vars) = -der.grad;
        rhs.tail(p.num_eq) = -r_pri;
        const Eigen::PartialPivLU<MatrixXd> lu(kkt);
        VectorXd sol_full = lu.solve(rhs);
        VectorXd resid = rhs - kkt * sol_full;
        sol_full += lu.solve(resid);
        dx = sol_full.head(p.num_vars);
        nu = sol_full.tail(p.num_eq);
      }

      const double kkt_res =
          std::max((der.grad + p.A.transpose() * nu).lpNorm<Eigen::Infinity>(),
                   r_pri.lpNorm<Eigen::Infinity>());
      const double decrement2 = std::max(0.0, -der.grad.dot(dx) + r_pri.dot(nu));

      double step = 1.0;
      double accepted = 0.0;
      const double slope = der.grad.dot(dx);
      for (int half = 0; half < 60; ++half) {
        bool interior = false;
        const VectorXd xn = x + step * dx;
        const double phin = detail::barrier_value(p, xn, mu, &interior);
        if (interior && phin <= der.phi + opts.armijo * step * slope + 1e-12 * std::abs(der.phi)) {
          x = xn;
          accepted = step;
          break;
        }
        step *= opts.backtrack;
      }
      ++sol.newton_steps;
      if (opts.record_trace)
        sol.trace.push_back({stage, mu, it + 1, der.phi, accepted, kkt_res});
      if (accepted == 0.0) break;  // stalled: let the next stage re-center
      // The decrement alone under-reports error in stiff barrier directions,
      // so also ask for a small measured residual; the stall counter stops
      // runaway stages when roundoff caps how far the residual can drop.
      const bool calm_step = decrement2 * 0.5 <= 1e-12 * std::max(1.0, std::abs(der.phi));
      calm = calm_step ? calm + 1 : 0;
      if (calm_step &&
          r_pri.lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(1.0, p.b.lpNorm<Eigen::Infinity>()) &&
          (kkt_res <= 1e-7 || calm >= 3))
        break;
    }
    detail::polish_slacks(p, x, mu);
    if (p.num_ineq * mu < opts.barrier_target) break;
    mu *= opts.mu_shrink;
  }
  sol.barrier_stages = stage;

  // First-order certificate at the returned point: fit multipliers (lambda,
  // nu) by least squares around the barrier estimates lambda_i = mu / (-g_i),
  // clip lambda at zero, and report the worst of stationarity, equality
  // residual, and complementarity.  Each lambda_i's anchor row is weighted by
  // its constraint slack, so a deviation delta_i costs (slack_i * delta_i)^2
  // -- exactly the complementarity drift it would introduce.  That keeps the
  // fit from parking weight on inactive constraints while leaving the
  // genuinely active multipliers free.  The raw barrier gradient is not a
  // usable yardstick here: near-active constraints scale it by 1/mu, so at
  // the final stage it cannot be driven small in double precision.
  {
    const detail::KktData kd = detail::kkt_data(p, x);
    const int m = p.num_ineq, q = p.num_eq, n_var = p.num_vars;
    const VectorXd lam_bar = mu * (-kd.g).cwiseInverse();
    const VectorXd anchor_w = (-kd.g).cwiseMax(1e-10);
    MatrixXd M = MatrixXd::Zero(n_var + m, m + q);
    M.topLeftCorner(n_var, m) = kd.jac.transpose();
    M.topRightCorner(n_var, q) = p.A.transpose();
    M.bottomLeftCorner(m, m) = MatrixXd(anchor_w.asDiagonal());
    VectorXd rhs(n_var + m);
    rhs.head(n_var) = -kd.grad_f;
    rhs.tail(m) = anchor_w.cwiseProduct(lam_bar);
    const VectorXd y = M.householderQr().solve(rhs);
    const VectorXd lam = y.head(m).cwiseMax(0.0);
    nu = y.tail(q);
    const VectorXd r_stat = kd.grad_f + kd.jac.transpose() * lam + p.A.transpose() * nu;
    const VectorXd r_pri = p.A * x - p.b;
    sol.kkt_stationarity = r_stat.lpNorm<Eigen::Infinity>();
    sol.kkt_equality = r_pri.lpNorm<Eigen::Infinity>();
    sol.kkt_complementarity = (lam.array() * (-kd.g.array())).maxCoeff();
    sol.kkt_residual = std::max({sol.kkt_stationarity, sol.kkt_equality,
                                 sol.kkt_complementarity});
  }

  sol.plan.positions.resize(N);
  sol.plan.velocities.resize(N);
  sol.plan.accelerations.assign(N, Vec2::Zero());
  for (int n = 0; n < N; ++n) {
    sol.plan.positions[n] = p.u_at(x, n);
    sol.plan.velocities[n] = p.v_at(x, n);
    if (n + 1 < N) sol.plan.accelerations[n] = Vec2(x[p.ax(n)], x[p.ax(n) + 1]);
  }
  // Linear-solve noise can leave the kinematic equalities satisfied only to
  // solver precision (visible when the penalty fights unreachable floors);
  // one projection pass restores them exactly and is a near-no-op otherwise.
  sol.plan = feasibility_restore(scn, sol.plan);
  sol.objective = surrogate_objective_and_gradient(scn, model, assoc, sol.plan).first;

  sol.floor_slack.resize(Kf);
  for (int i = 0; i < Kf; ++i) sol.floor_slack[i] = x[p.sf(i)] / p.penalty;
  sol.causality_slack.resize(N - 1);
  for (int j = 1; j < N; ++j) sol.causality_slack[j - 1] = x[p.sc(j)] / p.penalty;
  sol.max_slack = 0.0;
  for (double s : sol.floor_slack) sol.max_slack = std::max(sol.max_slack, s);
  for (double s : sol.causality_slack) sol.max_slack = std::max(sol.max_slack, s);
  for (double s : sol.floor_slack)
    if (s > kFeasTol) {
      sol.surrogate_feasible = false;
      sol.infeasible_family = "rate_floor";
      break;
    }
  if (sol.surrogate_feasible)
    for (double s : sol.causality_slack)
      if (s > kFeasTol) {
        sol.surrogate_feasible = false;
        sol.infeasible_family = "causality";
        break;
      }
  return sol;
}

}  // namespace relayplan::mobility
