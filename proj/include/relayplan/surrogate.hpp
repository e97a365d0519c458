// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include "relayplan/csv.hpp"
#include "relayplan/scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <string>

namespace relayplan::surrogate {

// The exact per-slot rates are neither concave nor convex in the relay
// position, so each outer iteration replaces them by bounds that are:
//
//  * uplink_lower: a Jensen step pulls the MRT sum inside the log, then a
//    first-order Taylor expansion in the squared distances t_m = |u - b_m|^2
//    around the expansion trajectory gives a concave (linear in t_m) lower
//    bound with coefficients a_r >= 0 and b_r.
//  * user_rate_lower: the same Taylor device on the relay-to-user rate gives
//    -c_k * (t_k - t_k^l) + d_k, tangent to the exact rate at the expansion.
//  * user_rate_upper: splitting the squared link distance H^2 + dx^2 + dy^2
//    into its three addends and applying Jensen to the convex map
//    t -> log2(1 + q/(3t)) yields a bound that is convex in x and in y
//    separately, away from the singular axes x = x_k, y = y_k.
//
// The bounds are frozen for one outer iteration: build once per expansion.
struct SurrogateModel {
  std::vector<Vec2> expansion;     // expansion positions, one per slot
  Eigen::MatrixXd a_r, b_r;        // N x num_gbs Taylor coefficients
  Eigen::MatrixXd c_k, d_k;        // N x num_ceus Taylor coefficients
  Eigen::MatrixXd exp_sq_gbs;      // |u^l[n] - b_m|^2 cached at expansion
  Eigen::MatrixXd exp_sq_ceu;      // |u^l[n] - e_k|^2 cached at expansion
};

// Squared horizontal offsets below this are clamped inside the per-axis terms
// of user_rate_upper; the bound is singular on the axes themselves.
inline constexpr double kAxisClampSq = 1e-6;  // (1 mm)^2

inline SurrogateModel build(const Scenario& scn, const TrajectoryPlan& plan) {
  const int N = scn.num_slots, M = scn.num_gbs(), K = scn.num_ceus();
  const double h2 = scn.altitude * scn.altitude;
  SurrogateModel model;
  model.expansion = plan.positions;
  model.a_r.resize(N, M);
  model.b_r.resize(N, M);
  model.c_k.resize(N, K);
  model.d_k.resize(N, K);
  model.exp_sq_gbs.resize(N, M);
  model.exp_sq_ceu.resize(N, K);
  for (int n = 0; n < N; ++n) {
    const Vec2& u = plan.positions[n];
    for (int m = 0; m < M; ++m) {
      const double t = (u - scn.gbs_positions[m]).squaredNorm();
      const double d = h2 + t;
      const double c1 = M * scn.p_gbs * scn.ref_gain * scn.fading_sq_norms[m] / scn.noise_power;
      model.exp_sq_gbs(n, m) = t;
      model.a_r(n, m) = (scn.p_gbs * scn.ref_gain * scn.fading_sq_norms[m] * M_LOG2E /
                         (scn.noise_power * d * d)) /
                        (1.0 + c1 / d);
      model.b_r(n, m) = std::log2(1.0 + c1 / d) / M;
    }
    for (int k = 0; k < K; ++k) {
      const double t = (u - scn.ceu_positions[k]).squaredNorm();
      const double d = h2 + t;
      const double s = scn.p_uav * scn.ref_gain / (scn.noise_power * d);
      model.exp_sq_ceu(n, k) = t;
      model.c_k(n, k) = (scn.p_uav * scn.ref_gain * M_LOG2E / (scn.noise_power * d * d)) /
                        (1.0 + s);
      // Evaluated through the exact-rate path so the lower bound is tangent
      // to it at the expansion point to the last bit.
      model.d_k(n, k) = scn.slot_user_rate(u, k);
    }
  }
  return model;
}

// Concave lower bound on the GBS-to-relay rate in slot n.
inline double uplink_lower(const SurrogateModel& model, const Scenario& scn, const Vec2& pos,
                           int n) {
  double total = 0.0;
  for (int m = 0; m < scn.num_gbs(); ++m) {
    const double t = (pos - scn.gbs_positions[m]).squaredNorm();
    total += -model.a_r(n, m) * (t - model.exp_sq_gbs(n, m)) + model.b_r(n, m);
  }
  return total;
}

// Concave lower bound on the relay-to-user-k rate in slot n.
inline double user_rate_lower(const SurrogateModel& model, const Scenario& scn, const Vec2& pos,
                              int k, int n) {
  const double t = (pos - scn.ceu_positions[k]).squaredNorm();
  return -model.c_k(n, k) * (t - model.exp_sq_ceu(n, k)) + model.d_k(n, k);
}

// Value, first, and second derivative of one per-axis term of the upper
// bound, (1/3) * log2(1 + q / (3 * max(z^2, clamp))), as a function of the
// signed offset z.  Inside the clamp window the term is constant.
struct AxisTerm {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline AxisTerm upper_axis_term(double q, double z) {
  AxisTerm out;
  const double z2 = z * z;
  if (z2 < kAxisClampSq) {
    out.value = std::log2(1.0 + q / (3.0 * kAxisClampSq)) / 3.0;
    return out;
  }
  out.value = std::log2(1.0 + q / (3.0 * z2)) / 3.0;
  const double den = 3.0 * z2 * z + q * z;
  out.d1 = -(2.0 * q * M_LOG2E / 3.0) / den;
  out.d2 = (2.0 * q * M_LOG2E / 3.0) * (9.0 * z2 + q) / (den * den);
  return out;
}

// Convex-per-axis upper bound on the relay-to-user-k rate.
inline double user_rate_upper(const Scenario& scn, const Vec2& pos, int k) {
  const double q = scn.p_uav * scn.ref_gain / scn.noise_power;
  const double h2 = scn.altitude * scn.altitude;
  const Vec2 d = pos - scn.ceu_positions[k];
  return std::log2(1.0 + q / (3.0 * h2)) / 3.0 + upper_axis_term(q, d.x()).value +
         upper_axis_term(q, d.y()).value;
}

// Upper bound on what the relay transmits in slot n under `assoc`.
inline double downlink_upper(const Scenario& scn, const AssociationMatrix& assoc, const Vec2& pos,
                             int n) {
  const int k = assoc.served[n];
  return (n > 0 && k >= 0) ? user_rate_upper(scn, pos, k) : 0.0;
}

// Debug export: one CSV per coefficient table, one row per slot, one column
// per GBS (a, b) or per CEU (c, d).
inline void write_coefficient_csv(const SurrogateModel& model, const std::string& dir) {
  auto dump = [&dir](const Eigen::MatrixXd& mat, const std::string& name,
                     const std::string& col) {
    std::ofstream os(dir + "/" + name);
    if (!os) throw std::runtime_error("cannot write " + dir + "/" + name);
    std::vector<std::string> header{"slot"};
    for (int j = 0; j < mat.cols(); ++j) header.push_back(col + std::to_string(j + 1));
    csv::write_row(os, header);
    for (int n = 0; n < mat.rows(); ++n) {
      std::vector<std::string> row{std::to_string(n + 1)};
      for (int j = 0; j < mat.cols(); ++j) row.push_back(csv::fmt(mat(n, j)));
      csv::write_row(os, row);
    }
  };
  dump(model.a_r, "coeff_a.csv", "gbs");
  dump(model.b_r, "coeff_b.csv", "gbs");
  dump(model.c_k, "coeff_c.csv", "ceu");
  dump(model.d_k, "coeff_d.csv", "ceu");
}

}  // namespace relayplan::surrogate
