// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayplan {

using Vec2 = Eigen::Vector2d;

// Relative tolerance used by every feasibility audit in the library.
inline constexpr double kFeasTol = 1e-6;

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Immutable description of one planning instance: the ground base stations
// feeding the relay, the cell-edge users it serves, the flight envelope, and
// the radio parameters.  All positions are horizontal coordinates in meters;
// the relay flies at a fixed altitude.  Powers are in watts, the reference
// channel gain and noise power are linear (use dbm_to_watts / db_to_linear
// when loading decibel inputs).  Safe to share across threads once built.
struct Scenario {
  std::vector<Vec2> gbs_positions;
  std::vector<Vec2> ceu_positions;
  double altitude = 100.0;
  double period = 240.0;       // flight period T [s]
  int num_slots = 60;          // N; slot length = period / num_slots
  Vec2 start_point = Vec2::Zero();
  double v_max = 50.0;         // speed limit [m/s]
  double a_max = 5.0;          // acceleration limit [m/s^2]
  double p_gbs = 10.0;         // per-GBS transmit power [W]
  double p_uav = 1.0;          // relay transmit power [W]
  double ref_gain = 1e-6;      // channel power gain at 1 m, linear
  double noise_power = dbm_to_watts(-114.0);  // receiver noise [W]
  int num_antennas = 8;        // antennas per GBS
  std::vector<double> fading_sq_norms;  // squared fading norms, one per GBS
  std::vector<double> rate_floor;       // minimum average rate per user
  std::vector<double> weights;          // objective weight per user

  int num_gbs() const { return static_cast<int>(gbs_positions.size()); }
  int num_ceus() const { return static_cast<int>(ceu_positions.size()); }
  double slot_len() const { return period / num_slots; }

  // Throws std::invalid_argument naming the first field that fails.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw std::invalid_argument(field + ": " + why);
    };
    auto finite2 = [](const Vec2& p) { return std::isfinite(p.x()) && std::isfinite(p.y()); };
    if (gbs_positions.empty()) fail("gbs_positions", "must contain at least one entry");
    for (const Vec2& p : gbs_positions)
      if (!finite2(p)) fail("gbs_positions", "entries must be finite");
    if (ceu_positions.empty()) fail("ceu_positions", "must contain at least one entry");
    for (const Vec2& p : ceu_positions)
      if (!finite2(p)) fail("ceu_positions", "entries must be finite");
    if (!(altitude > 0.0)) fail("altitude", "must be positive");
    if (!(period > 0.0)) fail("period", "must be positive");
    if (num_slots < 2) fail("num_slots", "must be at least 2");
    if (!finite2(start_point)) fail("start_point", "must be finite");
    if (!(v_max > 0.0)) fail("v_max", "must be positive");
    if (!(a_max > 0.0)) fail("a_max", "must be positive");
    if (!(p_gbs > 0.0)) fail("p_gbs", "must be positive");
    if (!(p_uav > 0.0)) fail("p_uav", "must be positive");
    if (!(ref_gain > 0.0)) fail("ref_gain", "must be positive");
    if (!(noise_power > 0.0)) fail("noise_power", "must be positive");
    if (num_antennas < 1) fail("num_antennas", "must be at least 1");
    if (fading_sq_norms.size() != gbs_positions.size())
      fail("fading_sq_norms", "must have one entry per GBS");
    for (double g : fading_sq_norms)
      if (!(g >= 0.0) || !std::isfinite(g)) fail("fading_sq_norms", "entries must be nonnegative");
    if (rate_floor.size() != ceu_positions.size())
      fail("rate_floor", "must have one entry per CEU");
    for (double r : rate_floor)
      if (!(r >= 0.0) || !std::isfinite(r)) fail("rate_floor", "entries must be nonnegative");
    if (weights.size() != ceu_positions.size())
      fail("weights", "must have one entry per CEU");
    for (double w : weights)
      if (!(w >= 0.0) || !std::isfinite(w)) fail("weights", "entries must be nonnegative");
  }

  // Free-space channel power gain between GBS m and the relay hovering over
  // `pos`: ref_gain / (altitude^2 + |pos - b_m|^2).
  double link_gain_gbs(const Vec2& pos, int m) const {
    return ref_gain / (altitude * altitude + (pos - gbs_positions[m]).squaredNorm());
  }

  // Same link model between the relay over `pos` and user k.
  double link_gain_ceu(const Vec2& pos, int k) const {
    return ref_gain / (altitude * altitude + (pos - ceu_positions[k]).squaredNorm());
  }

  // Rate of the GBS-to-relay link with maximum-ratio transmission from every
  // GBS: log2(1 + sum_m p_gbs * gain_m * |g_m|^2 / noise).
  double uplink_rate(const Vec2& pos) const {
    double snr = 0.0;
    for (int m = 0; m < num_gbs(); ++m)
      snr += p_gbs * link_gain_gbs(pos, m) * fading_sq_norms[m] / noise_power;
    return std::log2(1.0 + snr);
  }

  // Rate of the relay-to-user link for user k when the relay is over `pos`.
  double slot_user_rate(const Vec2& pos, int k) const {
    return std::log2(1.0 + p_uav * link_gain_ceu(pos, k) / noise_power);
  }
};

// Draws squared fading norms for `num_gbs` stations with `antennas` antennas
// each: per station the sum over antennas of (a^2 + b^2)/2 with a, b standard
// normal, i.e. a unit-mean-per-antenna chi-square profile.  Deterministic for
// a fixed seed.
inline std::vector<double> draw_fading(int num_gbs, int antennas, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(num_gbs, 0.0);
  for (int m = 0; m < num_gbs; ++m)
    for (int l = 0; l < antennas; ++l) {
      const double a = normal(rng), b = normal(rng);
      out[m] += 0.5 * (a * a + b * b);
    }
  return out;
}

// Discrete flight plan over num_slots slots.  Invariants (audited, not
// enforced by construction): start and end at the scenario start point,
// velocity/position updates consistent with the accelerations, per-slot
// displacement at most v_max * slot_len, |v| <= v_max, |a| <= a_max, and the
// final acceleration fixed to zero.
struct TrajectoryPlan {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  std::vector<Vec2> accelerations;

  int num_slots() const { return static_cast<int>(positions.size()); }

  static TrajectoryPlan hover(const Scenario& scn) {
    TrajectoryPlan plan;
    plan.positions.assign(scn.num_slots, scn.start_point);
    plan.velocities.assign(scn.num_slots, Vec2::Zero());
    plan.accelerations.assign(scn.num_slots, Vec2::Zero());
    return plan;
  }
};

// Per-slot user association.  At most one user per slot and the first slot is
// always idle (the relay has nothing decoded yet), so the K x N binary matrix
// is stored as one served-user index per slot (-1 = idle).
struct AssociationMatrix {
  int num_users = 0;
  std::vector<int> served;  // size num_slots; entry -1 or a 0-based user index

  int num_slots() const { return static_cast<int>(served.size()); }
  bool rho(int k, int n) const { return served[n] == k; }

  static AssociationMatrix all_idle(const Scenario& scn) {
    AssociationMatrix a;
    a.num_users = scn.num_ceus();
    a.served.assign(scn.num_slots, -1);
    return a;
  }

  void validate() const {
    if (served.empty()) throw std::invalid_argument("association: empty");
    if (served[0] != -1) throw std::invalid_argument("association: slot 1 must be idle");
    for (int s : served)
      if (s < -1 || s >= num_users)
        throw std::invalid_argument("association: user index out of range");
  }
};

// Exact rates of a (plan, association) pair.  uplink[n] is the GBS-to-relay
// rate (zero in the final slot: anything received there could never be
// forwarded), downlink[n] the relay-to-served-user rate (zero when idle and
// in slot 1), slot_user(k, n) the relay-to-user-k rate regardless of the
// association, and per_user[k] the average rate (1/N) * sum_n rho_{k,n} *
// slot_user(k, n).
struct RateProfile {
  std::vector<double> uplink;
  std::vector<double> downlink;
  std::vector<double> per_user;
  Eigen::MatrixXd slot_user;  // K x N

  int num_slots() const { return static_cast<int>(uplink.size()); }
};

inline RateProfile rate_profile(const Scenario& scn, const TrajectoryPlan& plan,
                                const AssociationMatrix& assoc) {
  const int N = scn.num_slots, K = scn.num_ceus();
  RateProfile rp;
  rp.uplink.assign(N, 0.0);
  rp.downlink.assign(N, 0.0);
  rp.per_user.assign(K, 0.0);
  rp.slot_user.resize(K, N);
  for (int n = 0; n < N; ++n) {
    if (n + 1 < N) rp.uplink[n] = scn.uplink_rate(plan.positions[n]);
    for (int k = 0; k < K; ++k)
      rp.slot_user(k, n) = scn.slot_user_rate(plan.positions[n], k);
    const int k = assoc.served[n];
    if (n > 0 && k >= 0) {
      rp.downlink[n] = rp.slot_user(k, n);
      rp.per_user[k] += rp.slot_user(k, n);
    }
  }
  for (int k = 0; k < K; ++k) rp.per_user[k] /= N;
  return rp;
}

// Causality slack for prefixes n = 2..N (returned at index n - 2): the data
// received by the relay through slot n-1 minus the data it forwarded through
// slot n.  Nonnegative slack everywhere means the relay never transmits bits
// it has not yet decoded.
inline std::vector<double> causality_slack(const RateProfile& rp) {
  const int N = rp.num_slots();
  std::vector<double> slack(N - 1, 0.0);
  double up = 0.0, down = 0.0;
  for (int n = 2; n <= N; ++n) {
    up += rp.uplink[n - 2];
    down += rp.downlink[n - 1];
    slack[n - 2] = up - down;
  }
  return slack;
}

struct Violation {
  std::string constraint;  // family name, e.g. "speed" or "causality"
  int index = 0;           // 1-based slot or user index
  double amount = 0.0;     // normalized excess beyond the tolerance scale
};

struct AuditReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const {
    if (ok()) return "feasible";
    std::ostringstream os;
    os << violations.size() << " violation(s); first: " << violations[0].constraint << "["
       << violations[0].index << "] excess " << violations[0].amount;
    return os.str();
  }
};

// Checks the flight-envelope constraints of a plan to relative tolerance
// `tol`: endpoints, the two kinematic update equations, per-slot
// displacement, speed, and acceleration limits.
inline AuditReport audit_plan(const Scenario& scn, const TrajectoryPlan& plan,
                              double tol = kFeasTol) {
  AuditReport rep;
  const int N = scn.num_slots;
  const double dt = scn.slot_len();
  auto add = [&rep](const char* what, int index, double excess) {
    if (excess > 0.0) rep.violations.push_back({what, index, excess});
  };
  if (plan.num_slots() != N || static_cast<int>(plan.velocities.size()) != N ||
      static_cast<int>(plan.accelerations.size()) != N) {
    rep.violations.push_back({"size", 0, 1.0});
    return rep;
  }
  const double pos_scale = std::max(1.0, scn.start_point.norm());
  add("endpoint", 1, (plan.positions[0] - scn.start_point).norm() / pos_scale - tol);
  add("endpoint", N, (plan.positions[N - 1] - scn.start_point).norm() / pos_scale - tol);
  const double vel_scale = std::max(1.0, scn.v_max);
  const double step_scale = std::max(1.0, scn.v_max * dt);
  for (int n = 0; n + 1 < N; ++n) {
    const Vec2 dv = plan.velocities[n + 1] - plan.velocities[n] - dt * plan.accelerations[n];
    add("velocity_update", n + 1, dv.norm() / vel_scale - tol);
    const Vec2 du = plan.positions[n + 1] - plan.positions[n] - dt * plan.velocities[n] -
                    0.5 * dt * dt * plan.accelerations[n];
    add("position_update", n + 1, du.norm() / step_scale - tol);
    add("step", n + 1,
        (plan.positions[n + 1] - plan.positions[n]).norm() / (scn.v_max * dt) - 1.0 - tol);
    add("acceleration", n + 1, plan.accelerations[n].norm() / scn.a_max - 1.0 - tol);
  }
  for (int n = 0; n < N; ++n)
    add("speed", n + 1, plan.velocities[n].norm() / scn.v_max - 1.0 - tol);
  add("final_acceleration", N, plan.accelerations[N - 1].norm() / std::max(1.0, scn.a_max) - tol);
  return rep;
}

inline AuditReport audit_association(const Scenario& scn, const AssociationMatrix& assoc) {
  AuditReport rep;
  if (assoc.num_slots() != scn.num_slots || assoc.num_users != scn.num_ceus()) {
    rep.violations.push_back({"size", 0, 1.0});
    return rep;
  }
  if (!assoc.served.empty() && assoc.served[0] != -1)
    rep.violations.push_back({"first_slot_idle", 1, 1.0});
  for (int n = 0; n < assoc.num_slots(); ++n)
    if (assoc.served[n] < -1 || assoc.served[n] >= assoc.num_users)
      rep.violations.push_back({"user_index", n + 1, 1.0});
  return rep;
}

// Full audit of a candidate solution: plan feasibility, association shape,
// causality, and the per-user rate floors.
inline AuditReport audit_joint(const Scenario& scn, const TrajectoryPlan& plan,
                               const AssociationMatrix& assoc, double tol = kFeasTol) {
  AuditReport rep = audit_plan(scn, plan, tol);
  AuditReport arep = audit_association(scn, assoc);
  rep.violations.insert(rep.violations.end(), arep.violations.begin(), arep.violations.end());
  if (!arep.ok()) return rep;
  const RateProfile rp = rate_profile(scn, plan, assoc);
  const std::vector<double> slack = causality_slack(rp);
  double up = 0.0;
  for (std::size_t j = 0; j < slack.size(); ++j) {
    up += rp.uplink[j];
    if (slack[j] < -tol * std::max(1.0, up))
      rep.violations.push_back({"causality", static_cast<int>(j) + 2,
                                -slack[j] / std::max(1.0, up) - tol});
  }
  for (int k = 0; k < scn.num_ceus(); ++k) {
    const double floor = scn.rate_floor[k];
    if (rp.per_user[k] < floor - tol * std::max(1.0, floor))
      rep.violations.push_back({"rate_floor", k + 1,
                                (floor - rp.per_user[k]) / std::max(1.0, floor) - tol});
  }
  return rep;
}

}  // namespace relayplan
