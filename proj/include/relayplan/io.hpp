// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include "relayplan/scenario.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayplan::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Scenario files.
//
// A scenario is a single JSON object whose keys mirror the Scenario fields.
// Two keys carry the customary engineering units and are converted on load:
// "ref_gain_db" (dB) and "noise_power_dbm" (dBm).  "fading_sq_norms" may be
// given explicitly, or left out to default every GBS to num_antennas, or
// replaced by "fading_seed" to draw a reproducible random realization.
// "weights" defaults to all ones.  Errors always name the offending field.

namespace detail {

inline const json& require(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) throw std::invalid_argument(std::string(field) + ": missing");
  return *it;
}

inline double as_number(const json& v, const char* field) {
  if (!v.is_number()) throw std::invalid_argument(std::string(field) + ": expected a number");
  return v.get<double>();
}

inline int as_int(const json& v, const char* field) {
  if (!v.is_number_integer())
    throw std::invalid_argument(std::string(field) + ": expected an integer");
  return v.get<int>();
}

inline Vec2 as_point(const json& v, const char* field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw std::invalid_argument(std::string(field) + ": expected a [x, y] pair");
  return {v[0].get<double>(), v[1].get<double>()};
}

inline std::vector<Vec2> as_points(const json& v, const char* field) {
  if (!v.is_array() || v.empty())
    throw std::invalid_argument(std::string(field) + ": expected a nonempty list of points");
  std::vector<Vec2> out;
  for (const json& e : v) out.push_back(as_point(e, field));
  return out;
}

inline std::vector<double> as_numbers(const json& v, const char* field) {
  if (!v.is_array() || v.empty())
    throw std::invalid_argument(std::string(field) + ": expected a nonempty list of numbers");
  std::vector<double> out;
  for (const json& e : v) out.push_back(as_number(e, field));
  return out;
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw std::invalid_argument("scenario: expected a JSON object");
  Scenario scn;
  scn.gbs_positions = as_points(require(j, "gbs_positions"), "gbs_positions");
  scn.ceu_positions = as_points(require(j, "ceu_positions"), "ceu_positions");
  scn.altitude = as_number(require(j, "altitude"), "altitude");
  scn.period = as_number(require(j, "period"), "period");
  scn.num_slots = as_int(require(j, "num_slots"), "num_slots");
  scn.start_point = as_point(require(j, "start_point"), "start_point");
  scn.v_max = as_number(require(j, "v_max"), "v_max");
  scn.a_max = as_number(require(j, "a_max"), "a_max");
  scn.p_gbs = as_number(require(j, "p_gbs"), "p_gbs");
  scn.p_uav = as_number(require(j, "p_uav"), "p_uav");
  scn.ref_gain = db_to_linear(as_number(require(j, "ref_gain_db"), "ref_gain_db"));
  scn.noise_power = dbm_to_watts(as_number(require(j, "noise_power_dbm"), "noise_power_dbm"));
  scn.num_antennas = as_int(require(j, "num_antennas"), "num_antennas");

  const bool has_fading = j.contains("fading_sq_norms");
  const bool has_seed = j.contains("fading_seed");
  if (has_fading && has_seed)
    throw std::invalid_argument(
        "fading_sq_norms: give either explicit values or fading_seed, not both");
  if (has_fading) {
    scn.fading_sq_norms = as_numbers(j["fading_sq_norms"], "fading_sq_norms");
  } else if (has_seed) {
    if (!j["fading_seed"].is_number_integer())
      throw std::invalid_argument("fading_seed: expected an integer");
    scn.fading_sq_norms = draw_fading(static_cast<int>(scn.gbs_positions.size()),
                                      scn.num_antennas, j["fading_seed"].get<std::uint64_t>());
  } else {
    scn.fading_sq_norms.assign(scn.gbs_positions.size(),
                               static_cast<double>(scn.num_antennas));
  }

  scn.rate_floor = as_numbers(require(j, "rate_floor"), "rate_floor");
  scn.weights = j.contains("weights") ? as_numbers(j["weights"], "weights")
                                      : std::vector<double>(scn.ceu_positions.size(), 1.0);
  scn.validate();
  return scn;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV artifacts: comma separated, dot decimal, one header row, 12 significant
// digits.  Slots and users are 1-based in every file.

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace detail

inline void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryPlan& plan) {
  std::ofstream out = detail::open_out(path);
  out << "n,x_m,y_m,vx_mps,vy_mps,ax_mps2,ay_mps2,speed_mps,accel_mps2\n";
  for (int n = 0; n < plan.num_slots(); ++n) {
    using detail::fmt;
    out << n + 1 << ',' << fmt(plan.positions[n].x()) << ',' << fmt(plan.positions[n].y()) << ','
        << fmt(plan.velocities[n].x()) << ',' << fmt(plan.velocities[n].y()) << ','
        << fmt(plan.accelerations[n].x()) << ',' << fmt(plan.accelerations[n].y()) << ','
        << fmt(plan.velocities[n].norm()) << ',' << fmt(plan.accelerations[n].norm()) << '\n';
  }
}

// Reads back a trajectory CSV written by write_trajectory_csv (the two
// derived norm columns are ignored).
inline TrajectoryPlan read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  TrajectoryPlan plan;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 7)
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    plan.positions.emplace_back(vals[1], vals[2]);
    plan.velocities.emplace_back(vals[3], vals[4]);
    plan.accelerations.emplace_back(vals[5], vals[6]);
  }
  return plan;
}

inline void write_association_csv(const std::filesystem::path& path,
                                  const AssociationMatrix& assoc) {
  std::ofstream out = detail::open_out(path);
  out << "n,user\n";
  for (int n = 0; n < assoc.num_slots(); ++n) {
    out << n + 1 << ',';
    if (assoc.served[n] < 0)
      out << "Null";
    else
      out << assoc.served[n] + 1;
    out << '\n';
  }
}

inline void write_rate_profile_csv(const std::filesystem::path& path, const Scenario& scn,
                                   const RateProfile& rp) {
  std::ofstream out = detail::open_out(path);
  out << "n,uplink_bps_hz,downlink_bps_hz";
  for (int k = 0; k < scn.num_ceus(); ++k) out << ",user_" << k + 1 << "_bps_hz";
  out << '\n';
  for (int n = 0; n < rp.num_slots(); ++n) {
    out << n + 1 << ',' << detail::fmt(rp.uplink[n]) << ',' << detail::fmt(rp.downlink[n]);
    for (int k = 0; k < scn.num_ceus(); ++k) out << ',' << detail::fmt(rp.slot_user(k, n));
    out << '\n';
  }
}

inline void write_objective_trace_csv(const std::filesystem::path& path,
                                      const std::vector<double>& trace) {
  std::ofstream out = detail::open_out(path);
  out << "iteration,objective_bps_hz\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << i << ',' << detail::fmt(trace[i]) << '\n';
}

inline void write_causality_slack_csv(const std::filesystem::path& path, const RateProfile& rp) {
  std::ofstream out = detail::open_out(path);
  out << "n,slack_bps_hz\n";
  const std::vector<double> slack = causality_slack(rp);
  for (std::size_t i = 0; i < slack.size(); ++i)
    out << i + 2 << ',' << detail::fmt(slack[i]) << '\n';
}

// One row of a benchmark comparison table.
struct ComparisonRow {
  std::string scheme;
  double sum_rate = 0.0;
  std::vector<double> per_user;
  double min_floor_slack = 0.0;
  double min_causality_slack = 0.0;
};

inline void write_comparison_csv(const std::filesystem::path& path, const Scenario& scn,
                                 const std::vector<ComparisonRow>& rows) {
  std::ofstream out = detail::open_out(path);
  out << "scheme,sum_rate_bps_hz";
  for (int k = 0; k < scn.num_ceus(); ++k) out << ",user_" << k + 1 << "_bps_hz";
  out << ",min_floor_slack_bps_hz,min_causality_slack_bps_hz\n";
  for (const ComparisonRow& row : rows) {
    out << row.scheme << ',' << detail::fmt(row.sum_rate);
    for (double r : row.per_user) out << ',' << detail::fmt(r);
    out << ',' << detail::fmt(row.min_floor_slack) << ','
        << detail::fmt(row.min_causality_slack) << '\n';
  }
}

inline void write_sweep_csv(const std::filesystem::path& path, const std::string& param,
                            const std::vector<double>& values,
                            const std::vector<double>& objectives) {
  std::ofstream out = detail::open_out(path);
  out << param << ",objective_bps_hz\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    out << detail::fmt(values[i]) << ',' << detail::fmt(objectives[i]) << '\n';
}

// The standard run-artifact directory: the scenario the run actually used
// (echoed verbatim), the objective trace, and the final trajectory,
// association, rate profile, and causality slack.
inline void write_run_artifacts(const std::filesystem::path& dir, const Scenario& scn,
                                const std::string& scenario_text, const TrajectoryPlan& plan,
                                const AssociationMatrix& assoc,
                                const std::vector<double>& trace) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream echo = detail::open_out(dir / "scenario.json");
    echo << scenario_text;
  }
  write_objective_trace_csv(dir / "objective_trace.csv", trace);
  write_trajectory_csv(dir / "trajectory.csv", plan);
  write_association_csv(dir / "association.csv", assoc);
  const RateProfile rp = rate_profile(scn, plan, assoc);
  write_rate_profile_csv(dir / "rate_profile.csv", scn, rp);
  write_causality_slack_csv(dir / "causality_slack.csv", rp);
}

}  // namespace relayplan::io
