#pragma once

// Per-tick vehicle positions: synthetic constant-velocity ring traffic or
// replayed traces ("time,vehicle_id,position" lines).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eldes/core.hpp"
#include "eldes/rng.hpp"

namespace eldes {

enum class Placement { UniformRandom, EquallySpaced, Clustered };

inline const char* placement_name(Placement p) {
  switch (p) {
    case Placement::UniformRandom: return "uniform-random";
    case Placement::EquallySpaced: return "equally-spaced";
    case Placement::Clustered: return "clustered";
  }
  return "?";
}

struct SyntheticMobilityConfig {
  int n_vehicles = 160;
  double road_length = 5000.0;
  double v_min = 15.0;
  double v_max = 30.0;
  Placement placement = Placement::UniformRandom;
  int cluster_count = 4;       // clustered placement only
  double cluster_span = 250.0; // meters covered by one cluster
};

// Initial fleet at t = 0. Positions follow the placement policy, velocities
// are uniform in [v_min, v_max]; both deterministic given the streams.
inline std::vector<VehicleState> init_synthetic(const SyntheticMobilityConfig& cfg,
                                                Rng& placement_rng, Rng& velocity_rng) {
  if (cfg.n_vehicles < 1) {
    throw std::invalid_argument("n_vehicles must be >= 1");
  }
  if (cfg.road_length <= 0.0) {
    throw std::invalid_argument("road_length must be > 0");
  }
  if (cfg.v_min < 0.0 || cfg.v_min > cfg.v_max) {
    throw std::invalid_argument("need 0 <= v_min <= v_max");
  }
  if (cfg.placement == Placement::Clustered &&
      (cfg.cluster_count < 1 || cfg.cluster_span <= 0.0)) {
    throw std::invalid_argument("clustered placement needs cluster_count >= 1 and cluster_span > 0");
  }

  std::vector<VehicleState> fleet(static_cast<std::size_t>(cfg.n_vehicles));
  const auto n = static_cast<std::size_t>(cfg.n_vehicles);
  for (std::size_t i = 0; i < n; ++i) {
    double pos = 0.0;
    switch (cfg.placement) {
      case Placement::UniformRandom:
        pos = placement_rng.uniform(0.0, cfg.road_length);
        break;
      case Placement::EquallySpaced:
        pos = cfg.road_length * static_cast<double>(i) / static_cast<double>(n);
        break;
      case Placement::Clustered: {
        // cluster centers equally spaced; vehicles assigned round-robin
        const auto c = i % static_cast<std::size_t>(cfg.cluster_count);
        const double center =
            cfg.road_length * static_cast<double>(c) / static_cast<double>(cfg.cluster_count);
        pos = wrap_pos(center + placement_rng.uniform(-cfg.cluster_span / 2.0,
                                                      cfg.cluster_span / 2.0),
                       cfg.road_length);
        break;
      }
    }
    fleet[i].id = static_cast<VehicleId>(i);
    fleet[i].pos = wrap_pos(pos, cfg.road_length);
    fleet[i].t = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    fleet[i].velocity = velocity_rng.uniform(cfg.v_min, cfg.v_max);
  }
  return fleet;
}

// Constant-velocity step: x' = (x + v dt) mod road_length.
inline void step_fleet(std::vector<VehicleState>& fleet, double dt, double road_length) {
  if (dt <= 0.0) {
    throw std::invalid_argument("dt must be > 0");
  }
  for (auto& v : fleet) {
    v.pos = wrap_pos(v.pos + v.velocity * dt, road_length);
    v.t += dt;
  }
}

// Replayed mobility. Vehicles are renumbered 0..n-1 by first appearance in
// the file; source_ids keeps the original identifiers.
struct TraceSchedule {
  struct Sample {
    double t;
    RoadPos pos;
  };
  std::vector<std::vector<Sample>> samples;  // indexed by dense VehicleId
  std::vector<long long> source_ids;

  std::size_t vehicle_count() const { return samples.size(); }
};

inline TraceSchedule load_trace(std::istream& in) {
  TraceSchedule sched;
  std::map<long long, VehicleId> dense;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      continue;
    }
    const auto last = line.find_last_not_of(" \t\r");
    const std::string body = line.substr(first, last - first + 1);

    std::istringstream fields(body);
    std::string t_s, id_s, pos_s, extra;
    if (!std::getline(fields, t_s, ',') || !std::getline(fields, id_s, ',') ||
        !std::getline(fields, pos_s, ',')) {
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": expected time,vehicle_id,position");
    }
    if (std::getline(fields, extra, ',')) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": too many fields");
    }
    double t = 0.0, pos = 0.0;
    long long src = 0;
    try {
      std::size_t used = 0;
      t = std::stod(t_s, &used);
      if (used != t_s.find_last_not_of(" \t") + 1) throw std::invalid_argument("");
      src = std::stoll(id_s);
      pos = std::stod(pos_s);
    } catch (const std::exception&) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": malformed field");
    }
    auto it = dense.find(src);
    if (it == dense.end()) {
      it = dense.emplace(src, static_cast<VehicleId>(sched.samples.size())).first;
      sched.samples.emplace_back();
      sched.source_ids.push_back(src);
    }
    auto& vec = sched.samples[it->second];
    if (!vec.empty() && t <= vec.back().t) {
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": time not strictly increasing for vehicle " +
                               std::to_string(src));
    }
    vec.push_back({t, pos});
  }
  return sched;
}

inline TraceSchedule load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trace file: " + path);
  }
  return load_trace(in);
}

struct TracePoint {
  RoadPos pos;
  double velocity;
};

// Linear interpolation between the bracketing samples; exact at sample times.
inline TracePoint trace_state_at(const TraceSchedule& sched, VehicleId id, double t) {
  if (id >= sched.samples.size()) {
    throw std::out_of_range("trace: unknown vehicle id " + std::to_string(id));
  }
  const auto& vec = sched.samples[id];
  if (vec.empty() || t < vec.front().t || t > vec.back().t) {
    throw std::out_of_range("trace: t=" + std::to_string(t) + " outside sample span of vehicle " +
                            std::to_string(id));
  }
  if (vec.size() == 1) {
    return {vec.front().pos, 0.0};
  }
  auto hi = std::lower_bound(vec.begin(), vec.end(), t,
                             [](const TraceSchedule::Sample& s, double v) { return s.t < v; });
  if (hi == vec.begin()) {
    ++hi;
  }
  const auto lo = hi - 1;
  if (hi == vec.end()) {
    hi = lo;  // t == last sample time
    return {hi->pos, (hi->pos - (hi - 1)->pos) / (hi->t - (hi - 1)->t)};
  }
  const double slope = (hi->pos - lo->pos) / (hi->t - lo->t);
  return {lo->pos + slope * (t - lo->t), slope};
}

inline RoadPos trace_position_at(const TraceSchedule& sched, VehicleId id, double t) {
  return trace_state_at(sched, id, t).pos;
}

}  // namespace eldes
