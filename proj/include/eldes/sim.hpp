#pragma once

// Deterministic fixed-step run loop wiring mobility, channel, beaconing and
// the estimation protocols together.
//
// Tick layout: advance mobility, then normal beacons in vehicle-id order,
// then protocol extended messages in vehicle-id order, then table expiry.
// Geometry (decode distances, the oracle) is sampled at tick instants;
// beacon content carries the sender state at its sub-tick phase instant.
// When several protocols run in one scenario they share the mobility
// realization and the normal-beacon loss draws, while each protocol's
// extended traffic loads only its own channel lane.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eldes/beaconing.hpp"
#include "eldes/channel.hpp"
#include "eldes/core.hpp"
#include "eldes/estimators.hpp"
#include "eldes/metrics.hpp"
#include "eldes/mobility.hpp"
#include "eldes/rng.hpp"

namespace eldes {

enum class Protocol { Eldes, Dvde, Dfpav };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Eldes: return "eldes";
    case Protocol::Dvde: return "dvde";
    case Protocol::Dfpav: return "dfpav";
  }
  return "?";
}

inline std::optional<Protocol> protocol_from_name(const std::string& s) {
  if (s == "eldes") return Protocol::Eldes;
  if (s == "dvde") return Protocol::Dvde;
  if (s == "dfpav") return Protocol::Dfpav;
  return std::nullopt;
}

inline const char* valid_protocol_names() { return "eldes, dvde, dfpav"; }

struct BeaconConfig {
  double rate = 10.0;      // beacons per second
  double lifetime = 0.3;   // neighbor-table expiry, seconds
  int payload_bytes = 500;
};

struct ProtocolParams {
  double delta_t = 1.0;        // eldes suppression window
  double tau_stale = 1.0;      // max usable record age
  int n_period = 10;           // dvde/dfpav: extended message every n-th beacon
  int k = 5;                   // dvde: odd sender-centered segment count
  double piggy_lifetime = 1.0; // dfpav: max usable piggyback entry age
};

struct Scenario {
  SyntheticMobilityConfig mobility;
  std::string trace_path;  // when set, replays this trace instead
  double seg_len = 100.0;
  bool ring = true;
  ChannelConfig channel;
  BeaconConfig beacon;
  ProtocolParams params;
  std::vector<Protocol> protocols = {Protocol::Eldes, Protocol::Dvde, Protocol::Dfpav};
  double duration = 10.0;
  double dt = 0.1;
  std::uint64_t seed = 1;
  bool sampling = false;  // also sample every 1 s, not just at the end
};

inline std::vector<std::string> scenario_errors(const Scenario& s) {
  std::vector<std::string> errs;
  const auto bad = [&errs](const std::string& m) { errs.push_back(m); };
  if (s.duration <= 0.0) bad("duration must be > 0");
  if (s.dt <= 0.0) bad("dt must be > 0");
  if (s.duration > 0.0 && s.dt > 0.0) {
    const double ticks = s.duration / s.dt;
    if (std::abs(ticks - std::round(ticks)) > 1e-9) bad("duration must be a multiple of dt");
  }
  if (s.seg_len <= 0.0) {
    bad("seg_len must be > 0");
  } else {
    const double ratio = s.mobility.road_length / s.seg_len;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
      bad("road_length must be an integer multiple of seg_len");
    }
  }
  if (s.mobility.n_vehicles < 1) bad("n_vehicles must be >= 1");
  if (s.mobility.road_length <= 0.0) bad("road_length must be > 0");
  if (s.mobility.v_min < 0.0 || s.mobility.v_min > s.mobility.v_max) {
    bad("need 0 <= v_min <= v_max");
  }
  if (s.mobility.placement == Placement::Clustered &&
      (s.mobility.cluster_count < 1 || s.mobility.cluster_span <= 0.0)) {
    bad("clustered placement needs cluster_count >= 1 and cluster_span > 0");
  }
  if (s.trace_path.empty() && s.mobility.v_max * s.dt >= s.seg_len) {
    bad("v_max * dt must be < seg_len (at most one segment-center crossing per tick)");
  }
  if (s.ring && 2.0 * s.channel.r_tx >= s.mobility.road_length) {
    bad("2 * r_tx must be < road_length on a ring");
  }
  if (s.channel.r_tx <= 0.0) bad("r_tx must be > 0");
  if (s.channel.beta < 0.0 || s.channel.beta > 1.0) bad("beta must be in [0, 1]");
  if (s.channel.load_sat <= 0.0) bad("load_sat must be > 0");
  if (s.channel.min_range_fraction <= 0.0 || s.channel.min_range_fraction > 1.0) {
    bad("min_range_fraction must be in (0, 1]");
  }
  if (s.channel.p_loss < 0.0 || s.channel.p_loss >= 1.0) bad("p_loss must be in [0, 1)");
  if (s.channel.load_window <= 0.0) bad("load_window must be > 0");
  if (s.beacon.rate <= 0.0) bad("beacon_rate must be > 0");
  if (s.beacon.lifetime < 0.0) bad("beacon_lifetime must be >= 0");
  if (s.beacon.payload_bytes < 0) bad("beacon_bytes must be >= 0");
  if (s.params.delta_t < 0.0) bad("delta_t must be >= 0");
  if (s.params.tau_stale < 0.0) bad("tau_stale must be >= 0");
  if (s.params.n_period < 1) bad("n_period must be >= 1");
  if (s.params.k < 1 || s.params.k % 2 == 0) bad("k must be odd and >= 1");
  if (s.params.piggy_lifetime < 0.0) bad("piggy_lifetime must be >= 0");
  if (s.protocols.empty()) bad("at least one protocol must be selected");
  for (std::size_t i = 0; i < s.protocols.size(); ++i) {
    for (std::size_t j = i + 1; j < s.protocols.size(); ++j) {
      if (s.protocols[i] == s.protocols[j]) {
        bad(std::string("protocol selected twice: ") + protocol_name(s.protocols[i]));
      }
    }
  }
  return errs;
}

struct SuppressionEvent {
  VehicleId vehicle = 0;
  SegmentId seg = 0;  // origin segment of the extended beacon
  double t = 0.0;
  bool is_send = false;  // false: decode
};

// Zero iff every send is >= delta_t after the same vehicle's previous send
// or decode for the same origin segment.
inline long long count_suppression_violations(const std::vector<SuppressionEvent>& events,
                                              double delta_t) {
  std::map<std::pair<VehicleId, SegmentId>, double> last;
  long long violations = 0;
  for (const auto& e : events) {
    const auto key = std::make_pair(e.vehicle, e.seg);
    const auto it = last.find(key);
    if (e.is_send && it != last.end() && e.t - it->second < delta_t - 1e-12) {
      ++violations;
    }
    if (it == last.end() || e.t >= it->second) {
      last[key] = e.t;
    }
  }
  return violations;
}

struct LaneReport {
  Protocol protocol = Protocol::Eldes;
  std::vector<EstimateSample> samples;  // every sampled instant, final one last
  MetricsSummary summary;               // aggregated over the end-of-run instant
  OverheadCounters overhead;
  std::array<long long, 4> channel_tx_count{};  // indexed by TxKind
  StalenessAudit staleness;
  std::vector<SuppressionEvent> events;  // eldes lanes only
  long long crossings = 0;
  long long triggers = 0;
  double mean_direct_visible = 0.0;  // mean in-range table entries at the end
};

struct RunReport {
  Scenario scenario;
  double mean_rn = 0.0;
  std::vector<LaneReport> lanes;
  double wall_seconds = 0.0;
};

namespace detail {

struct LaneState {
  Protocol proto;
  std::vector<NeighborTable> tables;
  std::vector<LoadTracker> trackers;
  std::vector<double> ranges;
  std::vector<EldesState> eldes;
  std::vector<std::vector<DvdeReceivedRecord>> dvde_store;
  std::vector<PiggyStore> piggy;
  Rng ext_loss;
  LaneReport report;

  LaneState(Protocol p, std::size_t n, std::uint64_t seed)
      : proto(p),
        trackers(n),
        ranges(n, 0.0),
        ext_loss(seed, std::string("loss-ext-") + protocol_name(p)) {
    tables.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      tables.emplace_back(static_cast<VehicleId>(i));
    }
    if (p == Protocol::Eldes) {
      eldes.resize(n);
    } else if (p == Protocol::Dvde) {
      dvde_store.resize(n);
    } else {
      piggy.resize(n);
    }
    report.protocol = p;
  }
};

inline void prune_dvde_store(std::vector<DvdeReceivedRecord>& store, double t, double tau) {
  std::erase_if(store, [&](const DvdeReceivedRecord& r) { return t - r.tx_time > tau; });
}

}  // namespace detail

inline RunReport run(const Scenario& scenario) {
  const auto wall_start = std::chrono::steady_clock::now();
  {
    const auto errs = scenario_errors(scenario);
    if (!errs.empty()) {
      std::ostringstream msg;
      msg << "invalid scenario:";
      for (const auto& e : errs) {
        msg << ' ' << e << ';';
      }
      throw std::invalid_argument(msg.str());
    }
  }
  const SegmentGrid grid = make_grid(scenario.seg_len, scenario.mobility.road_length, scenario.ring);
  const ChannelConfig& ch = scenario.channel;
  const double dt = scenario.dt;
  const double rate = scenario.beacon.rate;
  const auto ticks = static_cast<long long>(std::llround(scenario.duration / dt));

  // mobility
  std::optional<TraceSchedule> trace;
  std::vector<VehicleState> fleet;
  Rng placement_rng(scenario.seed, "placement");
  Rng velocity_rng(scenario.seed, "velocity");
  if (scenario.trace_path.empty()) {
    fleet = init_synthetic(scenario.mobility, placement_rng, velocity_rng);
  } else {
    trace = load_trace_file(scenario.trace_path);
    if (trace->vehicle_count() == 0) {
      throw std::invalid_argument("trace contains no vehicles");
    }
    fleet.resize(trace->vehicle_count());
    for (VehicleId v = 0; v < fleet.size(); ++v) {
      const auto& samples = trace->samples[v];
      if (samples.front().t > 0.0 || samples.back().t < scenario.duration) {
        throw std::invalid_argument("trace for vehicle " + std::to_string(trace->source_ids[v]) +
                                    " does not cover [0, duration]");
      }
      for (const auto& s : samples) {
        if (s.pos < 0.0 || s.pos >= scenario.mobility.road_length) {
          throw std::invalid_argument("trace position out of [0, road_length) for vehicle " +
                                      std::to_string(trace->source_ids[v]));
        }
      }
      const auto st = trace_state_at(*trace, v, 0.0);
      fleet[v] = VehicleState{v, st.pos, st.velocity, 0.0};
    }
  }
  const std::size_t n = fleet.size();

  Rng phase_rng(scenario.seed, "phase");
  std::vector<double> phases(n);
  std::vector<BeaconCursor> cursors(n);
  for (std::size_t v = 0; v < n; ++v) {
    phases[v] = phase_rng.uniform(0.0, 1.0 / rate);
    cursors[v] = BeaconCursor(rate, phases[v]);
  }
  Rng normal_loss(scenario.seed, "loss");

  std::vector<detail::LaneState> lanes;
  lanes.reserve(scenario.protocols.size());
  for (const Protocol p : scenario.protocols) {
    lanes.emplace_back(p, n, scenario.seed);
  }

  // sampling instants, mapped onto tick indices
  std::set<long long> sample_ticks;
  sample_ticks.insert(ticks);
  if (scenario.sampling) {
    for (long long m = 1; static_cast<double>(m) < scenario.duration - 1e-9; ++m) {
      const double k = static_cast<double>(m) / dt;
      if (std::abs(k - std::round(k)) < 1e-9) {
        sample_ticks.insert(std::llround(k));
      }
    }
  }

  std::vector<RoadPos> prev_pos(n);
  std::vector<char> keep(n, 1);
  std::vector<long long> final_rn(n, 0);
  std::vector<int> ext_due(n, 0);  // n-th beacons emitted by each vehicle this tick

  for (long long tick = 0; tick <= ticks; ++tick) {
    const double t = static_cast<double>(tick) * dt;
    for (std::size_t v = 0; v < n; ++v) {
      prev_pos[v] = fleet[v].pos;
    }
    if (tick > 0) {
      if (trace) {
        for (std::size_t v = 0; v < n; ++v) {
          const auto st = trace_state_at(*trace, static_cast<VehicleId>(v), t);
          fleet[v].pos = st.pos;
          fleet[v].velocity = st.velocity;
          fleet[v].t = t;
        }
      } else {
        step_fleet(fleet, dt, grid.road_length);
      }
    }

    // decode radii for this tick, from the load sensed so far
    for (auto& lane : lanes) {
      for (std::size_t v = 0; v < n; ++v) {
        lane.ranges[v] = comm_range(ch, lane.trackers[v].sensed_rate(t, ch.load_window));
      }
    }

    // --- normal beacons, in vehicle-id order
    std::fill(ext_due.begin(), ext_due.end(), 0);
    for (std::size_t v = 0; v < n; ++v) {
      while (const auto tb = cursors[v].next_in(t, t + dt)) {
        const std::uint64_t seq = cursors[v].emitted();
        if (seq % static_cast<std::uint64_t>(scenario.params.n_period) == 0) {
          ++ext_due[v];
        }
        Beacon b;
        b.sender = static_cast<VehicleId>(v);
        b.velocity = fleet[v].velocity;
        b.tx_time = *tb;
        b.seq = seq;
        if (trace) {
          const double span_end = trace->samples[v].back().t;
          b.pos = trace_position_at(*trace, static_cast<VehicleId>(v), std::min(*tb, span_end));
        } else {
          b.pos = wrap_pos(fleet[v].pos + fleet[v].velocity * (*tb - t), grid.road_length);
        }
        // loss realization shared by every lane
        if (ch.p_loss > 0.0) {
          for (std::size_t w = 0; w < n; ++w) {
            if (w == v) continue;
            if (distance(fleet[w].pos, fleet[v].pos, grid) <= ch.r_tx) {
              keep[w] = normal_loss.next_double() >= ch.p_loss ? 1 : 0;
            }
          }
        }
        for (auto& lane : lanes) {
          const bool piggy_tick = lane.proto == Protocol::Dfpav &&
                                  seq % static_cast<std::uint64_t>(scenario.params.n_period) == 0;
          DfpavPiggyback pb;
          if (piggy_tick) {
            pb = dfpav_compose(lane.tables[v], static_cast<VehicleId>(v), t, grid);
          }
          const auto decoded = deliver_with_ranges(
              fleet, static_cast<VehicleId>(v), ch, lane.trackers, lane.ranges, t, grid,
              [&](VehicleId w) { return ch.p_loss <= 0.0 || keep[w] != 0; });
          const TxKind kind = piggy_tick ? TxKind::DfpavPiggyback : TxKind::NormalBeacon;
          ++lane.report.channel_tx_count[static_cast<std::size_t>(kind)];
          record_overhead(lane.report.overhead, kind,
                          piggy_tick ? static_cast<int>(pb.neighbors.size()) : 0,
                          scenario.beacon.payload_bytes);
          for (const VehicleId w : decoded) {
            on_beacon(lane.tables[w], b, *tb);
            if (piggy_tick) {
              dfpav_ingest(lane.piggy[w], pb, w, t);
            }
          }
        }
      }
    }

    // --- extended messages, per lane, in vehicle-id order
    for (auto& lane : lanes) {
      if (lane.proto == Protocol::Eldes) {
        if (tick == 0) continue;
        for (std::size_t v = 0; v < n; ++v) {
          const auto res = eldes_on_move(lane.eldes[v], prev_pos[v], fleet[v].pos, t, grid,
                                         scenario.params.delta_t);
          if (res.crossed) {
            ++lane.report.crossings;
          }
          if (!res.triggered) {
            continue;
          }
          ++lane.report.triggers;
          const SegmentId origin = *res.crossed;
          const auto eb = eldes_compose(lane.eldes[v], lane.tables[v], fleet[v], grid, ch.r_tx, t,
                                        scenario.params.tau_stale, origin,
                                        &lane.report.staleness);
          eldes_mark_sent(lane.eldes[v], origin, t);
          lane.report.events.push_back({static_cast<VehicleId>(v), origin, t, true});
          if (ch.p_loss > 0.0) {
            for (std::size_t w = 0; w < n; ++w) {
              if (w == v) continue;
              if (distance(fleet[w].pos, fleet[v].pos, grid) <= ch.r_tx) {
                keep[w] = lane.ext_loss.next_double() >= ch.p_loss ? 1 : 0;
              }
            }
          }
          const auto decoded = deliver_with_ranges(
              fleet, static_cast<VehicleId>(v), ch, lane.trackers, lane.ranges, t, grid,
              [&](VehicleId w) { return ch.p_loss <= 0.0 || keep[w] != 0; });
          ++lane.report.channel_tx_count[static_cast<std::size_t>(TxKind::EldesExtended)];
          record_overhead(lane.report.overhead, TxKind::EldesExtended,
                          static_cast<int>(eb.records.size()), scenario.beacon.payload_bytes);
          for (const VehicleId w : decoded) {
            eldes_on_extended(lane.eldes[w], eb, grid, t, scenario.params.tau_stale);
            lane.report.events.push_back({w, origin, t, false});
          }
        }
      } else if (lane.proto == Protocol::Dvde) {
        // fires on the tick where the sender's n-th beacon went out
        for (std::size_t v = 0; v < n; ++v) {
          for (int e = 0; e < ext_due[v]; ++e) {
            const auto eb =
                dvde_compose(lane.tables[v], fleet[v], scenario.params.k, ch.r_tx, t, grid);
            if (ch.p_loss > 0.0) {
              for (std::size_t w = 0; w < n; ++w) {
                if (w == v) continue;
                if (distance(fleet[w].pos, fleet[v].pos, grid) <= ch.r_tx) {
                  keep[w] = lane.ext_loss.next_double() >= ch.p_loss ? 1 : 0;
                }
              }
            }
            const auto decoded = deliver_with_ranges(
                fleet, static_cast<VehicleId>(v), ch, lane.trackers, lane.ranges, t, grid,
                [&](VehicleId w) { return ch.p_loss <= 0.0 || keep[w] != 0; });
            ++lane.report.channel_tx_count[static_cast<std::size_t>(TxKind::DvdeExtended)];
            record_overhead(lane.report.overhead, TxKind::DvdeExtended, eb.k,
                            scenario.beacon.payload_bytes);
            const int mid = (eb.k - 1) / 2;
            for (const VehicleId w : decoded) {
              auto& store = lane.dvde_store[w];
              detail::prune_dvde_store(store, t, scenario.params.tau_stale);
              for (int i = 0; i < eb.k; ++i) {
                const double off = (i - mid) * eb.seg_len;
                const RoadPos center = grid.ring ? wrap_pos(eb.sender_pos + off, grid.road_length)
                                                 : eb.sender_pos + off;
                store.push_back({center,
                                 static_cast<double>(eb.densities[static_cast<std::size_t>(i)]),
                                 t, eb.sender});
              }
            }
          }
        }
      }
      // dfpav extended traffic rides the normal beacons
    }

    // --- expiry
    for (auto& lane : lanes) {
      for (std::size_t v = 0; v < n; ++v) {
        expire(lane.tables[v], t, scenario.beacon.lifetime);
      }
    }

    // --- sampling
    if (sample_ticks.count(tick) != 0) {
      std::vector<long long> rn(n);
      for (std::size_t v = 0; v < n; ++v) {
        rn[v] = true_neighbor_count(fleet, static_cast<VehicleId>(v), ch.r_tx, grid);
      }
      const bool is_final = tick == ticks;
      for (auto& lane : lanes) {
        for (std::size_t v = 0; v < n; ++v) {
          long long en = 0;
          const double coverage = lane.ranges[v];
          switch (lane.proto) {
            case Protocol::Eldes:
              en = eldes_estimate(lane.eldes[v], lane.tables[v], fleet[v], grid, ch.r_tx, t,
                                  scenario.params.tau_stale, coverage, &lane.report.staleness);
              break;
            case Protocol::Dvde:
              en = dvde_estimate(lane.tables[v], lane.dvde_store[v], fleet[v], scenario.params.k,
                                 ch.r_tx, t, scenario.params.tau_stale, coverage, grid,
                                 &lane.report.staleness);
              break;
            case Protocol::Dfpav:
              en = dfpav_estimate(lane.tables[v], lane.piggy[v], fleet[v], ch.r_tx, t,
                                  scenario.params.piggy_lifetime, coverage, grid);
              break;
          }
          lane.report.samples.push_back(
              {static_cast<VehicleId>(v), t, en, rn[v]});
        }
        if (is_final) {
          double visible = 0.0;
          for (std::size_t v = 0; v < n; ++v) {
            visible += count_in_window(lane.tables[v], fleet[v].pos, ch.r_tx, t, grid);
          }
          lane.report.mean_direct_visible = visible / static_cast<double>(n);
        }
      }
      if (is_final) {
        for (std::size_t v = 0; v < n; ++v) {
          final_rn[v] = rn[v];
        }
      }
    }
  }

  RunReport report;
  report.scenario = scenario;
  report.mean_rn =
      std::accumulate(final_rn.begin(), final_rn.end(), 0.0) / static_cast<double>(n);
  const double t_end = static_cast<double>(ticks) * dt;
  for (auto& lane : lanes) {
    std::vector<EstimateSample> final_samples;
    for (const auto& s : lane.report.samples) {
      if (s.t == t_end) {
        final_samples.push_back(s);
      }
    }
    lane.report.summary = aggregate(final_samples);
    report.lanes.push_back(std::move(lane.report));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Parameter sweeps: Cartesian product of override values times seeds, each an
// independent run. Invalid combinations are reported per cell.

struct SweepCellResult {
  std::vector<std::pair<std::string, std::string>> overrides;
  std::uint64_t seed = 0;
  std::optional<RunReport> report;
  std::string error;
};

template <class ApplyFn>
std::vector<SweepCellResult> sweep(
    const Scenario& base,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& grid,
    const std::vector<std::uint64_t>& seeds, ApplyFn&& apply) {
  if (grid.empty()) {
    throw std::invalid_argument("sweep: empty parameter grid");
  }
  for (const auto& [key, values] : grid) {
    if (values.empty()) {
      throw std::invalid_argument("sweep: no values for key " + key);
    }
  }
  if (seeds.empty()) {
    throw std::invalid_argument("sweep: empty seed list");
  }
  std::vector<SweepCellResult> results;
  std::vector<std::size_t> idx(grid.size(), 0);
  while (true) {
    std::vector<std::pair<std::string, std::string>> overrides;
    overrides.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      overrides.emplace_back(grid[g].first, grid[g].second[idx[g]]);
    }
    for (const std::uint64_t seed : seeds) {
      SweepCellResult cell;
      cell.overrides = overrides;
      cell.seed = seed;
      try {
        Scenario s = base;
        for (const auto& [key, value] : overrides) {
          apply(s, key, value);
        }
        s.seed = seed;
        cell.report = run(s);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      results.push_back(std::move(cell));
    }
    // odometer over the grid, first key outermost
    std::size_t g = grid.size();
    while (g > 0) {
      --g;
      if (++idx[g] < grid[g].second.size()) {
        break;
      }
      idx[g] = 0;
      if (g == 0) {
        return results;
      }
    }
  }
}

}  // namespace eldes
