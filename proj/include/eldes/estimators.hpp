#pragma once

// The three local-density estimation protocols.
//
// eldes: fixed road segments; a vehicle crossing a segment center sends an
//        extended beacon with per-segment densities unless it saw one for
//        that segment within the last delta_t; receivers keep, per segment,
//        the record measured nearest to the segment center.
// dvde:  sender-centered odd segmentation broadcast every n-th beacon;
//        receivers match or linearly interpolate record centers.
// dfpav: full neighbor-list piggyback every n-th beacon.
//
// All three estimate over remote data only beyond the vehicle's own sensed
// communication radius; inside it the (extrapolated) neighbor table is the
// authority, which is what makes estimates collapse to exact direct counts
// on an undegraded channel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "eldes/beaconing.hpp"
#include "eldes/core.hpp"

namespace eldes {

// Tracks every consumed record's age so staleness violations are observable.
struct StalenessAudit {
  long long consumed = 0;
  long long violations = 0;
  double max_age = 0.0;

  void note(double age, double tau) {
    ++consumed;
    max_age = std::max(max_age, age);
    if (age > tau + 1e-12) {
      ++violations;
    }
  }
};

struct SegmentRecord {
  SegmentId seg = 0;
  int density = 0;          // total occupancy of the segment, composer included
  VehicleId source = 0;     // vehicle that measured the density
  RoadPos source_pos = 0.0; // its position at measurement time
  double measured_at = 0.0;
};

struct EldesExtendedBeacon {
  VehicleId sender = 0;
  RoadPos sender_pos = 0.0;
  double tx_time = 0.0;
  SegmentId origin_seg = 0;
  std::vector<SegmentRecord> records;
};

struct EldesState {
  std::map<SegmentId, SegmentRecord> knowledge;
  std::map<SegmentId, double> last_seen_ext;  // last send or decode per origin segment
};

struct EldesMoveResult {
  std::optional<SegmentId> crossed;  // center passed on this step, if any
  bool triggered = false;            // crossed and cleared the delta_t window
};

// Segment-center crossing detection over the directed arc (pos_prev, pos_now].
inline EldesMoveResult eldes_on_move(const EldesState& state, RoadPos pos_prev, RoadPos pos_now,
                                     double t, const SegmentGrid& grid, double delta_t) {
  EldesMoveResult res;
  const double d = signed_offset(pos_prev, pos_now, grid);
  if (d == 0.0) {
    return res;
  }
  const double L = grid.segment_length;
  const double lo = std::min(0.0, d);
  const double hi = std::max(0.0, d);
  // centers live at (f + 0.5) * L; scan the handful near the step
  const auto f_first = static_cast<long long>(std::floor((pos_prev + lo) / L)) - 1;
  const auto f_last = static_cast<long long>(std::ceil((pos_prev + hi) / L)) + 1;
  int crossings = 0;
  for (long long f = f_first; f <= f_last; ++f) {
    const double c = (static_cast<double>(f) + 0.5) * L;
    const double off = c - pos_prev;  // unwrapped, same frame as d
    const bool hit = d > 0.0 ? (off > 0.0 && off <= d) : (off >= d && off < 0.0);
    if (!hit) {
      continue;
    }
    ++crossings;
    long long idx = f % static_cast<long long>(grid.segment_count);
    if (idx < 0) {
      idx += grid.segment_count;
    }
    res.crossed = static_cast<SegmentId>(idx);
  }
  if (crossings > 1) {
    throw std::runtime_error("eldes_on_move: step spans >= 2 segment centers (v_max*dt >= seg_len)");
  }
  if (res.crossed) {
    const auto it = state.last_seen_ext.find(*res.crossed);
    res.triggered = (it == state.last_seen_ext.end()) || (t - it->second >= delta_t);
  }
  return res;
}

inline void eldes_mark_sent(EldesState& state, SegmentId seg, double t) {
  state.last_seen_ext[seg] = t;
}

// Segments whose center lies within r of pos, ordered rear to front.
inline std::vector<SegmentId> segments_with_center_in_range(RoadPos pos, double r,
                                                            const SegmentGrid& grid) {
  std::vector<SegmentId> out;
  const double L = grid.segment_length;
  const auto f_first = static_cast<long long>(std::floor((pos - r) / L)) - 1;
  const auto f_last = static_cast<long long>(std::ceil((pos + r) / L)) + 1;
  for (long long f = f_first; f <= f_last; ++f) {
    const double c = (static_cast<double>(f) + 0.5) * L;
    if (!grid.ring && (c < 0.0 || c > grid.road_length)) {
      continue;
    }
    if (std::abs(c - pos) > r) {
      continue;
    }
    long long idx = f % static_cast<long long>(grid.segment_count);
    if (idx < 0) {
      idx += grid.segment_count;
    }
    const auto seg = static_cast<SegmentId>(idx);
    if (!out.empty() && out.front() == seg) {
      continue;
    }
    out.push_back(seg);
  }
  return out;
}

// Build the extended beacon: relay fresh knowledge, measure everything else
// from the own table. The sender's own segment is always measured fresh.
inline EldesExtendedBeacon eldes_compose(const EldesState& state, const NeighborTable& table,
                                         const VehicleState& self, const SegmentGrid& grid,
                                         double r_tx, double t, double tau_stale,
                                         SegmentId origin_seg, StalenessAudit* audit = nullptr) {
  EldesExtendedBeacon eb;
  eb.sender = self.id;
  eb.sender_pos = self.pos;
  eb.tx_time = t;
  eb.origin_seg = origin_seg;
  const SegmentId own_seg = segment_index(self.pos, grid);
  for (const SegmentId seg : segments_with_center_in_range(self.pos, r_tx, grid)) {
    const auto it = state.knowledge.find(seg);
    if (seg != own_seg && it != state.knowledge.end() &&
        t - it->second.measured_at <= tau_stale) {
      if (audit != nullptr) {
        audit->note(t - it->second.measured_at, tau_stale);
      }
      eb.records.push_back(it->second);
      continue;
    }
    SegmentRecord rec;
    rec.seg = seg;
    rec.density = count_in_segment(table, seg, t, grid) + (seg == own_seg ? 1 : 0);
    rec.source = self.id;
    rec.source_pos = self.pos;
    rec.measured_at = t;
    eb.records.push_back(rec);
  }
  return eb;
}

// Receiver-side merge: per segment keep the fresh record whose source was
// nearest to the segment center; ties go to the newer measurement, then the
// lower source id. A stale record never displaces a fresh one.
inline void eldes_on_extended(EldesState& state, const EldesExtendedBeacon& eb,
                              const SegmentGrid& grid, double t, double tau_stale) {
  state.last_seen_ext[eb.origin_seg] = t;
  for (const auto& rec : eb.records) {
    auto it = state.knowledge.find(rec.seg);
    if (it == state.knowledge.end()) {
      state.knowledge.emplace(rec.seg, rec);
      continue;
    }
    const SegmentRecord& ex = it->second;
    const bool ex_fresh = t - ex.measured_at <= tau_stale;
    const bool in_fresh = t - rec.measured_at <= tau_stale;
    bool adopt = false;
    if (!in_fresh) {
      adopt = false;
    } else if (!ex_fresh) {
      adopt = true;
    } else {
      const RoadPos center = segment_center(rec.seg, grid);
      const double d_in = distance(rec.source_pos, center, grid);
      const double d_ex = distance(ex.source_pos, center, grid);
      if (d_in < d_ex) {
        adopt = true;
      } else if (d_in == d_ex) {
        adopt = rec.measured_at > ex.measured_at ||
                (rec.measured_at == ex.measured_at && rec.source < ex.source);
      }
    }
    if (adopt) {
      it->second = rec;
    }
  }
}

// Estimated neighbor count within r_tx. Fully covered segments (inside the
// vehicle's own sensed communication radius) and all edge segments are
// counted from the table; other full segments use fresh knowledge when
// present.
inline long long eldes_estimate(const EldesState& state, const NeighborTable& table,
                                const VehicleState& self, const SegmentGrid& grid, double r_tx,
                                double t, double tau_stale, double coverage_radius,
                                StalenessAudit* audit = nullptr) {
  const SegmentsInRange segs = segments_in_range(self.pos, r_tx, grid);
  std::map<SegmentId, int> remote;
  for (const SegmentId seg : segs.full) {
    const double off_start = signed_offset(self.pos, segment_start(seg, grid), grid);
    const bool covered = off_start >= -coverage_radius &&
                         off_start + grid.segment_length <= coverage_radius;
    if (covered) {
      continue;  // own table is authoritative here
    }
    const auto it = state.knowledge.find(seg);
    if (it != state.knowledge.end() && t - it->second.measured_at <= tau_stale) {
      if (audit != nullptr) {
        audit->note(t - it->second.measured_at, tau_stale);
      }
      remote[seg] = it->second.density;
    }
    // else: fall back to the table count below
  }
  long long own = 0;
  for (const auto& [id, e] : table.entries()) {
    const RoadPos p = predicted_pos(e, t, grid);
    if (std::abs(signed_offset(self.pos, p, grid)) > r_tx) {
      continue;
    }
    if (remote.count(segment_index(p, grid)) != 0) {
      continue;  // that segment is accounted for by a knowledge record
    }
    ++own;
  }
  long long en = own;
  for (const auto& [seg, density] : remote) {
    en += density;
  }
  if (remote.count(segment_index(self.pos, grid)) != 0) {
    --en;  // the remote record counts this vehicle itself
  }
  return std::max<long long>(0, en);
}

// ---------------------------------------------------------------------------
// DVDE baseline

struct DvdeExtendedBeacon {
  VehicleId sender = 0;
  RoadPos sender_pos = 0.0;
  double tx_time = 0.0;
  int k = 5;                   // odd number of sender-centered segments
  double seg_len = 0.0;        // 2 r_tx / k
  std::vector<int> densities;  // rear to front, middle includes the sender
};

struct DvdeReceivedRecord {
  RoadPos center = 0.0;
  double density = 0.0;
  double tx_time = 0.0;
  VehicleId sender = 0;
};

inline DvdeExtendedBeacon dvde_compose(const NeighborTable& table, const VehicleState& self,
                                       int k, double r_tx, double t, const SegmentGrid& grid) {
  if (k < 1 || k % 2 == 0) {
    throw std::invalid_argument("dvde: segment count k must be odd and >= 1");
  }
  DvdeExtendedBeacon eb;
  eb.sender = self.id;
  eb.sender_pos = self.pos;
  eb.tx_time = t;
  eb.k = k;
  eb.seg_len = 2.0 * r_tx / static_cast<double>(k);
  const int mid = (k - 1) / 2;
  eb.densities.resize(static_cast<std::size_t>(k), 0);
  for (const auto& [id, e] : table.entries()) {
    const RoadPos p = predicted_pos(e, t, grid);
    const double off = signed_offset(self.pos, p, grid);
    if (off < -r_tx || off >= r_tx) {
      continue;
    }
    const int tile = std::clamp(static_cast<int>(std::floor((off + r_tx) / eb.seg_len)), 0, k - 1);
    ++eb.densities[static_cast<std::size_t>(tile)];
  }
  ++eb.densities[static_cast<std::size_t>(mid)];  // the sender itself
  return eb;
}

// Pick or interpolate a density for a tile centered at target_center from
// fresh received records: an exact-center record wins, otherwise the two
// nearest bracketing records interpolate linearly, otherwise the single
// nearest record is used as-is.
inline std::optional<double> dvde_interpolate(const std::vector<DvdeReceivedRecord>& received,
                                              RoadPos target_center, double seg_len, double t,
                                              double tau_stale, const SegmentGrid& grid,
                                              StalenessAudit* audit = nullptr) {
  const double tol = seg_len / 100.0;
  const DvdeReceivedRecord* exact = nullptr;
  const DvdeReceivedRecord* below = nullptr;  // nearest with center behind target
  const DvdeReceivedRecord* above = nullptr;
  const DvdeReceivedRecord* nearest = nullptr;
  double exact_d = 0.0, below_d = 0.0, above_d = 0.0, nearest_d = 0.0;

  const auto better = [](double d_new, const DvdeReceivedRecord& r_new, double d_old,
                         const DvdeReceivedRecord* r_old) {
    if (r_old == nullptr || d_new < d_old) {
      return true;
    }
    if (d_new > d_old) {
      return false;
    }
    if (r_new.tx_time != r_old->tx_time) {
      return r_new.tx_time > r_old->tx_time;
    }
    return r_new.sender < r_old->sender;
  };

  for (const auto& rec : received) {
    if (t - rec.tx_time > tau_stale) {
      continue;
    }
    const double off = signed_offset(target_center, rec.center, grid);
    const double d = std::abs(off);
    if (d <= tol && better(d, rec, exact_d, exact)) {
      exact = &rec;
      exact_d = d;
    }
    if (off < 0.0 && better(d, rec, below_d, below)) {
      below = &rec;
      below_d = d;
    }
    if (off > 0.0 && better(d, rec, above_d, above)) {
      above = &rec;
      above_d = d;
    }
    if (better(d, rec, nearest_d, nearest)) {
      nearest = &rec;
      nearest_d = d;
    }
  }
  const auto note = [&](const DvdeReceivedRecord& r) {
    if (audit != nullptr) {
      audit->note(t - r.tx_time, tau_stale);
    }
  };
  if (exact != nullptr) {
    note(*exact);
    return exact->density;
  }
  if (below != nullptr && above != nullptr) {
    note(*below);
    note(*above);
    return (below->density * above_d + above->density * below_d) / (below_d + above_d);
  }
  if (nearest != nullptr) {
    note(*nearest);
    return nearest->density;
  }
  return std::nullopt;
}

inline long long dvde_estimate(const NeighborTable& table,
                               const std::vector<DvdeReceivedRecord>& received,
                               const VehicleState& self, int k, double r_tx, double t,
                               double tau_stale, double coverage_radius, const SegmentGrid& grid,
                               StalenessAudit* audit = nullptr) {
  if (k < 1 || k % 2 == 0) {
    throw std::invalid_argument("dvde: segment count k must be odd and >= 1");
  }
  const double seg_len = 2.0 * r_tx / static_cast<double>(k);
  const int mid = (k - 1) / 2;
  std::map<int, double> remote;
  for (int i = 0; i < k; ++i) {
    if (i == mid) {
      continue;  // the middle tile always comes from the own table
    }
    const double off_center = (i - mid) * seg_len;
    if (std::abs(off_center) + seg_len / 2.0 <= coverage_radius) {
      continue;  // fully inside the sensed communication radius
    }
    const RoadPos target = grid.ring ? wrap_pos(self.pos + off_center, grid.road_length)
                                     : self.pos + off_center;
    const auto v = dvde_interpolate(received, target, seg_len, t, tau_stale, grid, audit);
    if (v) {
      remote[i] = *v;
    }
  }
  long long own = 0;
  for (const auto& [id, e] : table.entries()) {
    const RoadPos p = predicted_pos(e, t, grid);
    const double off = signed_offset(self.pos, p, grid);
    if (std::abs(off) > r_tx) {
      continue;
    }
    const int tile = std::clamp(static_cast<int>(std::floor((off + r_tx) / seg_len)), 0, k - 1);
    if (remote.count(tile) != 0) {
      continue;
    }
    ++own;
  }
  double sum = static_cast<double>(own) + 1.0;  // + the vehicle itself (middle tile)
  for (const auto& [tile, density] : remote) {
    sum += density;
  }
  return std::max<long long>(0, std::llround(sum) - 1);
}

// ---------------------------------------------------------------------------
// D-FPAV piggyback baseline

struct DfpavPiggyback {
  VehicleId sender = 0;
  double tx_time = 0.0;
  std::vector<std::pair<VehicleId, RoadPos>> neighbors;  // snapshot, sorted by id
};

inline DfpavPiggyback dfpav_compose(const NeighborTable& table, VehicleId sender, double t,
                                    const SegmentGrid& grid) {
  DfpavPiggyback pb;
  pb.sender = sender;
  pb.tx_time = t;
  pb.neighbors.reserve(table.size());
  for (const auto& [id, e] : table.entries()) {
    pb.neighbors.emplace_back(id, predicted_pos(e, t, grid));
  }
  return pb;
}

struct PiggyEntry {
  RoadPos pos = 0.0;
  double heard_at = 0.0;
};

using PiggyStore = std::map<VehicleId, PiggyEntry>;

inline void dfpav_ingest(PiggyStore& store, const DfpavPiggyback& pb, VehicleId self_id,
                         double t) {
  for (const auto& [id, pos] : pb.neighbors) {
    if (id == self_id) {
      continue;
    }
    auto it = store.find(id);
    if (it == store.end() || t >= it->second.heard_at) {
      store[id] = PiggyEntry{pos, t};
    }
  }
}

// Union of the direct table and fresh piggybacked entries, deduplicated by
// id preferring the fresher position and filtered to r_tx. Piggyback-only
// entries inside the sensed communication radius are discarded: a vehicle
// really there would have been heard directly.
inline long long dfpav_estimate(const NeighborTable& table, const PiggyStore& store,
                                const VehicleState& self, double r_tx, double t,
                                double piggy_lifetime, double coverage_radius,
                                const SegmentGrid& grid) {
  long long count = 0;
  for (const auto& [id, e] : table.entries()) {
    RoadPos p = predicted_pos(e, t, grid);
    const auto pit = store.find(id);
    if (pit != store.end() && pit->second.heard_at > e.last_heard) {
      // newer piggybacked fix, carried forward with the directly heard velocity
      const double x = pit->second.pos + e.velocity * (t - pit->second.heard_at);
      p = grid.ring ? wrap_pos(x, grid.road_length) : x;
    }
    if (distance(p, self.pos, grid) <= r_tx) {
      ++count;
    }
  }
  for (const auto& [id, entry] : store) {
    if (id == self.id || table.find(id) != nullptr) {
      continue;
    }
    if (t - entry.heard_at > piggy_lifetime) {
      continue;
    }
    const double d = distance(entry.pos, self.pos, grid);
    if (d <= r_tx && d > coverage_radius) {
      ++count;
    }
  }
  return count;
}

}  // namespace eldes
