#pragma once

// Periodic normal beacons and per-vehicle neighbor tables with expiry.
// Stored neighbor positions are taken at the beacon instant and are
// extrapolated with the announced velocity when queried later, so window
// counts track the continuous constant-velocity world.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>

#include "eldes/core.hpp"

namespace eldes {

struct Beacon {
  VehicleId sender = 0;
  RoadPos pos = 0.0;      // sender position at tx_time
  double velocity = 0.0;
  double tx_time = 0.0;
  std::uint64_t seq = 0;  // strictly increasing per sender
};

// True exactly at the sender's beacon instants t = phase + k/rate.
inline bool beacon_due(double t, double rate, double phase, double eps = 1e-9) {
  if (rate <= 0.0) {
    return false;
  }
  const double k = std::round((t - phase) * rate);
  if (k < 0.0) {
    return std::abs(t - phase) <= eps;
  }
  return std::abs(t - (phase + k / rate)) <= eps;
}

// Walks a sender's beacon instants in order; the engine asks for the
// instants inside each tick window [t0, t1).
class BeaconCursor {
 public:
  BeaconCursor() = default;
  BeaconCursor(double rate, double phase) : interval_(1.0 / rate), phase_(phase) {}

  std::optional<double> next_in(double t0, double t1) {
    const double t = phase_ + static_cast<double>(next_) * interval_;
    if (t >= t0 - 1e-12 && t < t1 - 1e-12) {
      ++next_;
      return t;
    }
    return std::nullopt;
  }

  std::uint64_t emitted() const { return next_; }

 private:
  double interval_ = 0.1;
  double phase_ = 0.0;
  std::uint64_t next_ = 0;
};

struct NeighborEntry {
  RoadPos pos = 0.0;       // at last_heard
  double velocity = 0.0;
  double last_heard = 0.0;
};

inline RoadPos predicted_pos(const NeighborEntry& e, double t, const SegmentGrid& grid) {
  const double x = e.pos + e.velocity * (t - e.last_heard);
  return grid.ring ? wrap_pos(x, grid.road_length) : x;
}

class NeighborTable {
 public:
  NeighborTable() = default;
  explicit NeighborTable(VehicleId owner) : owner_(owner) {}

  VehicleId owner() const { return owner_; }
  std::size_t size() const { return entries_.size(); }
  const std::map<VehicleId, NeighborEntry>& entries() const { return entries_; }

  const NeighborEntry* find(VehicleId id) const {
    const auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void upsert(VehicleId sender, const NeighborEntry& e) { entries_[sender] = e; }

  void remove_older_than(double cutoff) {
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (it->second.last_heard < cutoff) {
        it = entries_.erase(it);
      } else {
        ++it;
      }
    }
  }

 private:
  VehicleId owner_ = 0;
  std::map<VehicleId, NeighborEntry> entries_;
};

inline void on_beacon(NeighborTable& table, const Beacon& b, double t) {
  if (b.sender == table.owner()) {
    throw std::invalid_argument("on_beacon: a vehicle never hears its own beacon");
  }
  table.upsert(b.sender, NeighborEntry{b.pos, b.velocity, t});
}

// Drop entries with t - last_heard > lifetime. Age == lifetime survives.
inline void expire(NeighborTable& table, double t, double lifetime) {
  table.remove_older_than(t - lifetime);
}

// Optional clip window for counts: symmetric arc, closed bounds.
struct ClipWindow {
  RoadPos center;
  double half_width;
};

// Entries whose (extrapolated) position lies within [center-hw, center+hw],
// optionally intersected with a clip window. Closed bounds on both arcs.
inline int count_in_window(const NeighborTable& table, RoadPos center, double half_width,
                           double t, const SegmentGrid& grid,
                           std::optional<ClipWindow> clip = std::nullopt) {
  if (half_width < 0.0) {
    throw std::invalid_argument("count_in_window: half_width must be >= 0");
  }
  int n = 0;
  for (const auto& [id, e] : table.entries()) {
    const RoadPos p = predicted_pos(e, t, grid);
    if (std::abs(signed_offset(center, p, grid)) > half_width) {
      continue;
    }
    if (clip && std::abs(signed_offset(clip->center, p, grid)) > clip->half_width) {
      continue;
    }
    ++n;
  }
  return n;
}

// Entries currently inside one grid segment (half-open, so segment counts
// over the whole ring partition the table).
inline int count_in_segment(const NeighborTable& table, SegmentId seg, double t,
                            const SegmentGrid& grid) {
  int n = 0;
  for (const auto& [id, e] : table.entries()) {
    RoadPos p = predicted_pos(e, t, grid);
    if (!grid.ring && (p < 0.0 || p >= grid.road_length)) {
      continue;  // drifted off an open strip
    }
    if (segment_index(p, grid) == seg) {
      ++n;
    }
  }
  return n;
}

}  // namespace eldes
