#pragma once

// Broadcast channel model. A transmission is physically present within the
// transmission range R_tx; whether a vehicle actually decodes it depends on
// that vehicle's locally sensed message load, which shrinks its reliable
// communication range (down to min_range_fraction * R_tx at saturation).

#include <algorithm>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "eldes/core.hpp"

namespace eldes {

enum class ChannelModel { Ideal, LoadDegraded };

inline const char* channel_model_name(ChannelModel m) {
  return m == ChannelModel::Ideal ? "ideal" : "load-degraded";
}

struct ChannelConfig {
  double r_tx = 1000.0;
  ChannelModel model = ChannelModel::LoadDegraded;
  double beta = 0.9;                // degradation slope
  double load_sat = 1200.0;         // msg/s at which degradation saturates
  double min_range_fraction = 0.1;  // floor of the communication range
  double p_loss = 0.0;              // i.i.d. per-packet loss
  double load_window = 1.0;         // seconds of load history
};

// Sliding window of message-sense timestamps for one vehicle. Events must be
// recorded, and the window queried, with non-decreasing times.
class LoadTracker {
 public:
  void record(double t) { events_.push_back(t); }

  // Messages sensed in (t - window, t], divided by the window.
  double sensed_rate(double t, double window) {
    while (!events_.empty() && events_.front() <= t - window) {
      events_.pop_front();
    }
    std::size_t n = 0;
    for (auto it = events_.rbegin(); it != events_.rend() && *it > t - window; ++it) {
      if (*it <= t) {
        ++n;
      }
    }
    return static_cast<double>(n) / window;
  }

  std::size_t event_count() const { return events_.size(); }

 private:
  std::deque<double> events_;
};

inline double sensed_load(LoadTracker& tracker, double t, double window) {
  return tracker.sensed_rate(t, window);
}

// Reliable decode range as a function of the receiver-side load.
inline double comm_range(const ChannelConfig& cfg, double load) {
  if (cfg.model == ChannelModel::Ideal) {
    return cfg.r_tx;
  }
  const double frac = 1.0 - cfg.beta * std::min(1.0, load / cfg.load_sat);
  return cfg.r_tx * std::max(cfg.min_range_fraction, frac);
}

// One transmission. Every vehicle within R_tx of the sender senses the
// message (its load tracker is bumped at `t_stamp`) whether or not it can
// decode it; the decode set is limited by each receiver's communication
// range and the per-receiver `keep` predicate (packet loss). Receivers are
// returned in id order. The sender senses its own transmission but never
// receives it.
template <class KeepFn>
std::vector<VehicleId> deliver_with_ranges(std::span<const VehicleState> fleet, VehicleId tx,
                                           const ChannelConfig& cfg,
                                           std::span<LoadTracker> trackers,
                                           std::span<const double> ranges, double t_stamp,
                                           const SegmentGrid& grid, KeepFn&& keep) {
  const VehicleState* sender = nullptr;
  for (const auto& v : fleet) {
    if (v.id == tx) {
      sender = &v;
      break;
    }
  }
  if (sender == nullptr) {
    throw std::invalid_argument("deliver: sender not in fleet");
  }
  std::vector<VehicleId> decoded;
  for (const auto& v : fleet) {
    const double d = distance(v.pos, sender->pos, grid);
    if (d > cfg.r_tx) {
      continue;
    }
    trackers[v.id].record(t_stamp);
    if (v.id == tx) {
      continue;
    }
    if (d <= ranges[v.id] && keep(v.id)) {
      decoded.push_back(v.id);
    }
  }
  return decoded;
}

// Convenience form evaluating each receiver's current range from its live
// sensed load (before this message is recorded).
template <class KeepFn>
std::vector<VehicleId> deliver(std::span<const VehicleState> fleet, VehicleId tx,
                               const ChannelConfig& cfg, std::span<LoadTracker> trackers,
                               double t, const SegmentGrid& grid, KeepFn&& keep) {
  std::vector<double> ranges(trackers.size(), 0.0);
  for (std::size_t i = 0; i < trackers.size(); ++i) {
    ranges[i] = comm_range(cfg, trackers[i].sensed_rate(t, cfg.load_window));
  }
  return deliver_with_ranges(fleet, tx, cfg, trackers, ranges, t, grid,
                             std::forward<KeepFn>(keep));
}

inline std::vector<VehicleId> deliver(std::span<const VehicleState> fleet, VehicleId tx,
                                      const ChannelConfig& cfg, std::span<LoadTracker> trackers,
                                      double t, const SegmentGrid& grid) {
  return deliver(fleet, tx, cfg, trackers, t, grid, [](VehicleId) { return true; });
}

}  // namespace eldes
