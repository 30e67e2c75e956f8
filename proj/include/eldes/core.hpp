#pragma once

// Core domain types for the density-estimation simulator: vehicle state,
// the fixed road-segment grid, ring geometry and the ground-truth
// neighbor oracle.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eldes {

using VehicleId = std::uint32_t;
using RoadPos = double;    // meters along the road, in [0, road_length)
using SegmentId = std::int32_t;

// Fixed segmentation of the road. road_length must be an exact multiple of
// segment_length. `ring` selects wrap-around topology (default) versus an
// open strip for trace replay.
struct SegmentGrid {
  double segment_length = 100.0;
  double road_length = 5000.0;
  SegmentId segment_count = 50;
  bool ring = true;
};

inline SegmentGrid make_grid(double segment_length, double road_length, bool ring = true) {
  if (segment_length <= 0.0) {
    throw std::invalid_argument("seg_len must be > 0");
  }
  if (road_length <= 0.0) {
    throw std::invalid_argument("road_length must be > 0");
  }
  const double ratio = road_length / segment_length;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 || rounded < 1.0) {
    throw std::invalid_argument("road_length must be an integer multiple of seg_len");
  }
  SegmentGrid g;
  g.segment_length = segment_length;
  g.road_length = road_length;
  g.segment_count = static_cast<SegmentId>(rounded);
  g.ring = ring;
  return g;
}

struct VehicleState {
  VehicleId id = 0;
  RoadPos pos = 0.0;
  double velocity = 0.0;   // m/s, signed
  double t = 0.0;          // time this state is valid at, seconds
};

// Normalize any coordinate into [0, road_length).
inline double wrap_pos(double x, double road_length) {
  double w = std::fmod(x, road_length);
  if (w < 0.0) {
    w += road_length;
  }
  // fmod can return road_length when x is a hair below a negative multiple
  if (w >= road_length) {
    w -= road_length;
  }
  return w;
}

// Shortest-arc distance on a ring of the given length.
inline double ring_distance(RoadPos a, RoadPos b, double road_length) {
  const double d = std::abs(a - b);
  return std::min(d, road_length - d);
}

// Signed offset from `from` to `to`: ring topology maps into
// (-road/2, road/2], open topology is the plain difference.
inline double signed_offset(RoadPos from, RoadPos to, const SegmentGrid& grid) {
  if (!grid.ring) {
    return to - from;
  }
  double off = wrap_pos(to - from, grid.road_length);
  if (off > grid.road_length / 2.0) {
    off -= grid.road_length;
  }
  return off;
}

// Topology-aware distance between two road positions.
inline double distance(RoadPos a, RoadPos b, const SegmentGrid& grid) {
  return grid.ring ? ring_distance(a, b, grid.road_length) : std::abs(a - b);
}

inline SegmentId segment_index(RoadPos pos, const SegmentGrid& grid) {
  auto idx = static_cast<SegmentId>(std::floor(pos / grid.segment_length));
  if (idx < 0) {
    idx = 0;
  }
  if (idx >= grid.segment_count) {
    idx = grid.segment_count - 1;
  }
  return idx;
}

inline RoadPos segment_center(SegmentId seg, const SegmentGrid& grid) {
  return (static_cast<double>(seg) + 0.5) * grid.segment_length;
}

inline RoadPos segment_start(SegmentId seg, const SegmentGrid& grid) {
  return static_cast<double>(seg) * grid.segment_length;
}

// Segments touched by the interval [pos - r, pos + r]. `full` holds segments
// entirely inside the interval, `partial` those with a positive-length
// overlap that are not contained. Touching at a single point does not count.
// Both lists are ordered walking the interval from its rear edge forward.
struct SegmentsInRange {
  std::vector<SegmentId> full;
  std::vector<SegmentId> partial;
};

inline SegmentsInRange segments_in_range(RoadPos pos, double r, const SegmentGrid& grid) {
  if (grid.ring && 2.0 * r >= grid.road_length) {
    throw std::invalid_argument("segments_in_range requires 2r < road_length");
  }
  SegmentsInRange out;
  const double len = grid.segment_length;
  double lo = pos - r;
  double hi = pos + r;
  if (!grid.ring) {
    lo = std::max(lo, 0.0);
    hi = std::min(hi, grid.road_length);
    if (hi <= lo) {
      return out;
    }
  }
  const auto first = static_cast<long long>(std::floor(lo / len));
  const auto last = static_cast<long long>(std::ceil(hi / len));
  for (long long f = first; f < last; ++f) {
    const double a = static_cast<double>(f) * len;
    const double b = a + len;
    if (b <= lo || a >= hi) {
      continue;  // zero-measure touch
    }
    long long idx = f % static_cast<long long>(grid.segment_count);
    if (idx < 0) {
      idx += grid.segment_count;
    }
    const auto seg = static_cast<SegmentId>(idx);
    if (!out.full.empty() && out.full.front() == seg) {
      continue;  // interval nearly closes the ring; do not emit twice
    }
    if (!out.partial.empty() && out.partial.front() == seg) {
      continue;
    }
    if (a >= lo && b <= hi) {
      out.full.push_back(seg);
    } else {
      out.partial.push_back(seg);
    }
  }
  return out;
}

// Ground-truth oracle: how many other vehicles sit within `r` of `self`.
inline long long true_neighbor_count(std::span<const VehicleState> fleet, VehicleId self,
                                     double r, const SegmentGrid& grid) {
  const VehicleState* me = nullptr;
  for (const auto& v : fleet) {
    if (v.id == self) {
      me = &v;
      break;
    }
  }
  if (me == nullptr) {
    throw std::invalid_argument("true_neighbor_count: vehicle " + std::to_string(self) +
                                " not in fleet");
  }
  long long count = 0;
  for (const auto& v : fleet) {
    if (v.id == self) {
      continue;
    }
    if (distance(v.pos, me->pos, grid) <= r) {
      ++count;
    }
  }
  return count;
}

}  // namespace eldes
