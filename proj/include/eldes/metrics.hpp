#pragma once

// Error-ratio and overhead accounting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "eldes/core.hpp"

namespace eldes {

struct EstimateSample {
  VehicleId vehicle = 0;
  double t = 0.0;
  long long en = 0;
  long long rn = 0;
};

// |EN - RN| / RN; undefined when RN = 0 (the absolute error still counts).
inline std::optional<double> error_ratio(long long en, long long rn) {
  if (en < 0 || rn < 0) {
    throw std::invalid_argument("error_ratio: counts must be >= 0");
  }
  if (rn == 0) {
    return std::nullopt;
  }
  return std::abs(static_cast<double>(en - rn)) / static_cast<double>(rn);
}

struct VehicleErrorRow {
  VehicleId vehicle = 0;
  double mean_abs_error = 0.0;
  std::optional<double> mean_error_ratio;
};

struct MetricsSummary {
  std::size_t sample_count = 0;
  std::size_t undefined_ratio_count = 0;  // samples with RN = 0
  double mean_abs_error = 0.0;
  double mean_error_ratio = 0.0;          // over defined ratios only
  double mean_bias = 0.0;                 // mean of EN - RN, sign kept
  std::vector<VehicleErrorRow> per_vehicle;
};

inline MetricsSummary aggregate(std::span<const EstimateSample> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("aggregate: no samples");
  }
  MetricsSummary out;
  out.sample_count = samples.size();
  double abs_sum = 0.0, ratio_sum = 0.0, bias_sum = 0.0;
  std::size_t defined = 0;

  struct Acc {
    double abs_sum = 0.0;
    double ratio_sum = 0.0;
    std::size_t n = 0;
    std::size_t ratio_n = 0;
  };
  std::vector<std::pair<VehicleId, Acc>> per;
  const auto acc_for = [&per](VehicleId v) -> Acc& {
    auto it = std::lower_bound(per.begin(), per.end(), v,
                               [](const auto& p, VehicleId id) { return p.first < id; });
    if (it == per.end() || it->first != v) {
      it = per.insert(it, {v, Acc{}});
    }
    return it->second;
  };

  for (const auto& s : samples) {
    const double abs_err = std::abs(static_cast<double>(s.en - s.rn));
    abs_sum += abs_err;
    bias_sum += static_cast<double>(s.en - s.rn);
    auto& acc = acc_for(s.vehicle);
    acc.abs_sum += abs_err;
    ++acc.n;
    if (const auto r = error_ratio(s.en, s.rn)) {
      ratio_sum += *r;
      ++defined;
      acc.ratio_sum += *r;
      ++acc.ratio_n;
    } else {
      ++out.undefined_ratio_count;
    }
  }
  out.mean_abs_error = abs_sum / static_cast<double>(samples.size());
  out.mean_bias = bias_sum / static_cast<double>(samples.size());
  out.mean_error_ratio = defined == 0 ? 0.0 : ratio_sum / static_cast<double>(defined);
  out.per_vehicle.reserve(per.size());
  for (const auto& [v, acc] : per) {
    VehicleErrorRow row;
    row.vehicle = v;
    row.mean_abs_error = acc.abs_sum / static_cast<double>(acc.n);
    if (acc.ratio_n > 0) {
      row.mean_error_ratio = acc.ratio_sum / static_cast<double>(acc.ratio_n);
    }
    out.per_vehicle.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Overhead

enum class TxKind { NormalBeacon, EldesExtended, DvdeExtended, DfpavPiggyback };

// Byte model: normal beacons are fixed-size packets; eldes/dvde extended
// beacons share one record format (20-byte header + 8 bytes per record);
// the dfpav piggyback is a full beacon plus 12 bytes per neighbor entry.
inline long long message_bytes(TxKind kind, int units, int beacon_bytes = 500) {
  switch (kind) {
    case TxKind::NormalBeacon:
      return beacon_bytes;
    case TxKind::EldesExtended:
    case TxKind::DvdeExtended:
      return 20 + 8ll * units;
    case TxKind::DfpavPiggyback:
      return beacon_bytes + 12ll * units;
  }
  return 0;
}

struct OverheadCounters {
  long long extended_beacons_sent = 0;
  long long extended_bytes_sent = 0;
  long long normal_beacons_sent = 0;
  long long normal_bytes_sent = 0;
};

// `units` is the record count (eldes/dvde) or neighbor count (dfpav).
// A piggybacked beacon still counts as a sent beacon.
inline void record_overhead(OverheadCounters& c, TxKind kind, int units = 0,
                            int beacon_bytes = 500) {
  const long long bytes = message_bytes(kind, units, beacon_bytes);
  switch (kind) {
    case TxKind::NormalBeacon:
      ++c.normal_beacons_sent;
      c.normal_bytes_sent += bytes;
      break;
    case TxKind::EldesExtended:
    case TxKind::DvdeExtended:
      ++c.extended_beacons_sent;
      c.extended_bytes_sent += bytes;
      break;
    case TxKind::DfpavPiggyback:
      ++c.normal_beacons_sent;
      ++c.extended_beacons_sent;
      c.extended_bytes_sent += bytes;
      break;
  }
}

}  // namespace eldes
