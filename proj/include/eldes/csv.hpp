#pragma once

// CSV emission and aligned text tables. Formatting is locale-independent and
// byte-stable: equal reports serialize to equal bytes.

#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "eldes/sim.hpp"

namespace eldes {

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string fmt_f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string summary_csv_header() {
  return "protocol,seed,n_vehicles,delta_t,tau_stale,seg_len,K,n_period,channel_model,beta,"
         "mean_abs_error,mean_error_ratio,undefined_ratio_count,ext_beacons,ext_bytes,"
         "normal_beacons";
}

inline std::vector<std::vector<std::string>> summary_cells(const RunReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& lane : r.lanes) {
    rows.push_back({
        protocol_name(lane.protocol),
        std::to_string(r.scenario.seed),
        std::to_string(r.scenario.mobility.n_vehicles),
        fmt_g(r.scenario.params.delta_t),
        fmt_g(r.scenario.params.tau_stale),
        fmt_g(r.scenario.seg_len),
        std::to_string(r.scenario.params.k),
        std::to_string(r.scenario.params.n_period),
        channel_model_name(r.scenario.channel.model),
        fmt_g(r.scenario.channel.beta),
        fmt_f6(lane.summary.mean_abs_error),
        fmt_f6(lane.summary.mean_error_ratio),
        std::to_string(lane.summary.undefined_ratio_count),
        std::to_string(lane.overhead.extended_beacons_sent),
        std::to_string(lane.overhead.extended_bytes_sent),
        std::to_string(lane.overhead.normal_beacons_sent),
    });
  }
  return rows;
}

inline void append_csv_rows(std::string& out, const std::vector<std::vector<std::string>>& rows) {
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) {
        out += ',';
      }
      out += row[i];
    }
    out += '\n';
  }
}

inline std::string summary_csv(std::span<const RunReport> reports) {
  std::string out = summary_csv_header();
  out += '\n';
  for (const auto& r : reports) {
    append_csv_rows(out, summary_cells(r));
  }
  return out;
}

inline std::string samples_csv_header() { return "protocol,seed,vehicle_id,t,EN,RN"; }

inline std::string samples_csv(std::span<const RunReport> reports) {
  std::string out = samples_csv_header();
  out += '\n';
  for (const auto& r : reports) {
    for (const auto& lane : r.lanes) {
      for (const auto& s : lane.samples) {
        out += protocol_name(lane.protocol);
        out += ',';
        out += std::to_string(r.scenario.seed);
        out += ',';
        out += std::to_string(s.vehicle);
        out += ',';
        out += fmt_g(s.t);
        out += ',';
        out += std::to_string(s.en);
        out += ',';
        out += std::to_string(s.rn);
        out += '\n';
      }
    }
  }
  return out;
}

// Per-protocol aggregate across a batch of seeded runs.
struct CompareRow {
  std::string protocol;
  std::size_t n_seeds = 0;
  double mean_error_ratio = 0.0;
  double mean_abs_error = 0.0;
  double mean_ext_beacons = 0.0;
  double mean_ext_bytes = 0.0;
};

inline std::vector<CompareRow> compare_rows(std::span<const RunReport> reports) {
  std::vector<CompareRow> rows;
  const auto row_for = [&rows](const std::string& name) -> CompareRow& {
    for (auto& r : rows) {
      if (r.protocol == name) {
        return r;
      }
    }
    rows.push_back(CompareRow{name, 0, 0.0, 0.0, 0.0, 0.0});
    return rows.back();
  };
  for (const auto& r : reports) {
    for (const auto& lane : r.lanes) {
      auto& row = row_for(protocol_name(lane.protocol));
      ++row.n_seeds;
      row.mean_error_ratio += lane.summary.mean_error_ratio;
      row.mean_abs_error += lane.summary.mean_abs_error;
      row.mean_ext_beacons += static_cast<double>(lane.overhead.extended_beacons_sent);
      row.mean_ext_bytes += static_cast<double>(lane.overhead.extended_bytes_sent);
    }
  }
  for (auto& row : rows) {
    if (row.n_seeds > 0) {
      const auto n = static_cast<double>(row.n_seeds);
      row.mean_error_ratio /= n;
      row.mean_abs_error /= n;
      row.mean_ext_beacons /= n;
      row.mean_ext_bytes /= n;
    }
  }
  return rows;
}

inline std::string compare_csv_header() {
  return "protocol,n_seeds,mean_error_ratio,mean_abs_error,mean_ext_beacons,mean_ext_bytes";
}

inline std::vector<std::vector<std::string>> compare_cells(std::span<const RunReport> reports) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : compare_rows(reports)) {
    rows.push_back({row.protocol, std::to_string(row.n_seeds), fmt_f6(row.mean_error_ratio),
                    fmt_f6(row.mean_abs_error), fmt_f6(row.mean_ext_beacons),
                    fmt_f6(row.mean_ext_bytes)});
  }
  return rows;
}

inline std::string compare_csv(std::span<const RunReport> reports) {
  std::string out = compare_csv_header();
  out += '\n';
  append_csv_rows(out, compare_cells(reports));
  return out;
}

inline std::string sweep_csv_header() {
  return "protocol,seed,n_vehicles,road_length,v_min,v_max,placement,seg_len,r_tx,beacon_rate,"
         "beacon_lifetime,duration,dt,channel_model,beta,load_sat,min_range_fraction,p_loss,"
         "load_window,delta_t,tau_stale,n_period,k,piggy_lifetime,mean_abs_error,"
         "mean_error_ratio,undefined_ratio_count,ext_beacons,ext_bytes,normal_beacons";
}

inline void append_sweep_rows(std::string& out, const RunReport& r) {
  const Scenario& s = r.scenario;
  for (const auto& lane : r.lanes) {
    std::vector<std::string> row = {
        protocol_name(lane.protocol),
        std::to_string(s.seed),
        std::to_string(s.mobility.n_vehicles),
        fmt_g(s.mobility.road_length),
        fmt_g(s.mobility.v_min),
        fmt_g(s.mobility.v_max),
        placement_name(s.mobility.placement),
        fmt_g(s.seg_len),
        fmt_g(s.channel.r_tx),
        fmt_g(s.beacon.rate),
        fmt_g(s.beacon.lifetime),
        fmt_g(s.duration),
        fmt_g(s.dt),
        channel_model_name(s.channel.model),
        fmt_g(s.channel.beta),
        fmt_g(s.channel.load_sat),
        fmt_g(s.channel.min_range_fraction),
        fmt_g(s.channel.p_loss),
        fmt_g(s.channel.load_window),
        fmt_g(s.params.delta_t),
        fmt_g(s.params.tau_stale),
        std::to_string(s.params.n_period),
        std::to_string(s.params.k),
        fmt_g(s.params.piggy_lifetime),
        fmt_f6(lane.summary.mean_abs_error),
        fmt_f6(lane.summary.mean_error_ratio),
        std::to_string(lane.summary.undefined_ratio_count),
        std::to_string(lane.overhead.extended_beacons_sent),
        std::to_string(lane.overhead.extended_bytes_sent),
        std::to_string(lane.overhead.normal_beacons_sent),
    };
    append_csv_rows(out, {row});
  }
}

// Fixed-width table over the same cell strings that go to the CSVs.
inline std::string text_table(const std::vector<std::string>& headers,
                              const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(headers.size(), 0);
  for (std::size_t i = 0; i < headers.size(); ++i) {
    widths[i] = headers[i].size();
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size() && i < widths.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  std::string out;
  const auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) {
        out += "  ";
      }
      out += cells[i];
      out.append(widths[i] - cells[i].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') {
      out.pop_back();
    }
    out += '\n';
  };
  emit(headers);
  for (const auto& row : rows) {
    emit(row);
  }
  return out;
}

inline std::vector<std::string> split_header(const std::string& header) {
  std::vector<std::string> out;
  std::string cell;
  for (const char c : header) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

}  // namespace eldes
