#pragma once

// Scenario configuration: defaults, the key registry shared by config files,
// command-line overrides and sweep grids, and the plaintext config format
// (`key = value` lines under [section] headers, `#` comments).

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eldes/sim.hpp"

namespace eldes {

// Configuration mistakes (unknown key, bad value, inconsistent scenario).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Radio-layer reference parameters carried along for context only; the
// channel abstraction does not model them.
inline const std::vector<std::pair<std::string, std::string>>& phy_reference() {
  static const std::vector<std::pair<std::string, std::string>> params = {
      {"frequency", "5.9 GHz"},          {"data_rate", "6 Mbps"},
      {"carrier_sense_threshold", "-96 dBm"}, {"noise_floor", "-99 dBm"},
      {"sinr_preamble_capture", "4 dB"}, {"sinr_frame_body_capture", "10 dB"},
      {"slot_time", "16 us"},            {"sifs_time", "32 us"},
      {"preamble_length", "40 us"},      {"plcp_header_length", "8 us"},
  };
  return params;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument("");
    }
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument("");
    }
    return i;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

inline std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) {
      out.push_back("");
      continue;
    }
    const auto b = item.find_last_not_of(" \t");
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

}  // namespace detail

// The single authority over configuration keys. Throws ConfigError on an
// unknown key or a malformed value.
inline void apply_override(Scenario& s, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  if (key == "duration") s.duration = parse_double(key, value);
  else if (key == "dt") s.dt = parse_double(key, value);
  else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "sampling") s.sampling = parse_bool(key, value);
  else if (key == "protocols") {
    std::vector<Protocol> protos;
    for (const auto& name : detail::split_csv(value)) {
      const auto p = protocol_from_name(name);
      if (!p) {
        throw ConfigError("unknown protocol '" + name + "' (valid: " +
                          valid_protocol_names() + ")");
      }
      protos.push_back(*p);
    }
    s.protocols = std::move(protos);
  } else if (key == "n_vehicles") s.mobility.n_vehicles = static_cast<int>(parse_int(key, value));
  else if (key == "road_length") s.mobility.road_length = parse_double(key, value);
  else if (key == "v_min") s.mobility.v_min = parse_double(key, value);
  else if (key == "v_max") s.mobility.v_max = parse_double(key, value);
  else if (key == "placement") {
    if (value == "uniform-random") s.mobility.placement = Placement::UniformRandom;
    else if (value == "equally-spaced") s.mobility.placement = Placement::EquallySpaced;
    else if (value == "clustered") s.mobility.placement = Placement::Clustered;
    else {
      throw ConfigError("key 'placement': expected uniform-random, equally-spaced or clustered");
    }
  } else if (key == "cluster_count") {
    s.mobility.cluster_count = static_cast<int>(parse_int(key, value));
  } else if (key == "cluster_span") s.mobility.cluster_span = parse_double(key, value);
  else if (key == "trace") s.trace_path = value;
  else if (key == "ring") s.ring = parse_bool(key, value);
  else if (key == "seg_len") s.seg_len = parse_double(key, value);
  else if (key == "beacon_rate") s.beacon.rate = parse_double(key, value);
  else if (key == "beacon_lifetime") s.beacon.lifetime = parse_double(key, value);
  else if (key == "beacon_bytes") s.beacon.payload_bytes = static_cast<int>(parse_int(key, value));
  else if (key == "channel_model") {
    if (value == "ideal") s.channel.model = ChannelModel::Ideal;
    else if (value == "load-degraded") s.channel.model = ChannelModel::LoadDegraded;
    else throw ConfigError("key 'channel_model': expected ideal or load-degraded");
  } else if (key == "r_tx") s.channel.r_tx = parse_double(key, value);
  else if (key == "beta") s.channel.beta = parse_double(key, value);
  else if (key == "load_sat") s.channel.load_sat = parse_double(key, value);
  else if (key == "min_range_fraction") s.channel.min_range_fraction = parse_double(key, value);
  else if (key == "p_loss") s.channel.p_loss = parse_double(key, value);
  else if (key == "load_window") s.channel.load_window = parse_double(key, value);
  else if (key == "delta_t") s.params.delta_t = parse_double(key, value);
  else if (key == "tau_stale") s.params.tau_stale = parse_double(key, value);
  else if (key == "n_period") s.params.n_period = static_cast<int>(parse_int(key, value));
  else if (key == "k") s.params.k = static_cast<int>(parse_int(key, value));
  else if (key == "piggy_lifetime") s.params.piggy_lifetime = parse_double(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

inline const std::vector<std::string>& config_sections() {
  static const std::vector<std::string> sections = {"run",     "mobility", "grid",
                                                    "beacon",  "channel",  "protocol"};
  return sections;
}

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

// Parses the file into ordered entries; keys are validated when applied.
inline std::vector<ConfigEntry> parse_config(std::istream& in) {
  std::vector<ConfigEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const auto a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
      continue;
    }
    const auto b = line.find_last_not_of(" \t\r");
    const std::string body = line.substr(a, b - a + 1);
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      const std::string section = body.substr(1, body.size() - 2);
      bool known = false;
      for (const auto& s : config_sections()) {
        if (s == section) {
          known = true;
          break;
        }
      }
      if (!known) {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section +
                          "]");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = body.substr(0, eq);
    std::string value = body.substr(eq + 1);
    const auto ka = key.find_first_not_of(" \t");
    const auto kb = key.find_last_not_of(" \t");
    if (ka == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    key = key.substr(ka, kb - ka + 1);
    const auto va = value.find_first_not_of(" \t");
    value = va == std::string::npos ? "" : value.substr(va, value.find_last_not_of(" \t") - va + 1);
    entries.push_back({key, value, line_no});
  }
  return entries;
}

inline std::vector<ConfigEntry> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  return parse_config(in);
}

// Defaults -> config file -> explicit overrides, in that precedence order.
inline Scenario build_scenario(const std::optional<std::string>& config_path,
                               const std::vector<std::pair<std::string, std::string>>& overrides) {
  Scenario s;
  if (config_path) {
    for (const auto& entry : parse_config_file(*config_path)) {
      try {
        apply_override(s, entry.key, entry.value);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (line " + std::to_string(entry.line) + ")");
      }
    }
  }
  for (const auto& [key, value] : overrides) {
    apply_override(s, key, value);
  }
  const auto errs = scenario_errors(s);
  if (!errs.empty()) {
    std::ostringstream msg;
    for (std::size_t i = 0; i < errs.size(); ++i) {
      msg << (i > 0 ? "; " : "") << errs[i];
    }
    throw ConfigError(msg.str());
  }
  return s;
}

}  // namespace eldes
