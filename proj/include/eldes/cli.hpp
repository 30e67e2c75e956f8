#pragma once

// Subcommand implementations behind the command-line tool. Exit codes:
// 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eldes/config.hpp"
#include "eldes/csv.hpp"
#include "eldes/sim.hpp"

namespace eldes {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::optional<std::string> config;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string out_dir = "out";
};

struct RunArgs : CommonArgs {};

struct CompareArgs : CommonArgs {
  std::vector<std::string> protocols;  // empty: all three
  std::vector<std::uint64_t> seeds;    // empty: 1..10
};

struct SweepArgs : CommonArgs {
  std::vector<std::string> grid_specs;  // "key=v1,v2,..."
  std::vector<std::uint64_t> seeds;     // empty: 1..10
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << content;
}

inline std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    seeds.push_back(s);
  }
  return seeds;
}

}  // namespace detail

inline int cmd_run(const RunArgs& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  RunReport report;
  try {
    const Scenario scenario = build_scenario(args.config, args.overrides);
    report = run(scenario);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  try {
    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    const RunReport reports[] = {report};
    detail::write_file(dir / "summary.csv", summary_csv(reports));
    detail::write_file(dir / "samples.csv", samples_csv(reports));
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  out << text_table(split_header(summary_csv_header()), summary_cells(report));
  out << "mean RN " << fmt_f6(report.mean_rn) << ", wrote " << args.out_dir
      << "/summary.csv and " << args.out_dir << "/samples.csv\n";
  return kExitOk;
}

inline int cmd_compare(const CompareArgs& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  std::vector<RunReport> reports;
  try {
    std::vector<Protocol> protocols;
    if (args.protocols.empty()) {
      protocols = {Protocol::Eldes, Protocol::Dvde, Protocol::Dfpav};
    } else {
      for (const auto& name : args.protocols) {
        const auto p = protocol_from_name(name);
        if (!p) {
          throw ConfigError("unknown protocol '" + name + "' (valid: " +
                            valid_protocol_names() + ")");
        }
        protocols.push_back(*p);
      }
    }
    if (protocols.size() < 2) {
      throw ConfigError("compare needs at least 2 protocols");
    }
    const auto seeds = args.seeds.empty() ? detail::default_seeds() : args.seeds;
    Scenario base = build_scenario(args.config, args.overrides);
    base.protocols = protocols;
    const auto errs = scenario_errors(base);
    if (!errs.empty()) {
      throw ConfigError(errs.front());
    }
    reports.reserve(seeds.size());
    for (const std::uint64_t seed : seeds) {
      Scenario s = base;
      s.seed = seed;
      reports.push_back(run(s));
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  try {
    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "compare.csv", compare_csv(reports));
    detail::write_file(dir / "compare_seeds.csv", summary_csv(reports));
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  out << text_table(split_header(compare_csv_header()), compare_cells(reports));
  out << "wrote " << args.out_dir << "/compare.csv and " << args.out_dir
      << "/compare_seeds.csv\n";
  return kExitOk;
}

// Grid specs look like "delta_t=0.5,1.0,2.0"; repeated flags sweep several keys.
inline std::vector<std::pair<std::string, std::vector<std::string>>> parse_grid_specs(
    const std::vector<std::string>& specs) {
  std::vector<std::pair<std::string, std::vector<std::string>>> grid;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("malformed grid spec '" + spec + "' (expected key=v1,v2,...)");
    }
    const std::string key = spec.substr(0, eq);
    const auto values = detail::split_csv(spec.substr(eq + 1));
    if (values.empty() || values.front().empty()) {
      throw ConfigError("grid spec '" + spec + "' has no values");
    }
    grid.emplace_back(key, values);
  }
  if (grid.empty()) {
    throw ConfigError("empty sweep grid (pass at least one --grid key=v1,v2,...)");
  }
  return grid;
}

inline int cmd_sweep(const SweepArgs& args, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  std::vector<SweepCellResult> cells;
  try {
    const auto grid = parse_grid_specs(args.grid_specs);
    const auto seeds = args.seeds.empty() ? detail::default_seeds() : args.seeds;
    const Scenario base = build_scenario(args.config, args.overrides);
    cells = sweep(base, grid, seeds,
                  [](Scenario& s, const std::string& k, const std::string& v) {
                    apply_override(s, k, v);
                  });
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  std::string csv = sweep_csv_header();
  csv += '\n';
  std::size_t failed = 0;
  for (const auto& cell : cells) {
    if (cell.report) {
      append_sweep_rows(csv, *cell.report);
    } else {
      ++failed;
      err << "sweep cell failed (seed " << cell.seed;
      for (const auto& [k, v] : cell.overrides) {
        err << ", " << k << "=" << v;
      }
      err << "): " << cell.error << '\n';
    }
  }
  try {
    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "sweep.csv", csv);
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  out << "wrote " << args.out_dir << "/sweep.csv (" << (cells.size() - failed) << " of "
      << cells.size() << " cells)\n";
  if (failed == cells.size()) {
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace eldes
