// Command-line front end: run / compare / sweep over the simulator library.

#include <array>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eldes/cli.hpp"

namespace {

constexpr std::array kConfigKeys = {
    "duration",       "dt",           "seed",         "sampling",      "protocols",
    "n_vehicles",     "road_length",  "v_min",        "v_max",         "placement",
    "cluster_count",  "cluster_span", "trace",        "ring",          "seg_len",
    "beacon_rate",    "beacon_lifetime", "beacon_bytes", "channel_model", "r_tx",
    "beta",           "load_sat",     "min_range_fraction", "p_loss",  "load_window",
    "delta_t",        "tau_stale",    "n_period",     "k",             "piggy_lifetime",
};

// One --<key> string option per config key; anything supplied becomes an
// override with precedence over the config file.
struct OverrideFlags {
  std::array<std::string, kConfigKeys.size()> values;
  std::array<CLI::Option*, kConfigKeys.size()> options{};

  void attach(CLI::App* cmd) {
    for (std::size_t i = 0; i < kConfigKeys.size(); ++i) {
      options[i] = cmd->add_option(std::string("--") + kConfigKeys[i], values[i],
                                   std::string("override config key ") + kConfigKeys[i]);
    }
  }

  std::vector<std::pair<std::string, std::string>> collect() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < kConfigKeys.size(); ++i) {
      if (options[i] != nullptr && options[i]->count() > 0) {
        out.emplace_back(kConfigKeys[i], values[i]);
      }
    }
    return out;
  }
};

std::vector<std::uint64_t> make_seeds(const std::string& seeds_csv, unsigned num_seeds,
                                      std::uint64_t first_seed) {
  std::vector<std::uint64_t> seeds;
  if (!seeds_csv.empty()) {
    for (const auto& item : eldes::detail::split_csv(seeds_csv)) {
      seeds.push_back(std::stoull(item));
    }
    return seeds;
  }
  for (unsigned i = 0; i < num_seeds; ++i) {
    seeds.push_back(first_seed + i);
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local vehicle-density estimation simulator (eldes / dvde / dfpav)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config,-c", config_path,
                    "config file (key = value with [section] headers)");
    cmd->add_option("--out,-o", out_dir, "output directory for CSV files")
        ->capture_default_str();
  };

  auto* run_cmd = app.add_subcommand("run", "execute one scenario, write summary.csv and samples.csv");
  add_common(run_cmd);
  OverrideFlags run_flags;
  run_flags.attach(run_cmd);

  auto* compare_cmd =
      app.add_subcommand("compare", "run several protocols over a batch of seeds and compare");
  add_common(compare_cmd);
  OverrideFlags compare_flags;
  compare_flags.attach(compare_cmd);
  std::vector<std::string> compare_protocols;
  std::string compare_seeds_csv;
  unsigned compare_num_seeds = 10;
  std::uint64_t compare_first_seed = 1;
  compare_cmd->add_option("protocol", compare_protocols,
                          "protocols to compare (default: eldes dvde dfpav)");
  compare_cmd->add_option("--seeds", compare_seeds_csv, "explicit seed list, e.g. 1,2,3");
  compare_cmd->add_option("--num-seeds", compare_num_seeds, "number of consecutive seeds")
      ->capture_default_str();
  compare_cmd->add_option("--first-seed", compare_first_seed, "first seed of the batch")
      ->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid, write sweep.csv");
  add_common(sweep_cmd);
  OverrideFlags sweep_flags;
  sweep_flags.attach(sweep_cmd);
  std::vector<std::string> grid_specs;
  std::string sweep_seeds_csv;
  unsigned sweep_num_seeds = 10;
  std::uint64_t sweep_first_seed = 1;
  sweep_cmd->add_option("--grid,-g", grid_specs, "grid spec key=v1,v2,... (repeatable)");
  sweep_cmd->add_option("--seeds", sweep_seeds_csv, "explicit seed list, e.g. 1,2,3");
  sweep_cmd->add_option("--num-seeds", sweep_num_seeds, "number of consecutive seeds")
      ->capture_default_str();
  sweep_cmd->add_option("--first-seed", sweep_first_seed, "first seed of the batch")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? eldes::kExitOk : eldes::kExitConfig;
  }

  const auto config =
      config_path.empty() ? std::optional<std::string>() : std::optional<std::string>(config_path);

  try {
    if (run_cmd->parsed()) {
      eldes::RunArgs args;
      args.config = config;
      args.out_dir = out_dir;
      args.overrides = run_flags.collect();
      return eldes::cmd_run(args);
    }
    if (compare_cmd->parsed()) {
      eldes::CompareArgs args;
      args.config = config;
      args.out_dir = out_dir;
      args.overrides = compare_flags.collect();
      args.protocols = compare_protocols;
      args.seeds = make_seeds(compare_seeds_csv, compare_num_seeds, compare_first_seed);
      return eldes::cmd_compare(args);
    }
    eldes::SweepArgs args;
    args.config = config;
    args.out_dir = out_dir;
    args.overrides = sweep_flags.collect();
    args.grid_specs = grid_specs;
    args.seeds = make_seeds(sweep_seeds_csv, sweep_num_seeds, sweep_first_seed);
    return eldes::cmd_sweep(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return eldes::kExitRuntime;
  }
}
