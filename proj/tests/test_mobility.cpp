#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "eldes/mobility.hpp"

using namespace eldes;

TEST_CASE("equally spaced placement") {
  SyntheticMobilityConfig cfg;
  cfg.placement = Placement::EquallySpaced;
  Rng p(1, "placement"), v(1, "velocity");

  cfg.n_vehicles = 1;
  auto one = init_synthetic(cfg, p, v);
  REQUIRE(one.size() == 1);
  CHECK(one[0].pos == 0.0);

  cfg.n_vehicles = 4;
  Rng p2(1, "placement"), v2(1, "velocity");
  auto four = init_synthetic(cfg, p2, v2);
  REQUIRE(four.size() == 4);
  CHECK(four[0].pos == 0.0);
  CHECK(four[1].pos == 1250.0);
  CHECK(four[2].pos == 2500.0);
  CHECK(four[3].pos == 3750.0);
}

TEST_CASE("uniform placement is deterministic per seed") {
  SyntheticMobilityConfig cfg;
  Rng pa(42, "placement"), va(42, "velocity");
  Rng pb(42, "placement"), vb(42, "velocity");
  const auto a = init_synthetic(cfg, pa, va);
  const auto b = init_synthetic(cfg, pb, vb);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].pos == b[i].pos);
    CHECK(a[i].velocity == b[i].velocity);
    CHECK(a[i].velocity >= cfg.v_min);
    CHECK(a[i].velocity <= cfg.v_max);
  }
}

TEST_CASE("clustered placement keeps vehicles near cluster centers") {
  SyntheticMobilityConfig cfg;
  cfg.placement = Placement::Clustered;
  cfg.cluster_count = 4;
  cfg.cluster_span = 200.0;
  cfg.n_vehicles = 40;
  Rng p(5, "placement"), v(5, "velocity");
  const auto fleet = init_synthetic(cfg, p, v);
  for (const auto& veh : fleet) {
    double best = 1e18;
    for (int c = 0; c < cfg.cluster_count; ++c) {
      const double center = cfg.road_length * c / cfg.cluster_count;
      best = std::min(best, ring_distance(veh.pos, center, cfg.road_length));
    }
    CHECK(best <= cfg.cluster_span / 2.0 + 1e-9);
  }
}

TEST_CASE("invalid mobility config rejected") {
  SyntheticMobilityConfig cfg;
  cfg.n_vehicles = 0;
  Rng p(1, "placement"), v(1, "velocity");
  CHECK_THROWS_AS(init_synthetic(cfg, p, v), std::invalid_argument);
}

TEST_CASE("step wraps positions") {
  std::vector<VehicleState> fleet = {{0, 4990.0, 30.0, 0.0},
                                     {1, 4999.0, 30.0, 0.0},
                                     {2, 1234.0, 0.0, 0.0}};
  step_fleet(fleet, 0.1, 5000.0);
  CHECK(fleet[0].pos == Catch::Approx(4993.0));
  CHECK(fleet[1].pos == Catch::Approx(2.0));
  CHECK(fleet[2].pos == 1234.0);
}

TEST_CASE("step accumulates without drift over 1000 ticks") {
  Rng rng(9, "steps");
  for (int trial = 0; trial < 5; ++trial) {
    const double x0 = rng.uniform(0.0, 5000.0);
    const double v = rng.uniform(-30.0, 30.0);
    std::vector<VehicleState> fleet = {{0, x0, v, 0.0}};
    const int k = 1000;
    const double dt = 0.1;
    for (int i = 0; i < k; ++i) {
      step_fleet(fleet, dt, 5000.0);
    }
    const double want = wrap_pos(x0 + v * k * dt, 5000.0);
    CHECK(ring_distance(fleet[0].pos, want, 5000.0) < 1e-6);
  }
}

TEST_CASE("step preserves ids and size") {
  Rng p(4, "placement"), v(4, "velocity");
  SyntheticMobilityConfig cfg;
  cfg.n_vehicles = 12;
  auto fleet = init_synthetic(cfg, p, v);
  step_fleet(fleet, 0.1, cfg.road_length);
  REQUIRE(fleet.size() == 12);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    CHECK(fleet[i].id == i);
  }
}

TEST_CASE("trace parsing") {
  SECTION("empty file") {
    std::istringstream in("");
    const auto sched = load_trace(in);
    CHECK(sched.vehicle_count() == 0);
  }
  SECTION("two samples for one vehicle") {
    std::istringstream in("0.0,0,100.0\n0.1,0,103.0\n");
    const auto sched = load_trace(in);
    REQUIRE(sched.vehicle_count() == 1);
    REQUIRE(sched.samples[0].size() == 2);
    CHECK(sched.samples[0][1].pos == 103.0);
  }
  SECTION("comments and blanks are skipped") {
    std::istringstream in("# header\n\n0.0,7,10.0  # tail comment\n1.0,7,20.0\n");
    const auto sched = load_trace(in);
    REQUIRE(sched.vehicle_count() == 1);
    CHECK(sched.source_ids[0] == 7);
  }
  SECTION("time going backwards names the line") {
    std::istringstream in("0.0,0,100.0\n0.5,0,110.0\n0.4,0,111.0\n");
    CHECK_THROWS_WITH(load_trace(in), Catch::Matchers::ContainsSubstring("line 3"));
  }
  SECTION("malformed line names the line") {
    std::istringstream in("0.0,0,100.0\nnot-a-row\n");
    CHECK_THROWS_WITH(load_trace(in), Catch::Matchers::ContainsSubstring("line 2"));
  }
  SECTION("vehicles numbered by first appearance") {
    std::istringstream in("0.0,50,1.0\n0.0,10,2.0\n1.0,50,3.0\n1.0,10,4.0\n");
    const auto sched = load_trace(in);
    REQUIRE(sched.vehicle_count() == 2);
    CHECK(sched.source_ids[0] == 50);
    CHECK(sched.source_ids[1] == 10);
  }
}

TEST_CASE("trace interpolation") {
  std::istringstream in("0,0,100\n1,0,130\n");
  const auto sched = load_trace(in);
  CHECK(trace_position_at(sched, 0, 0.0) == 100.0);
  CHECK(trace_position_at(sched, 0, 0.5) == Catch::Approx(115.0));
  CHECK(trace_position_at(sched, 0, 1.0) == 130.0);
  CHECK_THROWS_AS(trace_position_at(sched, 0, 2.0), std::out_of_range);
  CHECK(trace_state_at(sched, 0, 0.25).velocity == Catch::Approx(30.0));
}

TEST_CASE("trace round trip reproduces sample values exactly") {
  std::ostringstream file;
  Rng rng(13, "trace");
  std::vector<std::vector<std::pair<double, double>>> data(3);
  for (int v = 0; v < 3; ++v) {
    double t = 0.0;
    double x = rng.uniform(0.0, 4000.0);
    for (int i = 0; i < 20; ++i) {
      data[v].push_back({t, x});
      file << t << "," << v << "," << x << "\n";
      t += 0.5;
      x += rng.uniform(-20.0, 20.0);
    }
  }
  std::istringstream in(file.str());
  const auto sched = load_trace(in);
  for (int v = 0; v < 3; ++v) {
    for (const auto& [t, x] : data[v]) {
      CHECK(trace_position_at(sched, static_cast<VehicleId>(v), t) == Catch::Approx(x));
    }
  }
}
