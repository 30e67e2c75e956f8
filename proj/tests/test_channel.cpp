#include <catch2/catch_amalgamated.hpp>

#include "eldes/channel.hpp"
#include "eldes/rng.hpp"

using namespace eldes;

namespace {

ChannelConfig degraded() {
  ChannelConfig cfg;
  cfg.model = ChannelModel::LoadDegraded;
  return cfg;
}

void saturate(LoadTracker& t, double now, double load_sat, double window) {
  const int n = static_cast<int>(load_sat * window) + 10;
  for (int i = 0; i < n; ++i) {
    t.record(now - window * 0.5);
  }
}

}  // namespace

TEST_CASE("sensed load rates") {
  LoadTracker t;
  CHECK(t.sensed_rate(5.0, 1.0) == 0.0);

  LoadTracker t2;
  for (int i = 0; i < 100; ++i) {
    t2.record(4.001 + i * 0.009);
  }
  CHECK(t2.sensed_rate(5.0, 1.0) == 100.0);

  LoadTracker t3;
  for (int i = 0; i < 50; ++i) {
    t3.record(4.8);
  }
  CHECK(t3.sensed_rate(5.0, 0.5) == 100.0);
}

TEST_CASE("window boundary is half open") {
  LoadTracker t;
  t.record(4.0);   // exactly window old at t=5: excluded
  t.record(4.5);
  t.record(5.0);   // at the query instant: included
  CHECK(t.sensed_rate(5.0, 1.0) == 2.0);
}

TEST_CASE("comm_range endpoints") {
  ChannelConfig ideal;
  ideal.model = ChannelModel::Ideal;
  CHECK(comm_range(ideal, 0.0) == 1000.0);
  CHECK(comm_range(ideal, 1e9) == 1000.0);

  const auto cfg = degraded();
  CHECK(comm_range(cfg, 0.0) == 1000.0);
  CHECK(comm_range(cfg, cfg.load_sat) == Catch::Approx(100.0));
  CHECK(comm_range(cfg, 10.0 * cfg.load_sat) == Catch::Approx(100.0));
}

TEST_CASE("comm_range is monotone non-increasing and bounded") {
  const auto cfg = degraded();
  Rng rng(17, "loads");
  for (int i = 0; i < 500; ++i) {
    double a = rng.uniform(0.0, 2.0 * cfg.load_sat);
    double b = rng.uniform(0.0, 2.0 * cfg.load_sat);
    if (a > b) std::swap(a, b);
    const double ra = comm_range(cfg, a);
    const double rb = comm_range(cfg, b);
    CHECK(ra >= rb);
    CHECK(rb >= cfg.min_range_fraction * cfg.r_tx);
    CHECK(ra <= cfg.r_tx);
  }
}

TEST_CASE("deliver: isolated transmitter reaches nobody") {
  const auto g = make_grid(100.0, 5000.0);
  std::vector<VehicleState> fleet = {{0, 100.0, 0.0, 0.0}};
  std::vector<LoadTracker> trackers(1);
  const auto decoded = deliver(fleet, 0, degraded(), trackers, 0.0, g);
  CHECK(decoded.empty());
  CHECK(trackers[0].event_count() == 1);  // carrier-senses its own message
}

TEST_CASE("deliver: receiver just inside r_tx decodes on an unloaded channel") {
  const auto g = make_grid(100.0, 5000.0);
  std::vector<VehicleState> fleet = {{0, 0.0, 0.0, 0.0}, {1, 999.0, 0.0, 0.0}};
  std::vector<LoadTracker> trackers(2);
  const auto decoded = deliver(fleet, 0, degraded(), trackers, 0.0, g);
  REQUIRE(decoded.size() == 1);
  CHECK(decoded[0] == 1);
}

TEST_CASE("deliver: saturated receiver misses but still senses the load") {
  const auto g = make_grid(100.0, 5000.0);
  const auto cfg = degraded();
  std::vector<VehicleState> fleet = {{0, 0.0, 0.0, 0.0}, {1, 500.0, 0.0, 0.0}};
  std::vector<LoadTracker> trackers(2);
  saturate(trackers[1], 10.0, cfg.load_sat, cfg.load_window);
  const auto before = trackers[1].event_count();
  const auto decoded = deliver(fleet, 0, cfg, trackers, 10.0, g);
  CHECK(decoded.empty());  // 500 m > the 100 m saturated range
  CHECK(trackers[1].event_count() == before + 1);
}

TEST_CASE("load-degraded links can be asymmetric") {
  const auto g = make_grid(100.0, 5000.0);
  const auto cfg = degraded();
  std::vector<VehicleState> fleet = {{0, 0.0, 0.0, 0.0}, {1, 500.0, 0.0, 0.0}};
  std::vector<LoadTracker> trackers(2);
  saturate(trackers[1], 10.0, cfg.load_sat, cfg.load_window);

  const auto from_0 = deliver(fleet, 0, cfg, trackers, 10.0, g);
  CHECK(from_0.empty());  // 1 is deafened by its local load
  const auto from_1 = deliver(fleet, 1, cfg, trackers, 10.0, g);
  REQUIRE(from_1.size() == 1);  // 0 hears fine
  CHECK(from_1[0] == 0);
}

TEST_CASE("ideal channel decodes exactly the true r_tx neighbor set") {
  const auto g = make_grid(100.0, 5000.0);
  ChannelConfig cfg;
  cfg.model = ChannelModel::Ideal;
  Rng rng(23, "fleet");
  std::vector<VehicleState> fleet(50);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    fleet[i] = {static_cast<VehicleId>(i), rng.uniform(0.0, 5000.0), 0.0, 0.0};
  }
  std::vector<LoadTracker> trackers(fleet.size());
  for (std::size_t tx = 0; tx < fleet.size(); ++tx) {
    const auto decoded = deliver(fleet, static_cast<VehicleId>(tx), cfg, trackers, 1.0, g);
    std::vector<VehicleId> want;
    for (std::size_t w = 0; w < fleet.size(); ++w) {
      if (w != tx && ring_distance(fleet[w].pos, fleet[tx].pos, 5000.0) <= cfg.r_tx) {
        want.push_back(static_cast<VehicleId>(w));
      }
    }
    CHECK(decoded == want);
  }
}

TEST_CASE("per-packet loss removes receivers deterministically per seed") {
  const auto g = make_grid(100.0, 5000.0);
  ChannelConfig cfg;
  cfg.model = ChannelModel::Ideal;
  cfg.p_loss = 0.5;
  std::vector<VehicleState> fleet(20);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    fleet[i] = {static_cast<VehicleId>(i), static_cast<double>(i) * 40.0, 0.0, 0.0};
  }
  const auto run_once = [&] {
    Rng loss(99, "loss");
    std::vector<LoadTracker> trackers(fleet.size());
    return deliver(fleet, 0, cfg, trackers, 0.0, g,
                   [&](VehicleId) { return loss.next_double() >= cfg.p_loss; });
  };
  const auto a = run_once();
  const auto b = run_once();
  CHECK(a == b);
  CHECK(a.size() < 19);  // some packets are lost at p=0.5
}
