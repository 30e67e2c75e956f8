#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <vector>

#include "eldes/core.hpp"
#include "eldes/rng.hpp"

using namespace eldes;

namespace {

// Independent interval-intersection oracle: classify every segment against
// [pos-r, pos+r] by checking the three shifted copies of the segment.
std::pair<std::vector<SegmentId>, std::vector<SegmentId>> brute_segments(RoadPos pos, double r,
                                                                         const SegmentGrid& g) {
  std::vector<SegmentId> full, partial;
  const double lo = pos - r;
  const double hi = pos + r;
  for (SegmentId i = 0; i < g.segment_count; ++i) {
    const double a = i * g.segment_length;
    const double b = a + g.segment_length;
    double overlap = 0.0;
    bool contained = false;
    for (int k = -1; k <= 1; ++k) {
      const double aa = a + k * g.road_length;
      const double bb = b + k * g.road_length;
      overlap = std::max(overlap, std::min(bb, hi) - std::max(aa, lo));
      if (aa >= lo && bb <= hi) {
        contained = true;
      }
    }
    if (contained) {
      full.push_back(i);
    } else if (overlap > 0.0) {
      partial.push_back(i);
    }
  }
  return {full, partial};
}

long long brute_neighbors(const std::vector<VehicleState>& fleet, std::size_t self, double r,
                          double road) {
  long long n = 0;
  for (std::size_t j = 0; j < fleet.size(); ++j) {
    if (j == self) continue;
    const double d = std::abs(fleet[j].pos - fleet[self].pos);
    if (std::min(d, road - d) <= r) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("ring_distance basics") {
  CHECK(ring_distance(100, 100, 5000) == 0.0);
  CHECK(ring_distance(0, 4900, 5000) == 100.0);
  CHECK(ring_distance(1000, 3500, 5000) == 2500.0);
  CHECK(ring_distance(4900, 0, 5000) == 100.0);  // symmetric
}

TEST_CASE("ring_distance triangle inequality on a coarse grid") {
  const double road = 1000.0;
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 20; ++b) {
      for (int c = 0; c < 20; ++c) {
        const double pa = a * 50.0, pb = b * 50.0, pc = c * 50.0;
        CHECK(ring_distance(pa, pc, road) <=
              ring_distance(pa, pb, road) + ring_distance(pb, pc, road) + 1e-12);
      }
    }
  }
}

TEST_CASE("make_grid validation") {
  CHECK_THROWS_AS(make_grid(0.0, 5000.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(300.0, 5000.0), std::invalid_argument);  // not a multiple
  const auto g = make_grid(100.0, 5000.0);
  CHECK(g.segment_count == 50);
}

TEST_CASE("segment index and center") {
  const auto g = make_grid(100.0, 5000.0);
  CHECK(segment_index(0.0, g) == 0);
  CHECK(segment_index(250.0, g) == 2);
  CHECK(segment_index(4999.9, g) == 49);
  CHECK(segment_center(0, g) == 50.0);
  CHECK(segment_center(2, g) == 250.0);
  CHECK(segment_center(49, g) == 4950.0);
}

TEST_CASE("segment_center of segment_index stays within half a segment") {
  const auto g = make_grid(100.0, 5000.0);
  Rng rng(7, "core-prop");
  for (int i = 0; i < 500; ++i) {
    const double x = rng.uniform(0.0, g.road_length);
    CHECK(std::abs(segment_center(segment_index(x, g), g) - x) <= g.segment_length / 2.0);
  }
}

TEST_CASE("segments_in_range worked cases") {
  const auto g = make_grid(100.0, 5000.0);
  const auto a = segments_in_range(550.0, 100.0, g);
  CHECK(a.full == std::vector<SegmentId>{5});
  CHECK(a.partial == std::vector<SegmentId>{4, 6});

  const auto b = segments_in_range(50.0, 50.0, g);
  CHECK(b.full == std::vector<SegmentId>{0});
  CHECK(b.partial.empty());

  const auto c = segments_in_range(0.0, 150.0, g);
  CHECK(c.full == std::vector<SegmentId>{49, 0});
  CHECK(c.partial == std::vector<SegmentId>{48, 1});
}

TEST_CASE("segments_in_range matches the brute-force oracle") {
  const auto g = make_grid(100.0, 5000.0);
  Rng rng(11, "segments-prop");
  for (int i = 0; i < 300; ++i) {
    const double pos = rng.uniform(0.0, g.road_length);
    const double r = rng.uniform(1.0, g.road_length / 2.0 - 1.0);
    auto got = segments_in_range(pos, r, g);
    auto [want_full, want_partial] = brute_segments(pos, r, g);
    std::sort(got.full.begin(), got.full.end());
    std::sort(got.partial.begin(), got.partial.end());
    REQUIRE(got.full == want_full);
    REQUIRE(got.partial == want_partial);
  }
}

TEST_CASE("true_neighbor_count basics") {
  const auto g = make_grid(100.0, 5000.0);
  std::vector<VehicleState> solo = {{0, 100.0, 0.0, 0.0}};
  CHECK(true_neighbor_count(solo, 0, 1000.0, g) == 0);

  std::vector<VehicleState> three = {{0, 0.0, 0.0, 0.0}, {1, 500.0, 0.0, 0.0},
                                     {2, 2000.0, 0.0, 0.0}};
  CHECK(true_neighbor_count(three, 0, 1000.0, g) == 1);
  CHECK_THROWS_AS(true_neighbor_count(three, 9, 1000.0, g), std::invalid_argument);
}

TEST_CASE("true_neighbor_count equals brute force for a uniform fleet") {
  const auto g = make_grid(100.0, 5000.0);
  Rng rng(42, "placement");
  std::vector<VehicleState> fleet(160);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    fleet[i] = {static_cast<VehicleId>(i), rng.uniform(0.0, 5000.0), 0.0, 0.0};
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const long long got = true_neighbor_count(fleet, static_cast<VehicleId>(i), 1000.0, g);
    CHECK(got == brute_neighbors(fleet, i, 1000.0, 5000.0));
    mean += static_cast<double>(got);
  }
  mean /= static_cast<double>(fleet.size());
  // expectation 2r/road * (n-1) = 63.6 for uniform placement
  CHECK(mean > 55.0);
  CHECK(mean < 72.0);
}

TEST_CASE("true_neighbor_count is symmetric") {
  const auto g = make_grid(100.0, 5000.0);
  Rng rng(3, "sym");
  std::vector<VehicleState> fleet(40);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    fleet[i] = {static_cast<VehicleId>(i), rng.uniform(0.0, 5000.0), 0.0, 0.0};
  }
  const double r = 800.0;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    for (std::size_t j = i + 1; j < fleet.size(); ++j) {
      const bool i_sees_j = ring_distance(fleet[i].pos, fleet[j].pos, 5000.0) <= r;
      const bool j_sees_i = ring_distance(fleet[j].pos, fleet[i].pos, 5000.0) <= r;
      CHECK(i_sees_j == j_sees_i);
    }
  }
}

TEST_CASE("open strip distance and segments clamp at the ends") {
  const auto g = make_grid(100.0, 5000.0, /*ring=*/false);
  CHECK(distance(0.0, 4900.0, g) == 4900.0);
  const auto s = segments_in_range(50.0, 200.0, g);
  // interval clamps to [0, 250]
  CHECK(s.full == std::vector<SegmentId>{0, 1});
  CHECK(s.partial == std::vector<SegmentId>{2});
}
