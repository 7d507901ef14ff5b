#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "martcalc/dyadic_geometry.hpp"
#include "martcalc/verify.hpp"

using namespace martcalc;

namespace {

QuasiMetricSpace uniform_line(int n) {
  std::vector<std::array<double, 2>> coords;
  for (int i = 0; i < n; ++i) coords.push_back({i / static_cast<double>(n), 0.0});
  return QuasiMetricSpace::from_coordinates(
      coords, 1, std::vector<double>(n, 1.0 / n), 1.0);
}

// Independent covering scan for one shifted-grid family in 1-d: for each
// level and base shift, locate the cut-free interval around the ball.
double oracle_min_cover_length(double lo, double hi, int depth) {
  double best = std::numeric_limits<double>::infinity();
  for (double omega : {0.0, 1.0 / 3.0, 2.0 / 3.0}) {
    for (int k = -2; k <= depth; ++k) {
      const double len = std::ldexp(1.0, -k);
      double shift;
      if (omega == 0.0) {
        shift = 0.0;
      } else if (k >= 0) {
        const int a = omega < 0.5 ? 1 : 2;
        shift = static_cast<double>(((k % 2 == 0 ? 1 : 2) * a) % 3) / 3.0;
      } else {
        const int a = omega < 0.5 ? 1 : 2;
        shift = a / (3.0 * std::ldexp(1.0, -k));
      }
      const double cell_lo = (std::floor(lo / len - shift) + shift) * len;
      if (hi < cell_lo + len) best = std::min(best, len);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("metric space validation") {
  CHECK_THROWS(QuasiMetricSpace::from_matrix({{0, 0}, {0, 0}}, {1, 1}, 1.0));
  CHECK_THROWS(QuasiMetricSpace::from_matrix({{0, 1}, {2, 0}}, {1, 1}, 1.0));
  CHECK_THROWS(QuasiMetricSpace::from_matrix({{0, 1}, {1, 0}}, {1, -1}, 1.0));
  const auto space = QuasiMetricSpace::from_matrix({{0, 1}, {1, 0}}, {1, 1}, 1.0);
  CHECK(space.ball(0, 0.5) == std::vector<int>{0});
  CHECK(space.ball(0, 1.5) == std::vector<int>{0, 1});
  CHECK(space.ball_mass(0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("constant estimation on a true metric line") {
  std::vector<std::array<double, 2>> coords = {
      {0, 0}, {1, 0}, {2, 0}, {3, 0}};
  const auto space = QuasiMetricSpace::from_coordinates(
      coords, 1, std::vector<double>(4, 1.0), 1.0);
  const auto est = estimate_constants(space);
  CHECK(est.a0 == doctest::Approx(1.0));
  CHECK(est.a1 >= 1);
}

TEST_CASE("constant estimation on the discrete metric") {
  const int n = 5;
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 1.0));
  for (int i = 0; i < n; ++i) dist[i][i] = 0.0;
  const auto space = QuasiMetricSpace::from_matrix(
      dist, std::vector<double>(n, 1.0), 1.0);
  const auto est = estimate_constants(space);
  CHECK(est.a0 == doctest::Approx(1.0));
  // Every radius above 1 captures the whole space.
  CHECK(space.ball(0, 1.0 + 1e-9).size() == n);
}

TEST_CASE("doubling estimate on the uniform line against a naive scan") {
  const auto space = uniform_line(64);
  const auto est = estimate_constants(space);
  // Naive oracle over the same radius grid.
  double max_ratio = 1.0;
  for (int i = 0; i < space.size(); ++i) {
    for (int j = 0; j < space.size(); ++j) {
      const double base = space.distance(i, j);
      if (base <= 0.0) continue;
      for (double v : {base, 0.5 * base}) {
        for (double r : {v, v * (1.0 + 1e-9)}) {
          const double small = space.ball_mass(i, r);
          if (small > 0.0) {
            max_ratio = std::max(max_ratio, space.ball_mass(i, 2.0 * r) / small);
          }
        }
      }
    }
  }
  CHECK(est.c_mu == doctest::Approx(std::log2(max_ratio)));
  CHECK(est.c_mu >= 0.9);
  CHECK(est.c_mu <= 2.1);
}

TEST_CASE("greedy net hand examples") {
  std::vector<std::array<double, 2>> coords = {{0.0, 0.0}, {0.4, 0.0}, {1.0, 0.0}};
  const auto space = QuasiMetricSpace::from_coordinates(
      coords, 1, std::vector<double>(3, 1.0), 1.0);
  CHECK(greedy_net(space, 0.5) == std::vector<int>{0, 2});
  CHECK(greedy_net(space, 5.0) == std::vector<int>{0});
  CHECK(greedy_net(space, 0.05) == std::vector<int>{0, 1, 2});
  // Coverage: every point within r of the net.
  for (double r : {0.3, 0.5, 0.9}) {
    const auto net = greedy_net(space, r);
    for (int p = 0; p < space.size(); ++p) {
      double best = 1e300;
      for (int z : net) best = std::min(best, space.distance(p, z));
      CHECK(best < r);
    }
  }
}

TEST_CASE("net-based construction passes all invariants") {
  const auto space = uniform_line(64);
  DyadicParams params{1.0 / 32.0, 1.0, 2.0, 0, 2};
  const DyadicSystem system = build_dyadic_system(space, params, 9);
  CHECK(verify_system(space, system).ok());
  CHECK(system.c1 == doctest::Approx(1.0 / 3.0));
  CHECK(system.C1 == doctest::Approx(4.0));
  // Root level is a single cube at this scale.
  CHECK(system.levels[0].size() == 1);
}

TEST_CASE("parameter gate rejects oversized delta") {
  const auto space = uniform_line(16);
  DyadicParams params{0.2, 1.0, 2.0, 0, 2};  // 12*2*0.2 = 4.8 > 1
  CHECK_THROWS_AS(build_dyadic_system(space, params, 1), std::invalid_argument);
}

TEST_CASE("single-point space builds one cube per level") {
  const auto space = QuasiMetricSpace::from_coordinates(
      {{0.5, 0.0}}, 1, {1.0}, 1.0);
  DyadicParams params{1.0 / 32.0, 1.0, 2.0, 0, 3};
  const DyadicSystem system = build_dyadic_system(space, params, 1);
  CHECK(verify_system(space, system).ok());
  for (const auto& level : system.levels) CHECK(level.size() == 1);
}

TEST_CASE("shifted grids on the unit interval") {
  const auto space = uniform_line(128);
  const AdjacentSystems grids = euclidean_shifted_grids(space, 9, -2);
  CHECK(grids.systems.size() == 3);
  CHECK(grids.covering_constant <= 6.0 + 1e-9);
  for (const auto& sys : grids.systems) {
    CHECK(verify_system(space, sys).ok());
  }
}

TEST_CASE("unshifted grid of depth 3 on 8 points is the uniform dyadic tree") {
  const auto space = uniform_line(8);
  const AdjacentSystems grids = euclidean_shifted_grids(space, 3, 0, false);
  const auto [ms, filt] = system_to_filtration(space, grids.systems[0]);
  CHECK(filt.k_min == 0);
  REQUIRE(filt.level_count() == 4);
  CHECK(filt.partitions[0].block_count() == 1);
  CHECK(filt.partitions[1].block_count() == 2);
  CHECK(filt.partitions[2].block_count() == 4);
  CHECK(filt.partitions[3].block_count() == 8);
  CHECK(filt.partitions[1].blocks[0] == std::vector<int>{0, 1, 2, 3});
  CHECK(validate_filtration(ms, filt).ok());
}

TEST_CASE("narrow central ball is covered by a shifted cube") {
  const auto space = uniform_line(128);
  const AdjacentSystems grids = euclidean_shifted_grids(space, 9, -2);
  // Points within 0.01 of 0.5: indices 63, 64, 65 at spacing 1/128.
  const int center = 64;
  const double radius = 0.01;
  const BallCover cover = cover_ball(space, grids, center, radius);
  CHECK(cover.diameter <= 0.12);
  CHECK(cover.system > 0);  // the unshifted grid cuts at 1/2
  // Oracle: some grid admits a cut-free interval of comparable length.
  const double oracle = oracle_min_cover_length(0.5 - radius, 0.5 + radius, 9);
  CHECK(oracle <= 0.12);
}

TEST_CASE("whole-space balls land on a root cube") {
  const auto space = uniform_line(32);
  const AdjacentSystems grids = euclidean_shifted_grids(space, 7, -2);
  const BallCover cover = cover_ball(space, grids, 5, 10.0);
  const auto& cube =
      grids.systems[cover.system].levels[cover.level][cover.cube];
  CHECK(static_cast<int>(cube.points.size()) == space.size());
}

TEST_CASE("inner sandwich balls stay inside their cube cover") {
  const auto space = uniform_line(64);
  DyadicParams params{1.0 / 32.0, 1.0, 2.0, 0, 2};
  const DyadicSystem system = build_dyadic_system(space, params, 9);
  AdjacentSystems adjacent;
  adjacent.systems.push_back(system);
  for (int li = 0; li < system.level_count(); ++li) {
    const int k = system.k_min + li;
    for (std::size_t c = 0; c < system.levels[li].size(); ++c) {
      const auto& cube = system.levels[li][c];
      const double r = system.c1 * system.scale(k);
      const auto ball = space.ball(cube.center, r);
      if (ball.empty()) continue;
      const BallCover cover = cover_ball(space, adjacent, cube.center, r);
      // The queried cube qualifies, so the minimal answer is at least as
      // tight and still contains the ball.
      CHECK(cover.diameter <= cube.diameter + 1e-12);
      const auto& chosen =
          adjacent.systems[cover.system].levels[cover.level][cover.cube];
      for (int p : ball) {
        CHECK(adjacent.systems[cover.system]
                  .cube_of[cover.level][p] == cover.cube);
      }
      (void)chosen;
    }
  }
}

TEST_CASE("general adjacent systems cover the circle") {
  Rng rng(77);
  const QuasiMetricSpace space = circle_cloud(rng, 96);
  DyadicParams params{1.0 / 96.0, 0.6, 1.2, 0, 2};
  const AdjacentSystems adjacent = build_adjacent_systems(space, params, 4, 5);
  CHECK(adjacent.covering_constant > 0.0);
  const CoveringCheck check = check_covering(space, adjacent);
  CHECK(check.uncovered.empty());
  for (const auto& sys : adjacent.systems) {
    CHECK(verify_system(space, sys).ok());
  }
}

TEST_CASE("rootless single system fails the covering with witnesses") {
  Rng rng(83);
  const QuasiMetricSpace space = circle_cloud(rng, 64);
  // Levels start below the diameter scale, so wide balls have no host cube.
  DyadicParams params{1.0 / 96.0, 0.005, 0.01, 0, 0};
  CHECK_THROWS_AS(build_adjacent_systems(space, params, 1, 3, 2),
                  std::runtime_error);
}

TEST_CASE("system JSON descriptors survive the filtration bridge") {
  const auto space = uniform_line(16);
  const AdjacentSystems grids = euclidean_shifted_grids(space, 4, 0, false);
  for (const auto& sys : grids.systems) {
    const auto [ms, filt] = system_to_filtration(space, sys);
    CHECK(validate_filtration(ms, filt).ok());
    CHECK(filt.k_min == sys.k_min);
  }
}
