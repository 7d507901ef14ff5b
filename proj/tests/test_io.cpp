#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "martcalc/atomic.hpp"
#include "martcalc/dyadic_geometry.hpp"
#include "martcalc/io.hpp"
#include "martcalc/verify.hpp"

using namespace martcalc;

TEST_CASE("space round trip and kind validation") {
  const MeasureSpace space(SpaceKind::probability, {0.25, 0.25, 0.25, 0.25});
  const MeasureSpace back = space_from_json(space_to_json(space));
  CHECK(back.weights() == space.weights());
  CHECK(back.kind() == SpaceKind::probability);

  Json bad = space_to_json(space);
  bad["kind"] = "other";
  CHECK_THROWS(space_from_json(bad));
  bad = Json::object();
  bad["weights"] = {1.0};
  CHECK_THROWS(space_from_json(bad));  // missing kind
}

TEST_CASE("filtration and func round trips") {
  Filtration filt;
  filt.k_min = -1;
  filt.partitions.push_back(Partition{{{0, 1, 2, 3}}});
  filt.partitions.push_back(Partition{{{0, 1}, {2, 3}}});
  const Filtration back = filtration_from_json(filtration_to_json(filt));
  CHECK(back.k_min == -1);
  REQUIRE(back.level_count() == 2);
  CHECK(back.partitions[1].blocks == filt.partitions[1].blocks);

  const Func f = {1.5, -2.25, 0.0};
  CHECK(func_from_json(func_to_json(f)) == f);
}

TEST_CASE("metric space round trips in both encodings") {
  std::vector<std::array<double, 2>> coords = {{0.1, 0.2}, {0.7, 0.9}};
  const auto euclid = QuasiMetricSpace::from_coordinates(
      coords, 2, {0.5, 0.5}, 1.0);
  const auto back = metric_space_from_json(metric_space_to_json(euclid));
  CHECK(back.dim() == 2);
  CHECK(back.distance(0, 1) == doctest::Approx(euclid.distance(0, 1)));

  const auto matrix = QuasiMetricSpace::from_matrix(
      {{0.0, 2.0}, {2.0, 0.0}}, {1.0, 1.0}, 1.5);
  const auto back2 = metric_space_from_json(metric_space_to_json(matrix));
  CHECK_FALSE(back2.has_coordinates());
  CHECK(back2.a0() == doctest::Approx(1.5));
  CHECK(back2.distance(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("dyadic system and adjacent family round trips") {
  std::vector<std::array<double, 2>> coords;
  for (int i = 0; i < 16; ++i) coords.push_back({i / 16.0, 0.0});
  const auto space = QuasiMetricSpace::from_coordinates(
      coords, 1, std::vector<double>(16, 1.0 / 16.0), 1.0);
  const AdjacentSystems grids = euclidean_shifted_grids(space, 5, -1);
  const AdjacentSystems back = adjacent_from_json(adjacent_to_json(grids));
  REQUIRE(back.systems.size() == grids.systems.size());
  CHECK(back.covering_constant == doctest::Approx(grids.covering_constant));
  for (std::size_t t = 0; t < back.systems.size(); ++t) {
    const DyadicSystem& a = grids.systems[t];
    DyadicSystem b = back.systems[t];
    REQUIRE(b.level_count() == a.level_count());
    for (int li = 0; li < a.level_count(); ++li) {
      REQUIRE(b.levels[li].size() == a.levels[li].size());
      for (std::size_t c = 0; c < a.levels[li].size(); ++c) {
        CHECK(b.levels[li][c].points == a.levels[li][c].points);
        CHECK(b.levels[li][c].center == a.levels[li][c].center);
        CHECK(b.levels[li][c].parent == a.levels[li][c].parent);
        CHECK(b.levels[li][c].diameter == a.levels[li][c].diameter);
      }
    }
    CHECK(verify_system(space, b).ok());
  }
}

TEST_CASE("decomposition serialization") {
  const MeasureSpace space(SpaceKind::probability, {0.25, 0.25, 0.25, 0.25});
  Filtration filt;
  filt.k_min = 0;
  filt.partitions.push_back(Partition{{{0, 1, 2, 3}}});
  filt.partitions.push_back(Partition{{{0, 1}, {2, 3}}});
  filt.partitions.push_back(Partition{{{0}, {1}, {2}, {3}}});
  const Func f = {2, -2, 0, 0};
  const auto dec = stopping_time_decomposition(space, filt, f, 1.0, 2.0);
  const auto back = decomposition_from_json(decomposition_to_json(dec));
  REQUIRE(back.terms.size() == dec.terms.size());
  for (std::size_t i = 0; i < dec.terms.size(); ++i) {
    CHECK(back.terms[i].lambda == dec.terms[i].lambda);
    CHECK(back.terms[i].atom.values == dec.terms[i].atom.values);
  }
}

TEST_CASE("malformed files carry context") {
  const std::string path = "/tmp/martcalc_bad.json";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{ not json", f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(load_json(path),
                       doctest::Contains("malformed JSON"), std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS(load_json("/tmp/martcalc_missing_file.json"));
}

TEST_CASE("report json carries ordered keys and skips runtime on demand") {
  VerificationReport report;
  report.suite = "demo";
  report.seed = 9;
  report.trials = 3;
  report.sup_ratio = 1.25;
  report.pass = true;
  const Json with = report.to_json(true);
  const Json without = report.to_json(false);
  CHECK(with.contains("runtime_ms"));
  CHECK_FALSE(without.contains("runtime_ms"));
  CHECK(with.begin().key() == "suite");
}

TEST_CASE("17-digit formatting round-trips doubles") {
  for (double v : {1.5, 1.0 / 3.0, 6.708203932499369, 1e-17}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
