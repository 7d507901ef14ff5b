#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "martcalc/measure_space.hpp"
#include "martcalc/rng.hpp"
#include "martcalc/summation.hpp"
#include "martcalc/verify.hpp"

using namespace martcalc;

namespace {

MeasureSpace uniform4() {
  return MeasureSpace(SpaceKind::probability, {0.25, 0.25, 0.25, 0.25});
}

Filtration dyadic4() {
  Filtration filt;
  filt.k_min = 0;
  filt.partitions.push_back(Partition{{{0, 1, 2, 3}}});
  filt.partitions.push_back(Partition{{{0, 1}, {2, 3}}});
  filt.partitions.push_back(Partition{{{0}, {1}, {2}, {3}}});
  return filt;
}

// Long-double reference for weighted block averages.
Func oracle_conditional_expectation(const MeasureSpace& space,
                                    const Partition& part, const Func& f) {
  Func out(space.size(), 0.0);
  for (const auto& block : part.blocks) {
    long double mass = 0.0L, sum = 0.0L;
    for (int p : block) {
      mass += space.weight(p);
      sum += static_cast<long double>(space.weight(p)) * f[p];
    }
    for (int p : block) out[p] = static_cast<double>(sum / mass);
  }
  return out;
}

}  // namespace

TEST_CASE("space invariants") {
  CHECK_THROWS(MeasureSpace(SpaceKind::probability, {0.5, 0.6}));
  CHECK_THROWS(MeasureSpace(SpaceKind::probability, {1.5, -0.5}));
  CHECK_THROWS(MeasureSpace(SpaceKind::sigma_finite, {}));
  const MeasureSpace s(SpaceKind::sigma_finite, {2.0, 3.0});
  CHECK(s.total_mass() == doctest::Approx(5.0));
}

TEST_CASE("validate_filtration accepts the textbook tree") {
  const auto space = uniform4();
  CHECK(validate_filtration(space, dyadic4()).ok());
}

TEST_CASE("validate_filtration flags coarsening as nestedness violation") {
  Filtration filt;
  filt.k_min = 0;
  filt.partitions.push_back(Partition{{{0, 1}, {2, 3}}});
  filt.partitions.push_back(Partition{{{0, 1, 2, 3}}});
  const auto report = validate_filtration(uniform4(), filt);
  CHECK_FALSE(report.ok());
  bool straddle = false;
  for (const auto& issue : report.issues) {
    if (issue.find("straddles") != std::string::npos) straddle = true;
  }
  CHECK(straddle);
}

TEST_CASE("validate_filtration flags a block straddling two parents") {
  Filtration filt;
  filt.k_min = 0;
  filt.partitions.push_back(Partition{{{0, 1}, {2, 3}}});
  filt.partitions.push_back(Partition{{{1, 2}, {0}, {3}}});
  CHECK_FALSE(validate_filtration(uniform4(), filt).ok());
}

TEST_CASE("validate_filtration flags gaps and empty blocks") {
  Filtration filt;
  filt.k_min = 0;
  filt.partitions.push_back(Partition{{{0, 1, 2}, {}}});
  const auto report = validate_filtration(uniform4(), filt);
  CHECK(report.issues.size() >= 2);  // uncovered point 3 and empty block
}

TEST_CASE("conditional expectation block averages") {
  const auto space = uniform4();
  const Partition part{{{0, 1}, {2, 3}}};
  const Func f = {1, 2, 3, 4};
  const Func e = conditional_expectation(space, part, f);
  CHECK(e[0] == doctest::Approx(1.5));
  CHECK(e[1] == doctest::Approx(1.5));
  CHECK(e[2] == doctest::Approx(3.5));
  CHECK(e[3] == doctest::Approx(3.5));
}

TEST_CASE("conditional expectation with weights") {
  const MeasureSpace space(SpaceKind::probability, {0.1, 0.3, 0.2, 0.4});
  const Partition part{{{0, 1}, {2, 3}}};
  const Func f = {1, 2, 3, 4};
  const Func e = conditional_expectation(space, part, f);
  CHECK(e[0] == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(e[2] == doctest::Approx(11.0 / 3.0).epsilon(1e-12));
  CHECK(e[3] == doctest::Approx(11.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("trivial partition gives the mean") {
  const auto space = uniform4();
  const Func f = {1, 2, 3, 4};
  const Func e = conditional_expectation(space, Partition{{{0, 1, 2, 3}}}, f);
  for (double v : e) CHECK(v == doctest::Approx(2.5));
}

TEST_CASE("conditional expectation properties on random fixtures") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 4 + static_cast<int>(rng.next_below(60));
    const MeasureSpace space = random_space(rng, n, true);
    const Filtration filt = random_filtration(rng, n, 4);
    const Func f = random_gaussian(rng, n);

    for (int k = filt.k_min; k <= filt.k_max(); ++k) {
      const Func once = conditional_expectation(space, filt.level(k), f);
      const Func twice = conditional_expectation(space, filt.level(k), once);
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(twice[i] - once[i]) <=
              1e-12 * std::max(1.0, std::abs(once[i])));
      }
      // Integral preservation.
      CHECK(std::abs(space.integral(once) - space.integral(f)) <=
            1e-12 * std::max(1.0, std::abs(space.integral(f)) + 1.0));
      // Oracle agreement.
      const Func ref = oracle_conditional_expectation(space, filt.level(k), f);
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(once[i] - ref[i]) <=
              1e-12 * std::max(1.0, std::abs(ref[i])));
      }
    }
    // Tower property for one random pair j <= k.
    const int k = filt.k_min + static_cast<int>(rng.next_below(filt.level_count()));
    const int j = filt.k_min + static_cast<int>(rng.next_below(k - filt.k_min + 1));
    const Func ek = conditional_expectation(space, filt.level(k), f);
    const Func ejk = conditional_expectation(space, filt.level(j), ek);
    const Func ej = conditional_expectation(space, filt.level(j), f);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(ejk[i] - ej[i]) <= 1e-12 * std::max(1.0, std::abs(ej[i])));
    }
  }
}

TEST_CASE("regularity constant on the uniform tree") {
  CHECK(regularity_constant(uniform4(), dyadic4()) == doctest::Approx(2.0));
}

TEST_CASE("regularity constant with skewed split") {
  const MeasureSpace space(SpaceKind::probability, {0.1, 0.9});
  Filtration filt;
  filt.k_min = 0;
  filt.partitions.push_back(Partition{{{0, 1}}});
  filt.partitions.push_back(Partition{{{0}, {1}}});
  CHECK(regularity_constant(space, filt) == doctest::Approx(10.0));
}

TEST_CASE("regularity of the one-level filtration is 1") {
  Filtration filt;
  filt.k_min = 0;
  filt.partitions.push_back(Partition{{{0, 1, 2, 3}}});
  CHECK(regularity_constant(uniform4(), filt) == doctest::Approx(1.0));
}

TEST_CASE("regularity needs a root level on two-sided filtrations") {
  Filtration filt = dyadic4();
  filt.k_min = -1;
  CHECK_THROWS_WITH_AS(regularity_constant(uniform4(), filt),
                       "regularity needs a root level", std::invalid_argument);
  CHECK(regularity_constant(uniform4(), filt, -1) == doctest::Approx(2.0));
}

TEST_CASE("restrict_space uniform block") {
  const auto rs = restrict_space(uniform4(), dyadic4(), 1, 0);
  CHECK(rs.space.size() == 2);
  CHECK(rs.space.weight(0) == doctest::Approx(0.5));
  CHECK(rs.filt.level_count() == 2);
  CHECK(rs.filt.partitions[0].block_count() == 1);
  CHECK(rs.filt.partitions[1].block_count() == 2);
  CHECK(rs.points == std::vector<int>{0, 1});
}

TEST_CASE("restrict_space with weights") {
  const MeasureSpace space(SpaceKind::probability, {0.1, 0.3, 0.2, 0.4});
  const auto rs = restrict_space(space, dyadic4(), 1, 1);
  CHECK(rs.space.weight(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(rs.space.weight(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("restrict_space at the root is the identity") {
  const auto rs = restrict_space(uniform4(), dyadic4(), 0, 0);
  CHECK(rs.space.size() == 4);
  CHECK(rs.filt.level_count() == 3);
  for (int i = 0; i < 4; ++i) CHECK(rs.space.weight(i) == doctest::Approx(0.25));
}

TEST_CASE("restrict_space rejects a non-block") {
  CHECK_THROWS(restrict_space(uniform4(), dyadic4(), 1, 5));
}

TEST_CASE("restrict_space preserves conditional expectations") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 6 + static_cast<int>(rng.next_below(40));
    const MeasureSpace space = random_space(rng, n, true);
    const Filtration filt = random_filtration(rng, n, 4);
    const int level = filt.k_min + 1;
    const int block = static_cast<int>(
        rng.next_below(filt.level(level).block_count()));
    const auto rs = restrict_space(space, filt, level, block);

    Func f(n, 0.0);
    Func f_on_a(rs.space.size());
    for (std::size_t i = 0; i < rs.points.size(); ++i) {
      f_on_a[i] = rng.next_gaussian();
      f[rs.points[i]] = f_on_a[i];
    }
    for (int k = 0; k < rs.filt.level_count(); ++k) {
      const Func inner =
          conditional_expectation(rs.space, rs.filt.partitions[k], f_on_a);
      const Func outer =
          conditional_expectation(space, filt.level(level + k), f);
      for (std::size_t i = 0; i < rs.points.size(); ++i) {
        CHECK(std::abs(inner[i] - outer[rs.points[i]]) <=
              1e-12 * std::max(1.0, std::abs(inner[i])));
      }
    }
  }
}
