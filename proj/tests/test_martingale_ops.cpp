#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "martcalc/function_norms.hpp"
#include "martcalc/martingale_ops.hpp"
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

const Func kOsc = {1.0, -1.0, 2.0, -2.0};

}  // namespace

TEST_CASE("expansion with the zero-base convention") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const auto exp = expand(space, filt, kOsc, true);
  // Level-1 averages vanish, so the whole function sits in the last
  // difference.
  for (double v : exp.diffs[0]) CHECK(v == doctest::Approx(0.0));
  for (int i = 0; i < 4; ++i) CHECK(exp.diffs[1][i] == doctest::Approx(kOsc[i]));
  const Func top = exp.level_value(2);
  for (int i = 0; i < 4; ++i) CHECK(top[i] == doctest::Approx(kOsc[i]));
}

TEST_CASE("constant function expansion") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const Func ones = {1, 1, 1, 1};
  const auto exp = expand(space, filt, ones, true);
  for (double v : exp.diffs[0]) CHECK(v == doctest::Approx(1.0));
  for (double v : exp.diffs[1]) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("true-base expansion keeps the mean") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const Func f = {2, 4, 6, 8};
  const auto exp = expand(space, filt, f, false);
  for (double v : exp.base) CHECK(v == doctest::Approx(5.0));
}

TEST_CASE("square and conditional square and maximal on the oscillator") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const auto exp = expand(space, filt, kOsc, true);
  const Func S = square_function(exp);
  const Func M = maximal_function(exp);
  const Func s = conditional_square_function(space, filt, exp);
  const Func expected = {1, 1, 2, 2};
  for (int i = 0; i < 4; ++i) {
    CHECK(S[i] == doctest::Approx(expected[i]));
    CHECK(M[i] == doctest::Approx(expected[i]));
    CHECK(s[i] == doctest::Approx(expected[i]));
  }
}

TEST_CASE("reconstruction across random fixtures") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + static_cast<int>(rng.next_below(100));
    const MeasureSpace space = random_space(rng, n, true);
    const Filtration filt = random_filtration(rng, n, 6);
    const Func f = random_gaussian(rng, n);
    for (bool zero_base : {true, false}) {
      const auto exp = expand(space, filt, f, zero_base);
      const Func top = exp.level_value(filt.k_max());
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(top[i] - f[i]) <= 1e-12 * std::max(1.0, std::abs(f[i])));
      }
      // Partial sums reproduce every intermediate level.
      for (int k = filt.k_min; k <= filt.k_max(); ++k) {
        const Func level = exp.level_value(k);
        Func want = conditional_expectation(space, filt.level(k), f);
        if (zero_base && k == filt.k_min) want.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
          CHECK(std::abs(level[i] - want[i]) <=
                1e-12 * std::max(1.0, std::abs(want[i])));
        }
      }
    }
  }
}

TEST_CASE("paraproducts of constants") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const Func ones = {1, 1, 1, 1};
  const auto pp = paraproducts(space, filt, ones, ones);
  for (int i = 0; i < 4; ++i) {
    CHECK(pp.pi1[i] == doctest::Approx(1.0));
    CHECK(pp.pi2[i] == doctest::Approx(0.0));
    CHECK(pp.pi3[i] == doctest::Approx(0.0));
  }
}

TEST_CASE("paraproducts of the oscillator with itself") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const auto pp = paraproducts(space, filt, kOsc, kOsc);
  const Func sq = {1, 1, 4, 4};
  for (int i = 0; i < 4; ++i) {
    CHECK(pp.pi1[i] == doctest::Approx(sq[i]));
    CHECK(pp.pi2[i] == doctest::Approx(0.0));
    CHECK(pp.pi3[i] == doctest::Approx(0.0));
  }
}

TEST_CASE("mixed paraproduct routes the product into pi2") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const Func ones = {1, 1, 1, 1};
  const auto pp = paraproducts(space, filt, ones, kOsc);
  for (int i = 0; i < 4; ++i) {
    CHECK(pp.pi1[i] == doctest::Approx(0.0));
    CHECK(pp.pi2[i] == doctest::Approx(kOsc[i]));
    CHECK(pp.pi3[i] == doctest::Approx(0.0));
  }
}

TEST_CASE("telescoping identity and exact symmetry over random pairs") {
  // The identity is quantified over at least a thousand triples reaching
  // 1024 points and 12 levels.
  Rng rng(47);
  for (int trial = 0; trial < 1000; ++trial) {
    const int cap = trial % 10 == 0 ? 1024 : 200;
    const int n = 4 + static_cast<int>(rng.next_below(cap));
    const MeasureSpace space = random_space(rng, n, true);
    const Filtration filt =
        random_filtration(rng, n, 2 + static_cast<int>(rng.next_below(11)));
    const Func f = random_gaussian(rng, n);
    const Func g = random_gaussian(rng, n);
    const auto pp = paraproducts(space, filt, f, g);
    const auto qq = paraproducts(space, filt, g, f);
    double fmax = 0.0, gmax = 0.0;
    for (double v : f) fmax = std::max(fmax, std::abs(v));
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    for (int i = 0; i < n; ++i) {
      const double sum = pp.pi1[i] + pp.pi2[i] + pp.pi3[i];
      CHECK(std::abs(f[i] * g[i] - sum) <= 1e-12 * (1.0 + fmax * gmax));
      // Bitwise symmetry: same accumulation order on both sides.
      CHECK(pp.pi1[i] == qq.pi1[i]);
      CHECK(pp.pi2[i] == qq.pi3[i]);
      CHECK(pp.pi3[i] == qq.pi2[i]);
    }
  }
}

TEST_CASE("square vs conditional square integrate identically") {
  Rng rng(59);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 4 + static_cast<int>(rng.next_below(150));
    const MeasureSpace space = random_space(rng, n, true);
    const Filtration filt = random_filtration(rng, n, 7);
    const Func f = random_gaussian(rng, n);
    const auto exp = expand(space, filt, f, true);
    const Func S = square_function(exp);
    const Func s = conditional_square_function(space, filt, exp);
    double int_s2 = 0.0, int_diff = 0.0;
    for (int i = 0; i < n; ++i) {
      int_s2 += space.weight(i) * S[i] * S[i];
      int_diff += space.weight(i) * (S[i] * S[i] - s[i] * s[i]);
    }
    CHECK(std::abs(int_diff) <= 1e-10 * std::max(int_s2, 1e-300));
  }
}

TEST_CASE("paraproducts reject mismatched inputs") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  CHECK_THROWS(paraproducts(space, filt, Func{1, 2, 3}, kOsc));
  // Nonzero true base on the first factor is rejected.
  const auto fe = expand(space, filt, Func{1, 1, 1, 1}, false);
  const auto ge = expand(space, filt, kOsc, false);
  CHECK_THROWS(paraproducts(space, filt, fe, ge));
}

TEST_CASE("two-sided paraproducts with a true-base second factor") {
  // Zero-base first factor plus arbitrary second factor still telescopes to
  // the pointwise product.
  Rng rng(71);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng.next_below(60));
    const MeasureSpace space = random_space(rng, n, true);
    Filtration filt = random_filtration(rng, n, 5);
    filt.k_min = -2;  // relabel levels; contents unchanged
    const Func f = center_base(space, filt, random_gaussian(rng, n));
    const Func g = random_gaussian(rng, n);
    const auto fe = expand(space, filt, f, true);
    const auto ge = expand(space, filt, g, false);
    const auto pp = paraproducts(space, filt, fe, ge);
    double fmax = 0.0, gmax = 0.0;
    for (double v : f) fmax = std::max(fmax, std::abs(v));
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    for (int i = 0; i < n; ++i) {
      const double sum = pp.pi1[i] + pp.pi2[i] + pp.pi3[i];
      CHECK(std::abs(f[i] * g[i] - sum) <= 1e-12 * (1.0 + fmax * gmax));
    }
  }
}

TEST_CASE("maximal-function BMO report on the alternating function") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const Func g = {1, -1, 1, -1};
  CHECK(bmo_norm(space, filt, g, NormVariant::BMO, true) ==
        doctest::Approx(1.0));
  const auto report = check_bmo_maximal(space, filt, g);
  CHECK(report.base_ratio == doctest::Approx(1.0));
  CHECK(report.bmo_ratio > 0.0);
}

TEST_CASE("constant g keeps finite ratios under the zero-base convention") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const Func g = {3, 3, 3, 3};
  const auto report = check_bmo_maximal(space, filt, g);
  CHECK(std::isfinite(report.base_ratio));
  CHECK(std::isfinite(report.bmo_ratio));
  CHECK(report.base_ratio == doctest::Approx(1.0));
}

TEST_CASE("zero g is rejected") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  CHECK_THROWS_AS(check_bmo_maximal(space, filt, Func{0, 0, 0, 0}),
                  std::invalid_argument);
}
