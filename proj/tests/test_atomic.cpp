#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "martcalc/atomic.hpp"
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

SimpleAtom block_atom(Func values, int level, std::vector<int> block, double p,
                      double q) {
  SimpleAtom atom;
  atom.values = std::move(values);
  atom.level = level;
  atom.block = std::move(block);
  atom.p = p;
  atom.q = q;
  return atom;
}

}  // namespace

TEST_CASE("atom validator accepts the normalized oscillation") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  // |a|_inf = 2 and mass({0,1})^{-1} = 2, level-1 expectation vanishes.
  const auto atom =
      block_atom({2, -2, 0, 0}, 1, {0, 1}, 1.0, kInfinity);
  CHECK(validate_simple_atom(space, filt, atom).ok());
}

TEST_CASE("atom validator flags the size violation") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const auto atom = block_atom({3, -3, 0, 0}, 1, {0, 1}, 1.0, kInfinity);
  const auto report = validate_simple_atom(space, filt, atom);
  CHECK_FALSE(report.ok());
  bool size_issue = false;
  for (const auto& issue : report.issues) {
    if (issue.find("size bound") != std::string::npos) size_issue = true;
  }
  CHECK(size_issue);
}

TEST_CASE("atom validator flags a nonzero mean") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const auto atom = block_atom({1, 1, 0, 0}, 1, {0, 1}, 1.0, kInfinity);
  const auto report = validate_simple_atom(space, filt, atom);
  CHECK_FALSE(report.ok());
  bool mean_issue = false;
  for (const auto& issue : report.issues) {
    if (issue.find("expectation") != std::string::npos) mean_issue = true;
  }
  CHECK(mean_issue);
}

TEST_CASE("atom validator flags support leaks and non-measurable blocks") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  CHECK_FALSE(
      validate_simple_atom(space, filt,
                           block_atom({2, -2, 0.5, 0}, 1, {0, 1}, 1.0, kInfinity))
          .ok());
  CHECK_FALSE(
      validate_simple_atom(space, filt,
                           block_atom({0, 2, -2, 0}, 1, {1, 2}, 1.0, kInfinity))
          .ok());
}

TEST_CASE("single-difference atom decomposes into one term") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const double lambda = 0.75;
  Func f = {2, -2, 0, 0};
  for (double& v : f) v *= lambda;
  const auto dec = stopping_time_decomposition(space, filt, f, 1.0, kInfinity);
  REQUIRE(dec.terms.size() == 1);
  CHECK(dec.terms[0].lambda == doctest::Approx(lambda));
  CHECK(dec.terms[0].atom.level == 1);
  CHECK(dec.terms[0].atom.block == std::vector<int>{0, 1});
  CHECK(validate_simple_atom(space, filt, dec.terms[0].atom).ok());
  const Func rec = reconstruct(dec, 4);
  for (int i = 0; i < 4; ++i) CHECK(rec[i] == doctest::Approx(f[i]));
}

TEST_CASE("zero function decomposes into nothing") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const auto dec =
      stopping_time_decomposition(space, filt, Func{0, 0, 0, 0}, 1.0, 2.0);
  CHECK(dec.terms.empty());
  CHECK(atomic_norm_upper(space, filt, Func{0, 0, 0, 0}, 1.0, 2.0) == 0.0);
}

TEST_CASE("nonvanishing base is rejected") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  CHECK_THROWS_AS(
      stopping_time_decomposition(space, filt, Func{1, 1, 1, 1}, 1.0, 2.0),
      std::invalid_argument);
}

TEST_CASE("random decompositions reconstruct and validate") {
  Rng rng(17);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 4 + static_cast<int>(rng.next_below(120));
    const MeasureSpace space = random_space(rng, n, true);
    const Filtration filt = random_filtration(rng, n, 3 + trial % 6);
    const Func f = center_base(space, filt, random_gaussian(rng, n));
    const double p = trial % 2 == 0 ? 0.5 : 1.0;
    const double q = trial % 3 == 0 ? kInfinity : 2.0;
    const auto dec = stopping_time_decomposition(space, filt, f, p, q);
    const Func rec = reconstruct(dec, n);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(rec[i] - f[i]) <= 1e-10);
    }
    for (const auto& term : dec.terms) {
      CHECK(validate_simple_atom(space, filt, term.atom).ok());
      CHECK(term.lambda > 0.0);
    }
    // Deterministic ordering by (shell, level, block).
    const auto again = stopping_time_decomposition(space, filt, f, p, q);
    REQUIRE(again.terms.size() == dec.terms.size());
    for (std::size_t i = 0; i < dec.terms.size(); ++i) {
      CHECK(again.terms[i].lambda == dec.terms[i].lambda);
    }
  }
}

TEST_CASE("atomic norm on single atoms and disjoint sums") {
  const auto space = uniform4();
  const auto filt = dyadic4();
  const Func one_atom = {2, -2, 0, 0};
  CHECK(atomic_norm_upper(space, filt, one_atom, 1.0, kInfinity) <=
        1.0 + 1e-10);
  // Two disjointly supported single-difference atoms.
  const Func two_atoms = {2, -2, 2, -2};
  CHECK(atomic_norm_upper(space, filt, two_atoms, 1.0, kInfinity) <=
        2.0 + 1e-10);
}

TEST_CASE("quasi-norm tracks the conditional square function") {
  Rng rng(29);
  double sup = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 8 + static_cast<int>(rng.next_below(100));
    const MeasureSpace space = random_space(rng, n, true);
    const Filtration filt = random_filtration(rng, n, 5);
    const Func f = center_base(space, filt, random_gaussian(rng, n));
    const double p = trial % 2 == 0 ? 0.5 : 1.0;
    const double den = hardy_norm(space, filt, f, NormVariant::hp_s, p);
    if (den <= 1e-12) continue;
    sup = std::max(sup,
                   atomic_norm_upper(space, filt, f, p, 2.0) / den);
  }
  CHECK(sup > 0.0);
  CHECK(std::isfinite(sup));
}

TEST_CASE("doob constant bound for atom-normalized functions") {
  Rng rng(41);
  for (double p : {0.3, 0.5, 0.8}) {
    for (int trial = 0; trial < 60; ++trial) {
      const int n = 4 + static_cast<int>(rng.next_below(80));
      const MeasureSpace space = random_space(rng, n, true);
      const Filtration filt = random_filtration(rng, n, 5);
      const SimpleAtom atom = random_simple_atom(rng, space, filt, p, 1.0);
      Func f = atom.values;
      const double l1 = lp_norm(space, f, 1.0);
      if (l1 <= 1e-300) continue;
      if (l1 > 1.0) {
        for (double& v : f) v /= l1;
      }
      const Func fstar = maximal_function(expand(space, filt, f, true));
      CHECK(std::pow(lp_norm(space, fstar, p), p) <=
            1.0 / (1.0 - p) + 1e-9);
    }
  }
}
