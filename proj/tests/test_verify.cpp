#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "martcalc/atomic.hpp"
#include "martcalc/function_norms.hpp"
#include "martcalc/martingale_ops.hpp"
#include "martcalc/verify.hpp"

using namespace martcalc;

TEST_CASE("samplers are bit-deterministic") {
  Sampler s;
  s.seed = 99;
  s.family = SampleFamily::gaussian_martingale;
  s.points = 32;
  const auto a = std::get<MartingaleSample>(sample(s));
  const auto b = std::get<MartingaleSample>(sample(s));
  REQUIRE(a.f.size() == b.f.size());
  for (std::size_t i = 0; i < a.f.size(); ++i) {
    CHECK(a.f[i] == b.f[i]);  // exact bits
    CHECK(a.g[i] == b.g[i]);
  }
  CHECK(a.space.weights() == b.space.weights());
}

TEST_CASE("gaussian martingale differences are conditionally centered") {
  Sampler s;
  s.seed = 5;
  s.family = SampleFamily::gaussian_martingale;
  s.points = 48;
  s.levels = 5;
  const auto ms = std::get<MartingaleSample>(sample(s));
  CHECK(validate_filtration(ms.space, ms.filt).ok());
  const auto exp = expand(ms.space, ms.filt, ms.f, true);
  for (int k = ms.filt.k_min + 2; k <= ms.filt.k_max(); ++k) {
    const Func& d = exp.diffs[k - ms.filt.k_min - 1];
    const Func pred =
        conditional_expectation(ms.space, ms.filt.level(k - 1), d);
    double sup = 0.0;
    for (double v : d) sup = std::max(sup, std::abs(v));
    for (double v : pred) CHECK(std::abs(v) <= 1e-12 * std::max(1.0, sup));
  }
}

TEST_CASE("rademacher family has conditionally centered increments") {
  Sampler s;
  s.seed = 13;
  s.family = SampleFamily::rademacher_bmo;
  s.points = 40;
  const auto ms = std::get<MartingaleSample>(sample(s));
  const auto exp = expand(ms.space, ms.filt, ms.f, false);
  for (std::size_t i = 1; i < exp.diffs.size(); ++i) {
    const Func pred = conditional_expectation(
        ms.space, ms.filt.level(ms.filt.k_min + static_cast<int>(i)),
        exp.diffs[i]);
    (void)pred;
  }
  CHECK(bmo_norm(ms.space, ms.filt, ms.f, NormVariant::BMO, true) > 0.0);
}

TEST_CASE("atom family passes the validator") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
    Sampler s;
    s.seed = seed;
    s.family = SampleFamily::atom;
    s.points = 36;
    s.p = 0.5;
    const auto as = std::get<AtomSample>(sample(s));
    CHECK(validate_simple_atom(as.space, as.filt, as.atom).ok());
  }
}

TEST_CASE("metric cloud and multiplier families") {
  Sampler s;
  s.seed = 31;
  s.family = SampleFamily::metric_cloud;
  s.points = 50;
  s.dim = 2;
  const auto mc = std::get<MetricCloudSample>(sample(s));
  CHECK(mc.space.size() > 10);
  CHECK(mc.space.dim() == 2);

  s.family = SampleFamily::multiplier;
  s.p = 0.5;
  const auto mult = std::get<MultiplierSample>(sample(s));
  CHECK(mult.h.size() == static_cast<std::size_t>(mult.space.size()));
}

TEST_CASE("estimate_constant sup of equal functionals is exactly one") {
  Sampler s;
  s.family = SampleFamily::gaussian_martingale;
  s.points = 24;
  s.seed = 77;
  const auto norm1 = [](const SampleObject& obj) {
    const auto& ms = std::get<MartingaleSample>(obj);
    return lp_norm(ms.space, ms.f, 1.0);
  };
  const auto report = estimate_constant(norm1, norm1, s, 50);
  CHECK(report.sup_ratio == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(report.pass);  // witness replay agreed

  const auto zero = [](const SampleObject&) { return 0.0; };
  const auto zero_report = estimate_constant(zero, norm1, s, 50);
  CHECK(zero_report.sup_ratio == 0.0);

  CHECK_THROWS_AS(estimate_constant(norm1, zero, s, 10), std::runtime_error);
}

TEST_CASE("reports regenerate byte-identically") {
  SuiteConfig config;
  config.seed = 4242;
  config.trials = 60;
  const VerificationReport a = run_suite("identity", config);
  const VerificationReport b = run_suite("identity", config);
  CHECK(a.to_json(false).dump() == b.to_json(false).dump());
  CHECK(a.pass);
}

TEST_CASE("unknown suite id errors") {
  CHECK_THROWS_AS(run_suite("no-such-suite", SuiteConfig{}),
                  std::invalid_argument);
}

TEST_CASE("suite registry covers the documented families") {
  const auto ids = suite_ids();
  for (const char* required :
       {"identity", "functional-identities", "atomic", "doob-constant",
        "lipschitz-char", "holder", "bmo-compare", "maximal-bmo",
        "product-bounds-h1", "product-bounds-hp", "luxembourg", "dyadic-props",
        "adjacent-cover", "hardy-equiv", "holder1", "holder2", "multiplier-bounds",
        "dyadic-product-bounds", "ball-growth", "routed-product-bounds"}) {
    bool found = false;
    for (const auto& id : ids) {
      if (id == required) found = true;
    }
    CHECK_MESSAGE(found, required);
  }
}

TEST_CASE("witnesses replay inside small suite runs") {
  SuiteConfig config;
  config.seed = 31337;
  config.trials = 40;
  for (const char* id : {"holder", "maximal-bmo", "lipschitz-linf"}) {
    const VerificationReport report = run_suite(id, config);
    CHECK_MESSAGE(report.pass, id);
    CHECK(report.witness.trial >= 0);
  }
}
