// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Every tolerance is pinned here and inside the suites; nothing is deferred
// to runtime configuration.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "martcalc/verify.hpp"

using namespace martcalc;

namespace {

int failures = 0;

void line(int criterion, const std::string& name, bool pass,
          const std::string& detail) {
  std::printf("criterion %2d (%s): %s%s%s\n", criterion, name.c_str(),
              pass ? "PASS" : "FAIL", detail.empty() ? "" : " -- ",
              detail.c_str());
  if (!pass) ++failures;
}

std::string ratio_detail(const VerificationReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "sup_ratio %.6g, trials %d, skipped %d",
                r.sup_ratio, r.trials, r.skipped);
  std::string out = buf;
  if (!r.detail.empty()) out += "; " + r.detail;
  return out;
}

}  // namespace

int main() {
  SuiteConfig config;
  config.seed = 20240603;

  // 1. Exact product decomposition over 1000 seeded pairs, <= 30 s.
  {
    const VerificationReport r = run_suite("identity", config);
    const bool in_time = r.runtime_ms <= 30'000.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "; runtime %.2f s", r.runtime_ms / 1000.0);
    line(1, "exact product decomposition", r.pass && in_time,
         ratio_detail(r) + buf);
  }

  // 2. Functional identities and conditional-expectation laws.
  {
    const VerificationReport r = run_suite("functional-identities", config);
    line(2, "functional identities", r.pass, ratio_detail(r));
  }

  // 3. Atomic decomposition: exact reconstruction, valid atoms, stable ratio.
  {
    const VerificationReport r = run_suite("atomic", config);
    line(3, "atomic decomposition", r.pass, ratio_detail(r));
  }

  // 4. Maximal-function bound with the explicit constant 1/(1-p).
  {
    const VerificationReport r = run_suite("doob-constant", config);
    const bool under = r.sup_ratio <= 1.0 + 1e-9;
    line(4, "maximal bound constant", r.pass && under, ratio_detail(r));
  }

  // 5. Lipschitz sup characterization: lower bound exact, upper tracked.
  {
    const VerificationReport r = run_suite("lipschitz-char", config);
    const bool lower = r.quantiles.count("min") &&
                       r.quantiles.at("min") >= 1.0 - 1e-12;
    line(5, "lipschitz characterization", r.pass && lower, ratio_detail(r));
  }

  // 6. Inequality suites: finite sups, replayable witnesses, stable ladder,
  //    at least 90% non-degenerate trials.
  {
    bool all = true;
    std::string detail;
    for (const char* id :
         {"holder", "product-bounds-h1", "product-bounds-hp", "bmo-compare",
          "maximal-bmo", "holder1", "holder2", "multiplier-bounds", "dyadic-product-bounds",
          "ball-growth", "routed-product-bounds"}) {
      const VerificationReport r = run_suite(id, config);
      if (!r.pass) {
        all = false;
        detail += std::string(id) + ": " +
                  (r.detail.empty() ? "failed" : r.detail) + "; ";
      }
    }
    line(6, "inequality suites", all, detail);
  }

  // 7. Dyadic geometry: exhaustive invariants and covering constants.
  {
    const VerificationReport props = run_suite("dyadic-props", config);
    const VerificationReport cover = run_suite("adjacent-cover", config);
    std::string detail = "violations " +
                         std::to_string(static_cast<long>(props.sup_ratio));
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", max covering constant %.6g",
                  cover.sup_ratio);
    detail += buf;
    if (!props.detail.empty()) detail += "; " + props.detail;
    if (!cover.detail.empty()) detail += "; " + cover.detail;
    line(7, "dyadic geometry", props.pass && cover.pass, detail);
  }

  // 8. Ball/dyadic equivalences and atom-conversion scalars.
  {
    const VerificationReport r = run_suite("hardy-equiv", config);
    line(8, "hardy equivalences", r.pass, ratio_detail(r));
  }

  // 9. Luxembourg engine: unit defining integral, exact homogeneity.
  {
    const VerificationReport r = run_suite("luxembourg", config);
    line(9, "luxembourg engine", r.pass, ratio_detail(r));
  }

  // 10. Determinism: identical seeds regenerate identical reports.
  {
    bool same = true;
    for (const char* id : {"identity", "holder"}) {
      SuiteConfig small = config;
      small.trials = 120;
      const std::string a = run_suite(id, small).to_json(false).dump();
      const std::string b = run_suite(id, small).to_json(false).dump();
      same = same && a == b;
    }
    line(10, "determinism", same, same ? "byte-identical reports" : "drift");
  }

  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria failed\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
