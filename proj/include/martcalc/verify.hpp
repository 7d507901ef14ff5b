#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "martcalc/atomic.hpp"
#include "martcalc/dyadic_geometry.hpp"
#include "martcalc/io.hpp"
#include "martcalc/measure_space.hpp"
#include "martcalc/rng.hpp"

namespace martcalc {

enum class SampleFamily {
  gaussian_martingale,
  rademacher_bmo,
  atom,
  lipschitz,
  multiplier,
  metric_cloud,
};

// Identical seed and parameters reproduce identical output bits.
struct Sampler {
  std::uint64_t seed = 1;
  SampleFamily family = SampleFamily::gaussian_martingale;
  int points = 64;
  int levels = 6;
  double p = 0.5;
  int dim = 1;
  bool random_weights = true;
};

struct MartingaleSample {
  MeasureSpace space;
  Filtration filt;
  Func f;
  Func g;
};

struct AtomSample {
  MeasureSpace space;
  Filtration filt;
  SimpleAtom atom;
};

struct MultiplierSample {
  QuasiMetricSpace space;
  int base_point;
  Func h;
};

struct MetricCloudSample {
  QuasiMetricSpace space;
};

using SampleObject = std::variant<MartingaleSample, AtomSample,
                                  MultiplierSample, MetricCloudSample>;

SampleObject sample(const Sampler& sampler);

// Shared generators for the suite harnesses.
MeasureSpace random_space(Rng& rng, int n, bool random_weights,
                          SpaceKind kind = SpaceKind::probability);
Filtration random_filtration(Rng& rng, int n, int levels,
                             bool separating = true);
Func random_gaussian(Rng& rng, int n);
Func rademacher_increments(Rng& rng, const MeasureSpace& space,
                           const Filtration& filt, double decay);
SimpleAtom random_simple_atom(Rng& rng, const MeasureSpace& space,
                              const Filtration& filt, double p, double q);
QuasiMetricSpace random_cloud(Rng& rng, int n, int dim, bool random_weights);
QuasiMetricSpace circle_cloud(Rng& rng, int n);

// Subtracts the base-level conditional expectation so expansions carry a
// vanishing base.
Func center_base(const MeasureSpace& space, const Filtration& filt,
                 const Func& f);

struct Witness {
  int trial = -1;
  std::uint64_t seed = 0;
  std::string note;
};

struct VerificationReport {
  std::string suite;
  std::uint64_t seed = 0;
  int trials = 0;
  int skipped = 0;
  double sup_ratio = 0.0;
  std::map<std::string, double> quantiles;
  std::map<std::string, double> metrics;
  Witness witness;
  bool pass = false;
  std::string detail;
  double runtime_ms = 0.0;

  Json to_json(bool include_runtime = true) const;
};

void report_to_csv(const VerificationReport& report, const std::string& path);

// Sup of numerator/denominator over seeded trials. Degenerate trials
// (denominator ~ 0) are skipped and counted; the witness trial is re-run and
// must reproduce the sup within 1e-12 before the report is returned.
VerificationReport estimate_constant(
    const std::function<double(const SampleObject&)>& numerator,
    const std::function<double(const SampleObject&)>& denominator,
    const Sampler& sampler, int trials);

struct SuiteConfig {
  std::uint64_t seed = 20240603;
  int trials = 0;  // 0 keeps the suite default
  std::vector<int> sizes = {64, 256, 512};
};

std::vector<std::string> suite_ids();
VerificationReport run_suite(const std::string& id, const SuiteConfig& config);

}  // namespace martcalc
