#include "martcalc/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "martcalc/function_norms.hpp"
#include "martcalc/homogeneous.hpp"
#include "martcalc/martingale_ops.hpp"
#include "martcalc/summation.hpp"

namespace martcalc {

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

double sup_abs(const Func& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

Func pointwise_product(const Func& f, const Func& g) {
  Func out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * g[i];
  return out;
}

}  // namespace

MeasureSpace random_space(Rng& rng, int n, bool random_weights,
                          SpaceKind kind) {
  std::vector<double> w(n, 1.0);
  if (random_weights) {
    for (double& x : w) x = std::exp(1.5 * (rng.next_double() - 0.5));
  }
  if (kind == SpaceKind::probability) {
    const double total = compensated_total(w);
    for (double& x : w) x /= total;
    // Nudge the largest weight so the compensated total is 1 exactly.
    const double fixed = compensated_total(w);
    w[0] += 1.0 - fixed;
  }
  return MeasureSpace(kind, w);
}

Filtration random_filtration(Rng& rng, int n, int levels, bool separating) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);

  Filtration filt;
  filt.k_min = 0;

  // Blocks are contiguous ranges of the permuted order; each level splits
  // every block into 1..4 pieces.
  std::vector<std::pair<int, int>> ranges = {{0, n}};
  Partition root;
  root.blocks.push_back(perm);
  std::sort(root.blocks[0].begin(), root.blocks[0].end());
  filt.partitions.push_back(std::move(root));

  for (int level = 1; level < levels; ++level) {
    std::vector<std::pair<int, int>> next;
    Partition part;
    const bool last = level == levels - 1;
    for (auto [lo, hi] : ranges) {
      const int len = hi - lo;
      int pieces = last ? len : 1 + static_cast<int>(rng.next_below(4));
      pieces = std::min(pieces, len);
      std::vector<int> cuts = {lo};
      if (!last) {
        std::vector<int> interior;
        for (int c = lo + 1; c < hi; ++c) interior.push_back(c);
        rng.shuffle(interior);
        interior.resize(std::min<std::size_t>(pieces - 1, interior.size()));
        std::sort(interior.begin(), interior.end());
        cuts.insert(cuts.end(), interior.begin(), interior.end());
      } else {
        for (int c = lo + 1; c < hi; ++c) cuts.push_back(c);
      }
      cuts.push_back(hi);
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        std::vector<int> block(perm.begin() + cuts[i],
                               perm.begin() + cuts[i + 1]);
        std::sort(block.begin(), block.end());
        next.emplace_back(cuts[i], cuts[i + 1]);
        part.blocks.push_back(std::move(block));
      }
    }
    filt.partitions.push_back(std::move(part));
    ranges = std::move(next);
  }
  if (separating && levels >= 1) {
    // The construction above only guarantees singletons when the last level
    // splits fully, which it does by design (last => pieces = len).
  }
  return filt;
}

Func random_gaussian(Rng& rng, int n) {
  Func f(n);
  for (double& v : f) v = rng.next_gaussian();
  return f;
}

Func rademacher_increments(Rng& rng, const MeasureSpace& space,
                           const Filtration& filt, double decay) {
  const int n = space.size();
  Func f(n, 0.0);
  double sigma = 1.0;
  for (int k = filt.k_min + 1; k <= filt.k_max(); ++k) {
    Func eps(n, 0.0);
    for (const auto& block : filt.level(k).blocks) {
      const double sign = rng.next_double() < 0.5 ? -1.0 : 1.0;
      for (int p : block) eps[p] = sign;
    }
    const Func pred = conditional_expectation(space, filt.level(k - 1), eps);
    for (int p = 0; p < n; ++p) f[p] += sigma * (eps[p] - pred[p]);
    sigma *= decay;
  }
  return f;
}

SimpleAtom random_simple_atom(Rng& rng, const MeasureSpace& space,
                              const Filtration& filt, double p, double q) {
  const int n = space.size();
  // Pick a block with room to oscillate, below the top level.
  std::vector<std::pair<int, int>> candidates;
  for (int level = filt.k_min; level < filt.k_max(); ++level) {
    const Partition& part = filt.level(level);
    for (int b = 0; b < part.block_count(); ++b) {
      if (part.blocks[b].size() >= 2) candidates.emplace_back(level, b);
    }
  }
  if (candidates.empty()) candidates.emplace_back(filt.k_min, 0);
  const auto [level, block_id] =
      candidates[rng.next_below(candidates.size())];
  const Partition& part = filt.level(level);
  const std::vector<int>& block = part.blocks[block_id];

  SimpleAtom atom;
  atom.level = level;
  atom.block = block;
  atom.p = p;
  atom.q = q;
  atom.values.assign(n, 0.0);
  for (int pt : block) atom.values[pt] = rng.next_gaussian();

  // Project to zero conditional expectation on the block, then normalize to
  // a random fraction of the size bound.
  const Func ce = conditional_expectation(space, part, atom.values);
  for (int pt : block) atom.values[pt] -= ce[pt];

  CompensatedSum mass;
  for (int pt : block) mass.add(space.weight(pt));
  double qn;
  if (std::isinf(q)) {
    qn = 0.0;
    for (int pt : block) qn = std::max(qn, std::abs(atom.values[pt]));
  } else {
    CompensatedSum acc;
    for (int pt : block) {
      acc.add(space.weight(pt) * std::pow(std::abs(atom.values[pt]), q));
    }
    qn = std::pow(acc.value(), 1.0 / q);
  }
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  const double bound = std::pow(mass.value(), inv_q - 1.0 / p);
  if (qn > 0.0) {
    const double scale = bound * (0.25 + 0.75 * rng.next_double()) / qn;
    for (int pt : block) atom.values[pt] *= scale;
  }
  return atom;
}

QuasiMetricSpace random_cloud(Rng& rng, int n, int dim, bool random_weights) {
  std::vector<std::array<double, 2>> coords(n);
  for (auto& c : coords) {
    c[0] = rng.next_double();
    c[1] = dim == 2 ? rng.next_double() : 0.0;
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  std::vector<double> w(coords.size(), 1.0 / static_cast<double>(n));
  if (random_weights) {
    for (double& x : w) {
      x = std::exp(1.2 * (rng.next_double() - 0.5)) / static_cast<double>(n);
    }
  }
  return QuasiMetricSpace::from_coordinates(std::move(coords), dim,
                                            std::move(w), 1.0);
}

QuasiMetricSpace circle_cloud(Rng& rng, int n) {
  // Arc-length metric on the unit-circumference circle.
  std::vector<double> angles(n);
  for (double& a : angles) a = rng.next_double();
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
  const int m = static_cast<int>(angles.size());
  std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double raw = std::abs(angles[i] - angles[j]);
      const double d = std::min(raw, 1.0 - raw);
      dist[i][j] = d;
      dist[j][i] = d;
    }
  }
  return QuasiMetricSpace::from_matrix(std::move(dist),
                                       std::vector<double>(m, 1.0 / m), 1.0);
}

Func center_base(const MeasureSpace& space, const Filtration& filt,
                 const Func& f) {
  const Func base = conditional_expectation(space, filt.level(filt.k_min), f);
  Func out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] - base[i];
  return out;
}

SampleObject sample(const Sampler& sampler) {
  Rng rng(sampler.seed);
  switch (sampler.family) {
    case SampleFamily::gaussian_martingale: {
      MeasureSpace space =
          random_space(rng, sampler.points, sampler.random_weights);
      Filtration filt = random_filtration(rng, sampler.points, sampler.levels);
      Func f = random_gaussian(rng, sampler.points);
      Func g = random_gaussian(rng, sampler.points);
      return MartingaleSample{std::move(space), std::move(filt), std::move(f),
                              std::move(g)};
    }
    case SampleFamily::rademacher_bmo: {
      MeasureSpace space =
          random_space(rng, sampler.points, sampler.random_weights);
      Filtration filt = random_filtration(rng, sampler.points, sampler.levels);
      Func f = rademacher_increments(rng, space, filt, 0.7);
      Func g = rademacher_increments(rng, space, filt, 0.5);
      return MartingaleSample{std::move(space), std::move(filt), std::move(f),
                              std::move(g)};
    }
    case SampleFamily::atom: {
      MeasureSpace space =
          random_space(rng, sampler.points, sampler.random_weights);
      Filtration filt = random_filtration(rng, sampler.points, sampler.levels);
      SimpleAtom atom =
          random_simple_atom(rng, space, filt, sampler.p, kInfinity);
      return AtomSample{std::move(space), std::move(filt), std::move(atom)};
    }
    case SampleFamily::lipschitz: {
      MeasureSpace space =
          random_space(rng, sampler.points, sampler.random_weights);
      Filtration filt = random_filtration(rng, sampler.points, sampler.levels);
      // Increment scale tied to block mass keeps the oscillation norm tame.
      const double alpha = 1.0 / sampler.p - 1.0;
      Func f(space.size(), 0.0);
      for (int k = filt.k_min + 1; k <= filt.k_max(); ++k) {
        Func eps(space.size(), 0.0);
        for (const auto& block : filt.level(k).blocks) {
          CompensatedSum mass;
          for (int p : block) mass.add(space.weight(p));
          const double sign = rng.next_double() < 0.5 ? -1.0 : 1.0;
          const double scale = std::pow(mass.value(), alpha);
          for (int p : block) eps[p] = sign * scale;
        }
        const Func pred =
            conditional_expectation(space, filt.level(k - 1), eps);
        for (int p = 0; p < space.size(); ++p) f[p] += eps[p] - pred[p];
      }
      return MartingaleSample{std::move(space), std::move(filt), f, f};
    }
    case SampleFamily::multiplier: {
      QuasiMetricSpace space = random_cloud(rng, sampler.points, sampler.dim,
                                            sampler.random_weights);
      const int O = static_cast<int>(rng.next_below(space.size()));
      const double alpha = sampler.p < 1.0 ? 1.0 / sampler.p - 1.0 : 0.0;
      Func h(space.size());
      for (int i = 0; i < space.size(); ++i) {
        const double d = space.distance(i, O);
        const double m = space.ball_mass(O, d);
        const double profile =
            1.0 / ((1.0 + std::pow(m, alpha)) * std::log(kE + d));
        h[i] = (2.0 * rng.next_double() - 1.0) * profile;
      }
      return MultiplierSample{std::move(space), O, std::move(h)};
    }
    case SampleFamily::metric_cloud: {
      QuasiMetricSpace space = random_cloud(rng, sampler.points, sampler.dim,
                                            sampler.random_weights);
      return MetricCloudSample{std::move(space)};
    }
  }
  throw std::invalid_argument("unknown sampler family");
}

Json VerificationReport::to_json(bool include_runtime) const {
  Json j;
  j["suite"] = suite;
  j["seed"] = seed;
  j["trials"] = trials;
  j["skipped"] = skipped;
  j["pass"] = pass;
  j["sup_ratio"] = sup_ratio;
  Json q;
  for (const auto& [k, v] : quantiles) q[k] = v;
  j["quantiles"] = std::move(q);
  Json m;
  for (const auto& [k, v] : metrics) m[k] = v;
  j["metrics"] = std::move(m);
  Json w;
  w["trial"] = witness.trial;
  w["seed"] = witness.seed;
  w["note"] = witness.note;
  j["witness"] = std::move(w);
  j["detail"] = detail;
  if (include_runtime) j["runtime_ms"] = runtime_ms;
  return j;
}

void report_to_csv(const VerificationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "suite,seed,trials,skipped,pass,sup_ratio";
  for (const auto& [k, v] : report.quantiles) out << "," << k;
  for (const auto& [k, v] : report.metrics) out << "," << k;
  out << "\n";
  out << report.suite << "," << report.seed << "," << report.trials << ","
      << report.skipped << "," << (report.pass ? 1 : 0) << ","
      << format_double(report.sup_ratio);
  for (const auto& [k, v] : report.quantiles) out << "," << format_double(v);
  for (const auto& [k, v] : report.metrics) out << "," << format_double(v);
  out << "\n";
}

namespace {

struct TrialContext {
  int index = 0;
  std::uint64_t seed = 0;
  int size = 0;
  int rung = 0;
};

// Shared trial loop: distributes trials over the size ladder, tracks the
// ratio distribution and per-rung sups, and replays the witness trial.
class RatioHarness {
 public:
  RatioHarness(std::string suite, const SuiteConfig& config, int default_trials)
      : config_(config) {
    report_.suite = std::move(suite);
    report_.seed = config.seed;
    total_trials_ = config.trials > 0 ? config.trials : default_trials;
    sizes_ = config.sizes.empty() ? std::vector<int>{64, 256, 512}
                                  : config.sizes;
  }

  // fn returns the trial's ratio, or nullopt for a degenerate trial. It must
  // be deterministic in ctx.seed and ctx.size.
  void run(const std::function<std::optional<double>(const TrialContext&)>& fn) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<double> shares = rung_shares();
    std::vector<double> rung_sup(sizes_.size(), 0.0);
    std::vector<int> rung_count(sizes_.size(), 0);

    int index = 0;
    for (std::size_t rung = 0; rung < sizes_.size(); ++rung) {
      const int count = static_cast<int>(shares[rung]);
      for (int t = 0; t < count; ++t, ++index) {
        TrialContext ctx;
        ctx.index = index;
        ctx.seed = mix_seed(config_.seed, index);
        ctx.size = sizes_[rung];
        ctx.rung = static_cast<int>(rung);
        ++report_.trials;
        std::optional<double> ratio = fn(ctx);
        if (!ratio.has_value()) {
          ++report_.skipped;
          continue;
        }
        ratios_.push_back(*ratio);
        ++rung_count[rung];
        rung_sup[rung] = std::max(rung_sup[rung], *ratio);
        if (*ratio > report_.sup_ratio || ratios_.size() == 1) {
          report_.sup_ratio = std::max(report_.sup_ratio, *ratio);
          report_.witness = Witness{index, ctx.seed,
                                    "size=" + std::to_string(ctx.size)};
          witness_ctx_ = ctx;
        }
      }
    }

    finalize(fn, rung_sup, rung_count);
    report_.runtime_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
  }

  void add_metric(const std::string& key, double value) {
    report_.metrics[key] = value;
  }
  void max_metric(const std::string& key, double value) {
    auto [it, inserted] = report_.metrics.try_emplace(key, value);
    if (!inserted) it->second = std::max(it->second, value);
  }
  void min_metric(const std::string& key, double value) {
    auto [it, inserted] = report_.metrics.try_emplace(key, value);
    if (!inserted) it->second = std::min(it->second, value);
  }
  void fail(const std::string& why) {
    failed_ = true;
    if (report_.detail.empty()) report_.detail = why;
  }

  VerificationReport take(double degenerate_budget = 0.1) {
    const bool enough =
        report_.trials == 0 ||
        report_.skipped <= degenerate_budget * report_.trials;
    if (!enough && report_.detail.empty()) {
      report_.detail = "too many degenerate trials";
    }
    report_.pass = !failed_ && enough && std::isfinite(report_.sup_ratio) &&
                   ladder_ok_;
    if (!ladder_ok_ && report_.detail.empty()) {
      report_.detail = "monotone ladder growth beyond factor 3";
    }
    return report_;
  }

  const std::vector<int>& sizes() const { return sizes_; }

 private:
  std::vector<double> rung_shares() const {
    // Front-load the small sizes; the ladder only needs enough mass per rung.
    std::vector<double> shares(sizes_.size(), 0.0);
    if (sizes_.size() == 1) {
      shares[0] = total_trials_;
      return shares;
    }
    const double weights[3] = {0.7, 0.2, 0.1};
    int assigned = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      const double w = i < 3 ? weights[i] : 0.1;
      int c = std::max(1, static_cast<int>(total_trials_ * w));
      if (i + 1 == sizes_.size()) c = std::max(1, total_trials_ - assigned);
      shares[i] = c;
      assigned += c;
    }
    return shares;
  }

  void finalize(
      const std::function<std::optional<double>(const TrialContext&)>& fn,
      const std::vector<double>& rung_sup, const std::vector<int>& rung_count) {
    if (!ratios_.empty()) {
      std::vector<double> sorted = ratios_;
      std::sort(sorted.begin(), sorted.end());
      auto at = [&](double q) {
        const std::size_t idx = static_cast<std::size_t>(
            std::min<double>(sorted.size() - 1, q * sorted.size()));
        return sorted[idx];
      };
      report_.quantiles["q50"] = at(0.50);
      report_.quantiles["q90"] = at(0.90);
      report_.quantiles["q99"] = at(0.99);
      report_.quantiles["min"] = sorted.front();
      report_.quantiles["max"] = sorted.back();
    }
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (rung_count[i] > 0) {
        report_.metrics["rung_sup_" + std::to_string(sizes_[i])] = rung_sup[i];
      }
    }
    // Monotone growth beyond 3x across the ladder flags a bug.
    std::vector<double> sups;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (rung_count[i] > 0 && rung_sup[i] > 0.0) sups.push_back(rung_sup[i]);
    }
    if (sups.size() >= 2) {
      bool monotone = true;
      for (std::size_t i = 1; i < sups.size(); ++i) {
        if (sups[i] < sups[i - 1]) monotone = false;
      }
      ladder_ok_ = !(monotone && sups.back() > 3.0 * sups.front());
    }
    // Witness replay must agree to 1e-12.
    if (witness_ctx_.has_value()) {
      const std::optional<double> again = fn(*witness_ctx_);
      if (!again.has_value() ||
          std::abs(*again - report_.sup_ratio) >
              1e-12 * std::max(1.0, std::abs(report_.sup_ratio))) {
        fail("witness replay mismatch");
      }
    }
  }

  SuiteConfig config_;
  int total_trials_ = 0;
  std::vector<int> sizes_;
  std::vector<double> ratios_;
  VerificationReport report_;
  std::optional<TrialContext> witness_ctx_;
  bool failed_ = false;
  bool ladder_ok_ = true;
};

int pick_levels(Rng& rng, int max_levels) {
  return 2 + static_cast<int>(rng.next_below(std::max(1, max_levels - 1)));
}

struct PairSample {
  MeasureSpace space;
  Filtration filt;
  Func f;
  Func g;
};

PairSample make_pair(const TrialContext& ctx, bool rademacher_g) {
  Rng rng(ctx.seed);
  const int n = 4 + static_cast<int>(rng.next_below(ctx.size - 3));
  const int levels = pick_levels(rng, 12);
  MeasureSpace space = random_space(rng, n, true);
  Filtration filt = random_filtration(rng, n, levels);
  Func f = random_gaussian(rng, n);
  Func g = rademacher_g ? rademacher_increments(rng, space, filt, 0.6)
                        : random_gaussian(rng, n);
  return PairSample{std::move(space), std::move(filt), std::move(f),
                    std::move(g)};
}

// ---------------------------------------------------------------------------
// Suite implementations
// ---------------------------------------------------------------------------

VerificationReport suite_identity(const SuiteConfig& config) {
  RatioHarness harness("identity", config, 1000);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    PairSample s = make_pair(ctx, false);
    const Paraproducts pp = paraproducts(s.space, s.filt, s.f, s.g);
    double residual = 0.0;
    for (int i = 0; i < s.space.size(); ++i) {
      residual = std::max(residual, std::abs(s.f[i] * s.g[i] - pp.pi1[i] -
                                             pp.pi2[i] - pp.pi3[i]));
    }
    const double tol = 1e-12 * (1.0 + sup_abs(s.f) * sup_abs(s.g));
    // Bitwise symmetry of the two mixed terms.
    const Paraproducts qq = paraproducts(s.space, s.filt, s.g, s.f);
    for (int i = 0; i < s.space.size(); ++i) {
      if (pp.pi2[i] != qq.pi3[i] || pp.pi3[i] != qq.pi2[i] ||
          pp.pi1[i] != qq.pi1[i]) {
        return std::nullopt;  // flagged below; should never happen
      }
    }
    return residual / tol;
  });
  VerificationReport report = harness.take();
  if (report.skipped > 0) {
    report.pass = false;
    report.detail = "paraproduct symmetry broken";
  }
  if (report.sup_ratio > 1.0) {
    report.pass = false;
    report.detail = "identity residual above tolerance";
  }
  return report;
}

VerificationReport suite_functional_identities(const SuiteConfig& config) {
  RatioHarness harness("functional-identities", config, 200);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const int n = 4 + static_cast<int>(rng.next_below(ctx.size - 3));
    const int levels = pick_levels(rng, 9);
    MeasureSpace space = random_space(rng, n, true);
    Filtration filt = random_filtration(rng, n, levels);
    Func f = random_gaussian(rng, n);

    double worst = 0.0;

    const MartingaleExpansion exp = expand(space, filt, f, true);
    const Func S = square_function(exp);
    const Func s = conditional_square_function(space, filt, exp);
    CompensatedSum diff, scale;
    for (int i = 0; i < n; ++i) {
      diff.add(space.weight(i) * (S[i] * S[i] - s[i] * s[i]));
      scale.add(space.weight(i) * S[i] * S[i]);
    }
    worst = std::max(worst, std::abs(diff.value()) /
                                (1e-10 * std::max(scale.value(), 1e-300)));

    // Projection and tower.
    for (int k = filt.k_min; k <= filt.k_max(); ++k) {
      const Func ek = conditional_expectation(space, filt.level(k), f);
      const Func ekk = conditional_expectation(space, filt.level(k), ek);
      for (int i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(ekk[i] - ek[i]) /
                                    (1e-12 * std::max(1.0, std::abs(ek[i]))));
      }
      for (int j = filt.k_min; j <= k; ++j) {
        const Func ejk = conditional_expectation(space, filt.level(j), ek);
        const Func ej = conditional_expectation(space, filt.level(j), f);
        for (int i = 0; i < n; ++i) {
          worst = std::max(worst, std::abs(ejk[i] - ej[i]) /
                                      (1e-12 * std::max(1.0, std::abs(ej[i]))));
        }
      }
      CompensatedSum kept;
      for (int i = 0; i < n; ++i) kept.add(space.weight(i) * ek[i]);
      const double total = space.integral(f);
      double l1 = 0.0;
      for (int i = 0; i < n; ++i) l1 += space.weight(i) * std::abs(f[i]);
      worst = std::max(worst, std::abs(kept.value() - total) /
                                  (1e-12 * std::max(l1, 1e-300)));
    }

    // Restriction compatibility on a random block.
    const int level =
        filt.k_min + static_cast<int>(rng.next_below(filt.level_count()));
    const int block_id = static_cast<int>(
        rng.next_below(filt.level(level).block_count()));
    const RestrictedSpace rs = restrict_space(space, filt, level, block_id);
    Func f_on_a(rs.space.size());
    Func f_masked(n, 0.0);
    for (std::size_t i = 0; i < rs.points.size(); ++i) {
      f_on_a[i] = f[rs.points[i]];
      f_masked[rs.points[i]] = f[rs.points[i]];
    }
    for (int k = 0; k < rs.filt.level_count(); ++k) {
      const Func inner =
          conditional_expectation(rs.space, rs.filt.partitions[k], f_on_a);
      const Func outer = conditional_expectation(
          space, filt.level(level + k), f_masked);
      for (std::size_t i = 0; i < rs.points.size(); ++i) {
        worst = std::max(worst,
                         std::abs(inner[i] - outer[rs.points[i]]) /
                             (1e-12 * std::max(1.0, std::abs(inner[i]))));
      }
    }
    return worst;
  });
  VerificationReport report = harness.take();
  if (report.sup_ratio > 1.0) {
    report.pass = false;
    report.detail = "functional identity above tolerance";
  }
  return report;
}

VerificationReport suite_atomic(const SuiteConfig& config) {
  RatioHarness harness("atomic", config, 90);
  bool all_valid = true;
  double worst_recon = 0.0;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const int n = 4 + static_cast<int>(rng.next_below(ctx.size - 3));
    const int levels = pick_levels(rng, 9);
    MeasureSpace space = random_space(rng, n, true);
    Filtration filt = random_filtration(rng, n, levels);
    const double ps[3] = {0.5, 0.7, 1.0};
    const double p = ps[ctx.index % 3];
    const double q = ctx.index % 2 == 0 ? 2.0 : kInfinity;
    Func f = center_base(space, filt, random_gaussian(rng, n));

    const AtomicDecomposition dec =
        stopping_time_decomposition(space, filt, f, p, q);
    const Func rec = reconstruct(dec, n);
    double residual = 0.0;
    for (int i = 0; i < n; ++i) {
      residual = std::max(residual, std::abs(rec[i] - f[i]));
    }
    worst_recon = std::max(worst_recon, residual);
    for (const AtomicTerm& term : dec.terms) {
      if (!validate_simple_atom(space, filt, term.atom).ok()) {
        all_valid = false;
      }
    }
    const double den = hardy_norm(space, filt, f, NormVariant::hp_s, p);
    if (den <= 1e-300) return std::nullopt;
    return dec.quasi_norm() / den;
  });
  harness.add_metric("max_reconstruction_error", worst_recon);
  VerificationReport report = harness.take();
  if (worst_recon > 1e-10) {
    report.pass = false;
    report.detail = "reconstruction error above 1e-10";
  }
  if (!all_valid) {
    report.pass = false;
    report.detail = "emitted atom failed validation";
  }
  return report;
}

VerificationReport suite_doob_constant(const SuiteConfig& config) {
  RatioHarness harness("doob-constant", config, 900);
  bool all_ok = true;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double ps[3] = {0.3, 0.5, 0.8};
    const double p = ps[ctx.index % 3];
    const int n = 4 + static_cast<int>(rng.next_below(ctx.size - 3));
    const int levels = pick_levels(rng, 9);
    MeasureSpace space = random_space(rng, n, true);
    Filtration filt = random_filtration(rng, n, levels);
    SimpleAtom atom = random_simple_atom(rng, space, filt, p, 1.0);

    Func f = atom.values;
    const double l1 = lp_norm(space, f, 1.0);
    if (l1 <= 1e-300) return std::nullopt;
    if (l1 > 1.0) {
      for (double& v : f) v /= l1;
    }
    const Func fstar = maximal_function(expand(space, filt, f, true));
    const double value = std::pow(lp_norm(space, fstar, p), p);
    const double bound = 1.0 / (1.0 - p);
    if (value > bound + 1e-9) all_ok = false;
    return value / bound;
  });
  VerificationReport report = harness.take();
  if (!all_ok) {
    report.pass = false;
    report.detail = "maximal bound exceeded 1/(1-p) + 1e-9";
  }
  return report;
}

VerificationReport suite_lipschitz_char(const SuiteConfig& config) {
  RatioHarness harness("lipschitz-char", config, 1000);
  bool lower_ok = true;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double p = ctx.index % 2 == 0 ? 0.5 : 0.75;
    const int n = 4 + static_cast<int>(rng.next_below(ctx.size - 3));
    const int levels = pick_levels(rng, 9);
    Sampler s;
    s.seed = ctx.seed;
    s.family = SampleFamily::lipschitz;
    s.points = n;
    s.levels = levels;
    s.p = p;
    const auto obj = sample(s);
    const auto& ms = std::get<MartingaleSample>(obj);

    const double den = lipschitz_norm(ms.space, ms.filt, ms.f, p, 1);
    if (den <= 1e-300) return std::nullopt;
    const double num = lipschitz_sup_norm(ms.space, ms.filt, ms.f, p);
    if (num < den * (1.0 - 1e-12)) lower_ok = false;
    return num / den;
  });
  VerificationReport report = harness.take();
  if (!lower_ok) {
    report.pass = false;
    report.detail = "sup characterization fell below the average form";
  }
  return report;
}

VerificationReport suite_holder(const SuiteConfig& config) {
  RatioHarness harness("holder", config, 1000);
  const OrliczFunction phi = OrliczFunction::t_over_log();
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    PairSample s = make_pair(ctx, true);
    const double den =
        lp_norm(s.space, s.f, 1.0) *
        bmo_norm(s.space, s.filt, s.g, NormVariant::BMO, true);
    if (den <= 1e-300) return std::nullopt;
    const double num =
        luxembourg_norm(s.space, phi, pointwise_product(s.f, s.g));
    return num / den;
  });
  return harness.take();
}

VerificationReport suite_bmo_compare(const SuiteConfig& config) {
  RatioHarness harness("bmo-compare", config, 1000);
  int flagged = 0;
  double min_ratio = kInfinity;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    PairSample s = make_pair(ctx, ctx.index % 2 == 0);
    const double big = bmo_norm(s.space, s.filt, s.g, NormVariant::BMO, true);
    if (big <= 1e-300) return std::nullopt;
    const double small =
        bmo_norm(s.space, s.filt, s.g, NormVariant::bmo, true);
    double supdiff = 0.0;
    for (const Func& d : expand(s.space, s.filt, s.g, true).diffs) {
      supdiff = std::max(supdiff, sup_abs(d));
    }
    const double ratio = (small + supdiff) / big;
    if (ratio < 0.01 || ratio > 100.0) ++flagged;
    min_ratio = std::min(min_ratio, ratio);
    return ratio;
  });
  harness.add_metric("flagged", flagged);
  harness.add_metric("min_ratio", min_ratio);
  VerificationReport report = harness.take();
  if (flagged > 0) {
    report.pass = false;
    report.detail = "equivalence ratio escaped [1/100, 100]";
  }
  return report;
}

VerificationReport suite_maximal_bmo(const SuiteConfig& config) {
  RatioHarness harness("maximal-bmo", config, 600);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    PairSample s = make_pair(ctx, true);
    const double bmo = bmo_norm(s.space, s.filt, s.g, NormVariant::BMO, true);
    if (bmo <= 1e-300) return std::nullopt;
    const BmoMaximalReport r = check_bmo_maximal(s.space, s.filt, s.g);
    return std::max(r.base_ratio, r.bmo_ratio);
  });
  return harness.take();
}

VerificationReport suite_product_bounds_h1(const SuiteConfig& config) {
  RatioHarness harness("product-bounds-h1", config, 600);
  const OrliczFunction phi = OrliczFunction::t_over_log();
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    PairSample s = make_pair(ctx, true);
    const double h1 = hardy_norm(s.space, s.filt, s.f, NormVariant::Hp_S, 1.0);
    const double bmo = bmo_norm(s.space, s.filt, s.g, NormVariant::BMO, true);
    const double den = h1 * bmo;
    if (den <= 1e-300) return std::nullopt;
    const Paraproducts pp = paraproducts(s.space, s.filt, s.f, s.g);
    const double r1 = lp_norm(s.space, pp.pi1, 1.0) / den;
    const double r2 =
        hardy_norm(s.space, s.filt, pp.pi2, NormVariant::Hp_S, 1.0) / den;
    const Func s_pi3 = square_function(expand(s.space, s.filt, pp.pi3, true));
    const double r3 = luxembourg_norm(s.space, phi, s_pi3) / den;
    harness.max_metric("pi1_sup", r1);
    harness.max_metric("pi2_sup", r2);
    harness.max_metric("pi3_sup", r3);
    return std::max({r1, r2, r3});
  });
  return harness.take();
}

VerificationReport suite_product_bounds_hp(const SuiteConfig& config) {
  RatioHarness harness("product-bounds-hp", config, 600);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double p = ctx.index % 2 == 0 ? 0.5 : 0.75;
    const int n = 4 + static_cast<int>(rng.next_below(ctx.size - 3));
    const int levels = pick_levels(rng, 9);
    Sampler lip;
    lip.seed = mix_seed(ctx.seed, 17);
    lip.family = SampleFamily::lipschitz;
    lip.points = n;
    lip.levels = levels;
    lip.p = p;
    const auto obj = sample(lip);
    const auto& base = std::get<MartingaleSample>(obj);
    const Func f = random_gaussian(rng, base.space.size());
    const Func& g = base.f;

    const double hp =
        hardy_norm(base.space, base.filt, f, NormVariant::Hp_S, p);
    const double lam = lipschitz_norm(base.space, base.filt, g, p, 1);
    const double den = hp * lam;
    if (den <= 1e-300) return std::nullopt;
    const Paraproducts pp = paraproducts(base.space, base.filt, f, g);
    const double r1 = lp_norm(base.space, pp.pi1, 1.0) / den;
    const double r2 =
        hardy_norm(base.space, base.filt, pp.pi2, NormVariant::Hp_S, 1.0) /
        den;
    const double r3 =
        hardy_norm(base.space, base.filt, pp.pi3, NormVariant::Hp_S, p) / den;
    harness.max_metric("pi1_sup", r1);
    harness.max_metric("pi2_sup", r2);
    harness.max_metric("pi3_sup", r3);
    return std::max({r1, r2, r3});
  });
  return harness.take();
}

VerificationReport suite_lipschitz_linf(const SuiteConfig& config) {
  RatioHarness harness("lipschitz-linf", config, 800);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double p = ctx.index % 2 == 0 ? 0.5 : 0.75;
    const int n = 4 + static_cast<int>(rng.next_below(ctx.size - 3));
    const int levels = pick_levels(rng, 9);
    MeasureSpace space = random_space(rng, n, true);
    Filtration filt = random_filtration(rng, n, levels);
    const Func g = random_gaussian(rng, n);
    const double den = lipschitz_norm(space, filt, g, p, 1);
    if (den <= 1e-300) return std::nullopt;
    const Func centered = center_base(space, filt, g);
    return sup_abs(centered) / den;
  });
  return harness.take();
}

VerificationReport suite_john_nirenberg(const SuiteConfig& config) {
  RatioHarness harness("john-nirenberg", config, 400);
  double kappa_min = kInfinity;
  std::vector<double> kappas;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    PairSample s = make_pair(ctx, true);
    const double bmo = bmo_norm(s.space, s.filt, s.g, NormVariant::BMO, true);
    if (bmo <= 1e-300) return std::nullopt;
    Func u(s.g.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = std::abs(s.g[i]) / bmo;
    }
    auto exp_moment = [&](double kappa) {
      CompensatedSum acc;
      for (int i = 0; i < s.space.size(); ++i) {
        acc.add(s.space.weight(i) * std::exp(kappa * u[i]));
      }
      return acc.value();
    };
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (exp_moment(hi) < 2.0 && guard++ < 200) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (exp_moment(mid) < 2.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double kappa = 0.5 * (lo + hi);
    kappa_min = std::min(kappa_min, kappa);
    kappas.push_back(kappa);
    return 1.0 / kappa;
  });
  harness.add_metric("kappa_min", kappa_min);
  if (!kappas.empty()) {
    std::sort(kappas.begin(), kappas.end());
    harness.add_metric("kappa_median", kappas[kappas.size() / 2]);
  }
  VerificationReport report = harness.take();
  if (!(kappa_min > 0.0)) {
    report.pass = false;
    report.detail = "empirical kappa collapsed to zero";
  }
  return report;
}

VerificationReport suite_luxembourg(const SuiteConfig& config) {
  RatioHarness harness("luxembourg", config, 500);
  const OrliczFunction phi = OrliczFunction::t_over_log();
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const int mode = ctx.index % 3;
    double worst = 0.0;
    if (mode == 0) {
      const int n = 4 + static_cast<int>(rng.next_below(ctx.size - 3));
      MeasureSpace space = random_space(rng, n, true);
      Func f = random_gaussian(rng, n);
      for (double& v : f) v = std::exp(v);  // strictly positive, spread out
      const double lam = luxembourg_norm(space, phi, f);
      CompensatedSum integral;
      for (int i = 0; i < n; ++i) {
        integral.add(space.weight(i) * phi.eval(std::abs(f[i]) / lam));
      }
      worst = std::max(worst, std::abs(integral.value() - 1.0) / 1e-8);
      Func f2(f);
      for (double& v : f2) v *= 2.0;
      const double lam2 = luxembourg_norm(space, phi, f2);
      worst = std::max(worst, std::abs(lam2 - 2.0 * lam) / (1e-9 * 2.0 * lam));
      // Monotonicity under a pointwise increase.
      Func fg(f);
      for (double& v : fg) v += 0.3;
      const double lam_up = luxembourg_norm(space, phi, fg);
      if (lam > lam_up + 1e-10) worst = std::max(worst, 2.0);
    } else {
      const int n = std::min(ctx.size, 192);
      QuasiMetricSpace cloud =
          random_cloud(rng, std::max(8, n), 1 + (ctx.index % 2), true);
      const int O = static_cast<int>(rng.next_below(cloud.size()));
      const MusielakFunction psi = mode == 1
                                       ? psi_1(cloud, O)
                                       : psi_p(cloud, O, ctx.index % 2 ? 0.75 : 0.5);
      MeasureSpace ms(SpaceKind::sigma_finite, cloud.weights());
      Func f = random_gaussian(rng, cloud.size());
      const double lam = luxembourg_norm(ms, psi, f);
      CompensatedSum integral;
      for (int i = 0; i < cloud.size(); ++i) {
        integral.add(ms.weight(i) * psi.eval(i, std::abs(f[i]) / lam));
      }
      worst = std::max(worst, std::abs(integral.value() - 1.0) / 1e-8);
    }
    return worst;
  });
  VerificationReport report = harness.take();
  if (report.sup_ratio > 1.0) {
    report.pass = false;
    report.detail = "luxembourg root or scaling out of tolerance";
  }
  return report;
}

VerificationReport suite_sum_norm(const SuiteConfig& config) {
  RatioHarness harness("sum-norm", config, 300);
  bool descent_ok = true;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    PairSample s = make_pair(ctx, false);
    const SumNormSplit left =
        sum_norm_upper(s.space, s.filt, s.f, SplitStrategy::trivial_left);
    const SumNormSplit right =
        sum_norm_upper(s.space, s.filt, s.f, SplitStrategy::trivial_right);
    const SumNormSplit cd = sum_norm_upper(s.space, s.filt, s.f,
                                           SplitStrategy::coordinate_descent);
    const double best_trivial = std::min(left.value, right.value);
    if (cd.value > best_trivial * (1.0 + 1e-9)) descent_ok = false;
    for (int i = 0; i < s.space.size(); ++i) {
      if (std::abs(cd.left[i] + cd.right[i] - s.f[i]) >
          1e-10 * std::max(1.0, std::abs(s.f[i]))) {
        descent_ok = false;
      }
    }
    if (cd.value <= 1e-300) return std::nullopt;
    return hardy_norm(s.space, s.filt, s.f, NormVariant::Hp_S, 1.0) / cd.value;
  });
  VerificationReport report = harness.take();
  if (!descent_ok) {
    report.pass = false;
    report.detail = "descent exceeded a trivial split or broke the sum";
  }
  return report;
}

int suggested_depth(const QuasiMetricSpace& space) {
  double dmin = kInfinity;
  for (int i = 0; i < space.size(); ++i) {
    const auto& ord = space.by_distance(i);
    if (space.size() > 1) {
      dmin = std::min(dmin, space.distance(i, ord[1]));
    }
  }
  if (!std::isfinite(dmin) || dmin <= 0.0) return 4;
  const int depth = static_cast<int>(std::ceil(std::log2(1.0 / dmin))) + 1;
  return std::min(std::max(depth, 4), 48);
}

VerificationReport suite_dyadic_props(const SuiteConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.suite = "dyadic-props";
  report.seed = config.seed;
  int violations = 0;
  int systems_checked = 0;

  auto check = [&](const QuasiMetricSpace& space, const DyadicSystem& sys) {
    ++systems_checked;
    const ValidationReport vr = verify_system(space, sys);
    violations += static_cast<int>(vr.issues.size());
    if (!vr.issues.empty() && report.detail.empty()) {
      report.detail = vr.issues.front();
    }
    const auto [ms, filt] = system_to_filtration(space, sys);
    const ValidationReport fr = validate_filtration(ms, filt);
    violations += static_cast<int>(fr.issues.size());
  };

  Rng rng(config.seed);
  {
    // Uniform 1-d grid, shifted grids.
    std::vector<std::array<double, 2>> coords;
    for (int i = 0; i < 64; ++i) coords.push_back({i / 64.0, 0.0});
    const auto space = QuasiMetricSpace::from_coordinates(
        coords, 1, std::vector<double>(64, 1.0 / 64.0), 1.0);
    const AdjacentSystems grids = euclidean_shifted_grids(space, 8, -2, false);
    for (const auto& sys : grids.systems) check(space, sys);
  }
  {
    // Random 1-d cloud, shifted grids.
    QuasiMetricSpace space = random_cloud(rng, 512, 1, true);
    const AdjacentSystems grids =
        euclidean_shifted_grids(space, suggested_depth(space), -2, false);
    for (const auto& sys : grids.systems) check(space, sys);
  }
  {
    // 2-d grid and cloud.
    std::vector<std::array<double, 2>> coords;
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) coords.push_back({i / 16.0, j / 16.0});
    }
    const auto space = QuasiMetricSpace::from_coordinates(
        coords, 2, std::vector<double>(256, 1.0 / 256.0), 1.0);
    const AdjacentSystems grids = euclidean_shifted_grids(space, 7, -2, false);
    for (const auto& sys : grids.systems) check(space, sys);

    QuasiMetricSpace cloud = random_cloud(rng, 256, 2, true);
    const AdjacentSystems grids2 =
        euclidean_shifted_grids(cloud, suggested_depth(cloud), -2, false);
    for (const auto& sys : grids2.systems) check(cloud, sys);
  }
  {
    // Net-based construction on a uniform 1-d grid.
    std::vector<std::array<double, 2>> coords;
    for (int i = 0; i < 64; ++i) coords.push_back({i / 64.0, 0.0});
    const auto space = QuasiMetricSpace::from_coordinates(
        coords, 1, std::vector<double>(64, 1.0 / 64.0), 1.0);
    DyadicParams params{1.0 / 32.0, 1.0, 2.0, 0, 2};
    check(space, build_dyadic_system(space, params, mix_seed(config.seed, 5)));
  }
  {
    // Net-based construction on a circle.
    QuasiMetricSpace space = circle_cloud(rng, 128);
    DyadicParams params{1.0 / 32.0, 0.6, 1.2, 0, 2};
    check(space, build_dyadic_system(space, params, mix_seed(config.seed, 6)));
  }
  {
    // Single-point space: one cube per level.
    const auto space = QuasiMetricSpace::from_coordinates(
        {{0.25, 0.0}}, 1, {1.0}, 1.0);
    DyadicParams params{1.0 / 32.0, 1.0, 2.0, 0, 3};
    const DyadicSystem sys =
        build_dyadic_system(space, params, mix_seed(config.seed, 7));
    check(space, sys);
    for (const auto& level : sys.levels) {
      if (level.size() != 1) ++violations;
    }
  }

  report.trials = systems_checked;
  report.metrics["violations"] = violations;
  report.sup_ratio = violations;
  report.pass = violations == 0;
  report.runtime_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return report;
}

VerificationReport suite_adjacent_cover(const SuiteConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.suite = "adjacent-cover";
  report.seed = config.seed;
  report.pass = true;

  Rng rng(config.seed);
  auto run_case = [&](const std::string& name, const QuasiMetricSpace& space,
                      int depth, double bound) {
    const AdjacentSystems grids =
        euclidean_shifted_grids(space, depth, -2, true);
    report.metrics["C_" + name] = grids.covering_constant;
    report.sup_ratio = std::max(report.sup_ratio, grids.covering_constant);
    ++report.trials;
    if (grids.covering_constant > bound + 1e-9) {
      report.pass = false;
      if (report.detail.empty()) {
        report.detail = "covering constant above bound in " + name;
      }
    }
  };

  {
    std::vector<std::array<double, 2>> coords;
    for (int i = 0; i < 64; ++i) coords.push_back({i / 64.0, 0.0});
    run_case("uniform64_1d",
             QuasiMetricSpace::from_coordinates(
                 coords, 1, std::vector<double>(64, 1.0 / 64.0), 1.0),
             8, 6.0);
  }
  {
    QuasiMetricSpace cloud = random_cloud(rng, 512, 1, true);
    run_case("random512_1d", cloud, suggested_depth(cloud), 6.0);
  }
  {
    std::vector<std::array<double, 2>> coords;
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) coords.push_back({i / 16.0, j / 16.0});
    }
    run_case("grid256_2d",
             QuasiMetricSpace::from_coordinates(
                 coords, 2, std::vector<double>(256, 1.0 / 256.0), 1.0),
             7, 6.0 * std::sqrt(2.0));
  }
  {
    QuasiMetricSpace cloud = random_cloud(rng, 256, 2, true);
    run_case("random256_2d", cloud, suggested_depth(cloud),
             6.0 * std::sqrt(2.0));
  }

  report.runtime_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return report;
}

VerificationReport suite_adjacent_general(const SuiteConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.suite = "adjacent-general";
  report.seed = config.seed;
  report.pass = true;

  Rng rng(config.seed);
  try {
    {
      QuasiMetricSpace space = circle_cloud(rng, 128);
      DyadicParams params{1.0 / 96.0, 0.6, 1.2, 0, 2};
      const AdjacentSystems adj =
          build_adjacent_systems(space, params, 8, mix_seed(config.seed, 1));
      report.metrics["circle_C"] = adj.covering_constant;
      report.metrics["circle_K"] = static_cast<double>(adj.systems.size());
      ++report.trials;
    }
    {
      QuasiMetricSpace space = random_cloud(rng, 64, 1, false);
      DyadicParams params{1.0 / 96.0, 0.6, 1.2, 0, 2};
      const AdjacentSystems adj =
          build_adjacent_systems(space, params, 4, mix_seed(config.seed, 2));
      report.metrics["cloud_C"] = adj.covering_constant;
      ++report.trials;
    }
  } catch (const std::exception& e) {
    report.pass = false;
    report.detail = e.what();
  }
  report.sup_ratio = report.metrics.count("circle_C")
                         ? report.metrics["circle_C"]
                         : kInfinity;
  report.runtime_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return report;
}

VerificationReport suite_hardy_variants(const SuiteConfig& config) {
  SuiteConfig local = config;
  local.sizes = {48, 96, 160};
  RatioHarness harness("hardy-variants", local, 150);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    QuasiMetricSpace cloud =
        random_cloud(rng, std::max(8, ctx.size), 1, true);
    const AdjacentSystems grids =
        euclidean_shifted_grids(cloud, suggested_depth(cloud), -2, false);
    const auto [ms, filt] = system_to_filtration(cloud, grids.systems[0]);
    const double p = ctx.index % 2 == 0 ? 0.6 : 1.0;
    const Func f = center_base(ms, filt, random_gaussian(rng, ms.size()));

    const double a = hardy_norm(ms, filt, f, NormVariant::Hp_S, p);
    const double b = hardy_norm(ms, filt, f, NormVariant::hp_s, p);
    const double c = hardy_norm(ms, filt, f, NormVariant::Hp_max, p);
    const double d = atomic_norm_upper(ms, filt, f, p, 2.0);
    const double lo = std::min(std::min(a, b), std::min(c, d));
    const double hi = std::max(std::max(a, b), std::max(c, d));
    if (lo <= 1e-300) return std::nullopt;
    return hi / lo;
  });
  return harness.take();
}

VerificationReport suite_hardy_equiv(const SuiteConfig& config) {
  SuiteConfig local = config;
  local.sizes = {32, 64, 96};
  RatioHarness harness("hardy-equiv", local, 300);
  bool atoms_ok = true;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const int dim = 1 + static_cast<int>(ctx.index % 2);
    QuasiMetricSpace cloud =
        random_cloud(rng, std::max(8, ctx.size), dim, true);
    const AdjacentSystems grids =
        euclidean_shifted_grids(cloud, suggested_depth(cloud), -2, false);
    const double p = 0.6;
    const double alpha = 1.0 / p - 1.0;
    const Func g = random_gaussian(rng, cloud.size());

    const double ball_lip = ball_norm(cloud, g, BallNormKind::Lip_alpha, alpha);
    const double ball_bmo = ball_norm(cloud, g, BallNormKind::BMO_mu);
    double dy_lip = 0.0, dy_bmo = 0.0;
    for (const auto& sys : grids.systems) {
      const auto [ms, filt] = system_to_filtration(cloud, sys);
      dy_lip = std::max(dy_lip, lipschitz_norm(ms, filt, g, p, 2));
      dy_bmo = std::max(dy_bmo, event_oscillation_sup(ms, filt, g, 0.0, 1.0));
    }
    if (std::min(std::min(ball_lip, ball_bmo), std::min(dy_lip, dy_bmo)) <=
        1e-300) {
      return std::nullopt;
    }
    harness.max_metric("lip_ball_over_dyadic", ball_lip / dy_lip);
    harness.max_metric("lip_dyadic_over_ball", dy_lip / ball_lip);
    harness.max_metric("bmo_ball_over_dyadic", ball_bmo / dy_bmo);
    harness.max_metric("bmo_dyadic_over_ball", dy_bmo / ball_bmo);

    // Atom conversion round trip.
    BallAtom atom;
    atom.center = static_cast<int>(rng.next_below(cloud.size()));
    const auto& ord = cloud.by_distance(atom.center);
    const int reach = 1 + static_cast<int>(rng.next_below(cloud.size() - 1));
    atom.radius = cloud.distance(atom.center, ord[reach]) * (1.0 + 1e-9);
    atom.p = p;
    atom.q = kInfinity;
    atom.values.assign(cloud.size(), 0.0);
    const std::vector<int> inside = cloud.ball(atom.center, atom.radius);
    if (inside.size() < 2) return ball_lip / dy_lip;
    for (int pt : inside) atom.values[pt] = rng.next_gaussian();
    CompensatedSum mass, mean;
    for (int pt : inside) {
      mass.add(cloud.weight(pt));
      mean.add(cloud.weight(pt) * atom.values[pt]);
    }
    const double avg = mean.value() / mass.value();
    double sup = 0.0;
    for (int pt : inside) {
      atom.values[pt] -= avg;
      sup = std::max(sup, std::abs(atom.values[pt]));
    }
    if (sup > 0.0) {
      const double bound =
          std::pow(cloud.ball_mass(atom.center, atom.radius), -1.0 / p);
      for (int pt : inside) atom.values[pt] *= 0.9 * bound / sup;
    }
    if (!validate_ball_atom(cloud, atom).ok()) atoms_ok = false;

    const ConvertedAtom conv = ball_atom_to_dyadic(cloud, grids, atom);
    const auto [ms_t, filt_t] =
        system_to_filtration(cloud, grids.systems[conv.system]);
    if (!validate_simple_atom(ms_t, filt_t, conv.atom).ok()) atoms_ok = false;
    const BallConvertedAtom back =
        dyadic_atom_to_ball(cloud, grids.systems[conv.system], conv.atom);
    if (!validate_ball_atom(cloud, back.atom).ok()) atoms_ok = false;
    harness.max_metric("conversion_scalar", std::abs(conv.scalar * back.scalar));

    return std::max(std::max(ball_lip / dy_lip, dy_lip / ball_lip),
                    std::max(ball_bmo / dy_bmo, dy_bmo / ball_bmo));
  });
  VerificationReport report = harness.take();
  if (!atoms_ok) {
    report.pass = false;
    report.detail = "converted atom failed validation";
  }
  return report;
}

VerificationReport suite_holder1(const SuiteConfig& config) {
  SuiteConfig local = config;
  local.sizes = {48, 128, 256};
  RatioHarness harness("holder1", local, 1000);
  double psi_profile_sup = 0.0;
  double weight_bound_sup = 0.0;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    QuasiMetricSpace cloud =
        random_cloud(rng, std::max(8, ctx.size), 1, true);
    const AdjacentSystems grids =
        euclidean_shifted_grids(cloud, suggested_depth(cloud), -2, false);
    const DyadicSystem& sys = grids.systems[0];
    const int O = static_cast<int>(rng.next_below(cloud.size()));
    const BasePointContext ctx_base = make_base_point_context(cloud, sys, O);

    const Func f = random_gaussian(rng, cloud.size());
    const Func g = random_gaussian(rng, cloud.size());
    MeasureSpace ms(SpaceKind::sigma_finite, cloud.weights());
    const double den =
        lp_norm(ms, f, 1.0) *
        plus_norm(cloud, sys, ctx_base, g, PlusNormKind::BMO_plus, 1.0);
    if (den <= 1e-300) return std::nullopt;
    const double num =
        luxembourg_norm(ms, psi_1(cloud, O), pointwise_product(f, g));

    if (ctx.index % 200 == 0) {
      // Weight profile check for the damped growth function.
      const ConstantEstimates est = estimate_constants(cloud);
      const double expo = est.c_mu + 1.0;
      for (int i = 0; i < cloud.size(); ++i) {
        const double d = cloud.distance(i, O);
        const double w = std::pow(kE + d, -expo);
        const double cap = std::min(1.0, d > 0.0 ? std::pow(d, -expo) : 1.0);
        weight_bound_sup = std::max(weight_bound_sup, w / cap);
        for (double s : {0.25, 1.0, 4.0}) {
          for (double t : {0.25, 1.0, 4.0}) {
            const double lhs = musielak_psi(cloud, O, 1.0, i, s * t);
            const double rhs = w * std::exp(t) + s;
            psi_profile_sup = std::max(psi_profile_sup, lhs / rhs);
          }
        }
      }
    }
    return num / den;
  });
  harness.add_metric("weight_bound_sup", weight_bound_sup);
  harness.add_metric("psi_profile_sup", psi_profile_sup);
  VerificationReport report = harness.take();
  if (weight_bound_sup > 1.0 + 1e-12) {
    report.pass = false;
    report.detail = "weight profile exceeded its cap";
  }
  return report;
}

VerificationReport suite_holder2(const SuiteConfig& config) {
  SuiteConfig local = config;
  local.sizes = {48, 128, 256};
  RatioHarness harness("holder2", local, 1000);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double p = ctx.index % 2 == 0 ? 0.5 : 0.75;
    QuasiMetricSpace cloud =
        random_cloud(rng, std::max(8, ctx.size), 1, true);
    const AdjacentSystems grids =
        euclidean_shifted_grids(cloud, suggested_depth(cloud), -2, false);
    const DyadicSystem& sys = grids.systems[0];
    const int O = static_cast<int>(rng.next_below(cloud.size()));
    const BasePointContext ctx_base = make_base_point_context(cloud, sys, O);

    const Func f = random_gaussian(rng, cloud.size());
    const Func g = random_gaussian(rng, cloud.size());
    MeasureSpace ms(SpaceKind::sigma_finite, cloud.weights());
    const double den =
        lp_norm(ms, f, p) *
        plus_norm(cloud, sys, ctx_base, g, PlusNormKind::Lip_plus, p);
    if (den <= 1e-300) return std::nullopt;
    const double num =
        luxembourg_norm(ms, psi_p(cloud, O, p), pointwise_product(f, g));
    return num / den;
  });
  return harness.take();
}

VerificationReport suite_multiplier_bounds(const SuiteConfig& config) {
  SuiteConfig local = config;
  local.sizes = {32, 64, 128};
  RatioHarness harness("multiplier-bounds", local, 300);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double p = ctx.index % 2 == 0 ? 1.0 : 0.5;
    QuasiMetricSpace cloud =
        random_cloud(rng, std::max(8, ctx.size), 1, true);
    const AdjacentSystems grids =
        euclidean_shifted_grids(cloud, suggested_depth(cloud), -2, false);

    Sampler ms;
    ms.seed = mix_seed(ctx.seed, 3);
    ms.family = SampleFamily::multiplier;
    ms.points = cloud.size();
    ms.p = p;
    // Rebuild the multiplier on this cloud to share the same geometry.
    Rng hrng(ms.seed);
    const int O = static_cast<int>(hrng.next_below(cloud.size()));
    const double alpha = p < 1.0 ? 1.0 / p - 1.0 : 0.0;
    Func h(cloud.size());
    for (int i = 0; i < cloud.size(); ++i) {
      const double d = cloud.distance(i, O);
      const double m = cloud.ball_mass(O, d);
      h[i] = (2.0 * hrng.next_double() - 1.0) /
             ((1.0 + std::pow(m, alpha)) * std::log(kE + d));
    }
    const Func g = random_gaussian(rng, cloud.size());
    const BasePointContext base =
        make_base_point_context(cloud, grids.systems[0], O);
    try {
      return multiplier_inequality(cloud, grids, base, g, h, p);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  });
  return harness.take();
}

VerificationReport suite_dyadic_product_bounds(const SuiteConfig& config) {
  SuiteConfig local = config;
  local.sizes = {32, 64, 128};
  RatioHarness harness("dyadic-product-bounds", local, 240);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double p = ctx.index % 2 == 0 ? 1.0 : 0.5;
    QuasiMetricSpace cloud =
        random_cloud(rng, std::max(8, ctx.size), 1, true);
    const AdjacentSystems grids =
        euclidean_shifted_grids(cloud, suggested_depth(cloud), -2, false);
    const DyadicSystem& sys = grids.systems[0];
    const auto [ms, filt] = system_to_filtration(cloud, sys);
    const int O = static_cast<int>(rng.next_below(cloud.size()));
    const BasePointContext base = make_base_point_context(cloud, sys, O);

    const Func f = center_base(ms, filt, random_gaussian(rng, ms.size()));
    const Func g = random_gaussian(rng, ms.size());
    const double src = hardy_norm(ms, filt, f, NormVariant::Hp_S, p);
    const double dual =
        plus_norm(cloud, sys, base, g,
                  p == 1.0 ? PlusNormKind::BMO_plus : PlusNormKind::Lip_plus,
                  p);
    const double den = src * dual;
    if (den <= 1e-300) return std::nullopt;

    const MartingaleExpansion fe = expand(ms, filt, f, true);
    const MartingaleExpansion ge = expand(ms, filt, g, false);
    const Paraproducts pp = paraproducts(ms, filt, fe, ge);

    const double r1 = lp_norm(ms, pp.pi1, 1.0) / den;
    const double r2 =
        hardy_norm(ms, filt, pp.pi2, NormVariant::Hp_S, 1.0) / den;
    const Func s3 = conditional_square_function(
        ms, filt, expand(ms, filt, pp.pi3, true));
    const MusielakFunction psi =
        p == 1.0 ? psi_1(cloud, O) : psi_p(cloud, O, p);
    const double r3 = luxembourg_norm(ms, psi, s3) / den;
    const std::string tag = p == 1.0 ? "_p1" : "_p05";
    harness.max_metric("pi1_sup" + tag, r1);
    harness.max_metric("pi2_sup" + tag, r2);
    harness.max_metric("pi3_sup" + tag, r3);
    return std::max({r1, r2, r3});
  });
  return harness.take();
}

VerificationReport suite_ball_growth(const SuiteConfig& config) {
  SuiteConfig local = config;
  local.sizes = {48, 128, 256};
  RatioHarness harness("ball-growth", local, 240);
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double p = ctx.index % 2 == 0 ? 0.5 : 0.75;
    const double dilations[3] = {1.0, 2.0, 4.0};
    const double D = dilations[ctx.index % 3];
    QuasiMetricSpace cloud =
        random_cloud(rng, std::max(8, ctx.size), 1, false);
    const int O = static_cast<int>(rng.next_below(cloud.size()));
    const int x0 = static_cast<int>(rng.next_below(cloud.size()));
    const auto& ord = cloud.by_distance(x0);
    const int reach =
        1 + static_cast<int>(rng.next_below(cloud.size() - 1));
    const double r0 = cloud.distance(x0, ord[reach]) * (1.0 + 1e-12);

    // Scale all weights so the damped integral over B(x0, r0) is 1; ball
    // masses scale linearly with the weights.
    auto integral_for = [&](double sigma) {
      CompensatedSum acc;
      for (int i = 0; i < cloud.size(); ++i) {
        if (cloud.distance(x0, i) < r0) {
          const double m =
              sigma * cloud.ball_mass(O, cloud.distance(i, O));
          acc.add(sigma * cloud.weight(i) /
                  (1.0 + std::pow(1.0 + m, 1.0 - p)));
        }
      }
      return acc.value();
    };
    double lo = 1e-9, hi = 1e9;
    if (integral_for(lo) > 1.0 || integral_for(hi) < 1.0) return std::nullopt;
    for (int it = 0; it < 100; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (integral_for(mid) < 1.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double sigma = std::sqrt(lo * hi);
    if (std::abs(integral_for(sigma) - 1.0) > 1e-7) return std::nullopt;

    std::vector<double> scaled = cloud.weights();
    for (double& w : scaled) w *= sigma;
    std::vector<std::array<double, 2>> coords;
    for (int i = 0; i < cloud.size(); ++i) coords.push_back(cloud.coord(i));
    const QuasiMetricSpace rescaled = QuasiMetricSpace::from_coordinates(
        std::move(coords), cloud.dim(), std::move(scaled), 1.0);

    const BallGrowthCheck check =
        ball_integral_growth_check(rescaled, O, p, x0, D);
    harness.max_metric(
        "sup_D" + std::to_string(static_cast<int>(D)),
        check.dilated_integral);
    if (D == 1.0 && check.dilated_integral != check.base_integral) {
      return std::nullopt;
    }
    return check.dilated_integral;
  });
  return harness.take();
}

VerificationReport suite_routed_product_bounds(const SuiteConfig& config) {
  SuiteConfig local = config;
  local.sizes = {24, 48, 96};
  RatioHarness harness("routed-product-bounds", local, 150);
  bool identity_ok = true;
  harness.run([&](const TrialContext& ctx) -> std::optional<double> {
    Rng rng(ctx.seed);
    const double p = ctx.index % 2 == 0 ? 0.5 : 0.75;
    QuasiMetricSpace cloud =
        random_cloud(rng, std::max(8, ctx.size), 1, true);
    const AdjacentSystems grids =
        euclidean_shifted_grids(cloud, suggested_depth(cloud), -2, false);
    const auto [ms0, filt0] = system_to_filtration(cloud, grids.systems[0]);
    const Func f = center_base(ms0, filt0, random_gaussian(rng, ms0.size()));
    const Func g = random_gaussian(rng, ms0.size());
    const int O = static_cast<int>(rng.next_below(cloud.size()));

    const PiFDecomposition dec = pi_f_operators(cloud, grids, f, g, p);
    double residual = 0.0;
    for (int i = 0; i < cloud.size(); ++i) {
      residual = std::max(residual,
                          std::abs(f[i] * g[i] - dec.pi1[i] - dec.pi2[i] -
                                   dec.pi3[i]));
    }
    if (residual > 1e-12 * (1.0 + sup_abs(f) * sup_abs(g))) {
      identity_ok = false;
    }

    const double alpha = 1.0 / p - 1.0;
    const double dual =
        ball_plus_norm(cloud, O, g, BallNormKind::Lip_alpha, alpha);
    const double den = dec.atomic_quasi_norm * dual;
    if (den <= 1e-300) return std::nullopt;

    double pi2_sum = 0.0, pi3_sum = 0.0;
    const MusielakFunction psi = psi_p(cloud, O, p);
    for (int t = 0; t < static_cast<int>(grids.systems.size()); ++t) {
      double part = 0.0;
      for (double v : dec.per_system[t]) part += std::abs(v);
      if (part == 0.0) continue;
      const auto [ms, filt] = system_to_filtration(cloud, grids.systems[t]);
      const MartingaleExpansion fe =
          expand(ms, filt, dec.per_system[t], true);
      const MartingaleExpansion ge = expand(ms, filt, g, false);
      const Paraproducts pp = paraproducts(ms, filt, fe, ge);
      pi2_sum += hardy_norm(ms, filt, pp.pi2, NormVariant::Hp_S, 1.0);
      const Func s3 = conditional_square_function(
          ms, filt, expand(ms, filt, pp.pi3, true));
      pi3_sum += luxembourg_norm(ms, psi, s3);
    }
    const double r1 = lp_norm(ms0, dec.pi1, 1.0) / den;
    const double r2 = pi2_sum / den;
    const double r3 = pi3_sum / den;
    harness.max_metric("pi1_sup", r1);
    harness.max_metric("pi2_sup", r2);
    harness.max_metric("pi3_sup", r3);
    return std::max({r1, r2, r3});
  });
  VerificationReport report = harness.take();
  if (!identity_ok) {
    report.pass = false;
    report.detail = "routed decomposition identity above tolerance";
  }
  return report;
}

using SuiteFn = VerificationReport (*)(const SuiteConfig&);

const std::vector<std::pair<std::string, SuiteFn>>& suite_table() {
  static const std::vector<std::pair<std::string, SuiteFn>> table = {
      {"identity", suite_identity},
      {"functional-identities", suite_functional_identities},
      {"atomic", suite_atomic},
      {"doob-constant", suite_doob_constant},
      {"lipschitz-char", suite_lipschitz_char},
      {"holder", suite_holder},
      {"bmo-compare", suite_bmo_compare},
      {"maximal-bmo", suite_maximal_bmo},
      {"product-bounds-h1", suite_product_bounds_h1},
      {"product-bounds-hp", suite_product_bounds_hp},
      {"lipschitz-linf", suite_lipschitz_linf},
      {"john-nirenberg", suite_john_nirenberg},
      {"luxembourg", suite_luxembourg},
      {"sum-norm", suite_sum_norm},
      {"dyadic-props", suite_dyadic_props},
      {"adjacent-cover", suite_adjacent_cover},
      {"adjacent-general", suite_adjacent_general},
      {"hardy-variants", suite_hardy_variants},
      {"hardy-equiv", suite_hardy_equiv},
      {"holder1", suite_holder1},
      {"holder2", suite_holder2},
      {"multiplier-bounds", suite_multiplier_bounds},
      {"dyadic-product-bounds", suite_dyadic_product_bounds},
      {"ball-growth", suite_ball_growth},
      {"routed-product-bounds", suite_routed_product_bounds},
  };
  return table;
}

}  // namespace

VerificationReport estimate_constant(
    const std::function<double(const SampleObject&)>& numerator,
    const std::function<double(const SampleObject&)>& denominator,
    const Sampler& sampler, int trials) {
  VerificationReport report;
  report.suite = "estimate-constant";
  report.seed = sampler.seed;
  std::vector<double> ratios;
  std::optional<std::uint64_t> witness_seed;
  for (int t = 0; t < trials; ++t) {
    Sampler local = sampler;
    local.seed = mix_seed(sampler.seed, t);
    const SampleObject obj = sample(local);
    ++report.trials;
    const double den = denominator(obj);
    if (!(den > 1e-300)) {
      ++report.skipped;
      continue;
    }
    const double ratio = numerator(obj) / den;
    ratios.push_back(ratio);
    if (ratio >= report.sup_ratio || ratios.size() == 1) {
      report.sup_ratio = std::max(report.sup_ratio, ratio);
      report.witness = Witness{t, local.seed, "estimate-constant"};
      witness_seed = local.seed;
    }
  }
  if (ratios.empty()) {
    throw std::runtime_error("all trials degenerate");
  }
  std::sort(ratios.begin(), ratios.end());
  report.quantiles["q50"] = ratios[ratios.size() / 2];
  report.quantiles["max"] = ratios.back();
  report.quantiles["min"] = ratios.front();
  if (witness_seed) {
    Sampler local = sampler;
    local.seed = *witness_seed;
    const SampleObject obj = sample(local);
    const double replay = numerator(obj) / denominator(obj);
    report.pass = std::abs(replay - report.sup_ratio) <=
                  1e-12 * std::max(1.0, std::abs(report.sup_ratio));
    if (!report.pass) report.detail = "witness replay mismatch";
  }
  return report;
}

std::vector<std::string> suite_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, fn] : suite_table()) ids.push_back(id);
  return ids;
}

VerificationReport run_suite(const std::string& id, const SuiteConfig& config) {
  for (const auto& [name, fn] : suite_table()) {
    if (name == id) return fn(config);
  }
  throw std::invalid_argument("unknown suite id: " + id);
}

}  // namespace martcalc
