#include "martcalc/homogeneous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

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

// Fenwick tree over value ranks carrying (weight, weight * value) so the
// absolute deviation around any pivot comes from two prefix queries.
class DeviationTree {
 public:
  explicit DeviationTree(const std::vector<double>& sorted_values)
      : values_(sorted_values),
        w_(sorted_values.size() + 1, 0.0),
        wv_(sorted_values.size() + 1, 0.0) {}

  void clear() {
    std::fill(w_.begin(), w_.end(), 0.0);
    std::fill(wv_.begin(), wv_.end(), 0.0);
    total_w_ = 0.0;
    total_wv_ = 0.0;
  }

  void insert(double value, double weight) {
    int idx = rank(value) + 1;
    for (; idx <= static_cast<int>(values_.size()); idx += idx & -idx) {
      w_[idx] += weight;
      wv_[idx] += weight * value;
    }
    total_w_ += weight;
    total_wv_ += weight * value;
  }

  double total_weight() const { return total_w_; }
  double total_weighted_value() const { return total_wv_; }

  // sum of weight * |value - pivot| over inserted entries
  double deviation(double pivot) const {
    double w_le = 0.0, wv_le = 0.0;
    for (int idx = rank_upper(pivot) + 1; idx > 0; idx -= idx & -idx) {
      w_le += w_[idx];
      wv_le += wv_[idx];
    }
    const double below = pivot * w_le - wv_le;
    const double above = (total_wv_ - wv_le) - pivot * (total_w_ - w_le);
    return below + above;
  }

 private:
  int rank(double v) const {
    return static_cast<int>(
        std::lower_bound(values_.begin(), values_.end(), v) - values_.begin());
  }
  int rank_upper(double v) const {
    return static_cast<int>(
        std::upper_bound(values_.begin(), values_.end(), v) - values_.begin() -
        1);
  }

  std::vector<double> values_;
  std::vector<double> w_;
  std::vector<double> wv_;
  double total_w_ = 0.0;
  double total_wv_ = 0.0;
};

}  // namespace

BasePointContext make_base_point_context(const QuasiMetricSpace& space,
                                         const DyadicSystem& system, int O) {
  const int li0 = -system.k_min;
  if (li0 < 0 || li0 >= system.level_count()) {
    throw std::invalid_argument("missing level 0");
  }
  BasePointContext ctx;
  ctx.O = O;
  ctx.q0_cube = system.cube_of[li0][O];
  ctx.ball_one = space.ball(O, 1.0);
  for (int c = 0; c < static_cast<int>(system.levels[li0].size()); ++c) {
    ctx.level0.emplace_back(c, system.levels[li0][c].center);
  }
  return ctx;
}

double ball_norm(const QuasiMetricSpace& space, const Func& f,
                 BallNormKind kind, double alpha) {
  const int n = space.size();
  if (static_cast<int>(f.size()) != n) {
    throw std::invalid_argument("func length != point count");
  }
  double sup = 0.0;
  if (kind == BallNormKind::BMO_mu) {
    std::vector<double> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    DeviationTree tree(sorted);
    for (int c = 0; c < n; ++c) {
      tree.clear();
      const auto& ord = space.by_distance(c);
      for (int m = 0; m < n; ++m) {
        tree.insert(f[ord[m]], space.weight(ord[m]));
        // Prefix of size m+1 is the ball with radius just past ord[m].
        const double mass = tree.total_weight();
        const double mean = tree.total_weighted_value() / mass;
        sup = std::max(sup, tree.deviation(mean) / mass);
      }
    }
  } else {
    for (int c = 0; c < n; ++c) {
      const auto& ord = space.by_distance(c);
      double lo = f[ord[0]], hi = f[ord[0]];
      CompensatedSum mass;
      for (int m = 0; m < n; ++m) {
        lo = std::min(lo, f[ord[m]]);
        hi = std::max(hi, f[ord[m]]);
        mass.add(space.weight(ord[m]));
        sup = std::max(sup, (hi - lo) * std::pow(mass.value(), -alpha));
      }
    }
  }
  return sup;
}

double ball_plus_norm(const QuasiMetricSpace& space, int O, const Func& f,
                      BallNormKind kind, double alpha) {
  CompensatedSum mass, sum;
  for (int p : space.ball(O, 1.0)) {
    mass.add(space.weight(p));
    sum.add(space.weight(p) * f[p]);
  }
  const double offset =
      mass.value() > 0.0 ? std::abs(sum.value() / mass.value()) : 0.0;
  return offset + ball_norm(space, f, kind, alpha);
}

double musielak_psi(const QuasiMetricSpace& space, int O, double p, int x,
                    double t) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument("p must lie in (0,1]");
  }
  if (!(t >= 0.0)) {
    throw std::invalid_argument("t must be nonnegative");
  }
  if (t == 0.0) return 0.0;
  const double d = space.distance(x, O);
  if (p == 1.0) {
    return t / (std::log(kE + d) + std::log(kE + t));
  }
  const double m = space.ball_mass(O, d);
  return t / (1.0 + std::pow(t * (1.0 + m), 1.0 - p));
}

MusielakFunction psi_1(const QuasiMetricSpace& space, int O) {
  std::vector<double> log_dist(space.size());
  for (int i = 0; i < space.size(); ++i) {
    log_dist[i] = std::log(kE + space.distance(i, O));
  }
  MusielakFunction psi;
  psi.eval = [log_dist = std::move(log_dist)](int x, double t) {
    return t <= 0.0 ? 0.0 : t / (log_dist[x] + std::log(kE + t));
  };
  return psi;
}

MusielakFunction psi_p(const QuasiMetricSpace& space, int O, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("p must lie in (0,1)");
  }
  std::vector<double> ball_weight(space.size());
  for (int i = 0; i < space.size(); ++i) {
    ball_weight[i] = 1.0 + space.ball_mass(O, space.distance(i, O));
  }
  MusielakFunction psi;
  psi.eval = [ball_weight = std::move(ball_weight), p](int x, double t) {
    return t <= 0.0 ? 0.0
                    : t / (1.0 + std::pow(t * ball_weight[x], 1.0 - p));
  };
  return psi;
}

namespace {

struct CubeAverages {
  std::vector<double> mass;
  std::vector<double> mean;
};

CubeAverages cube_averages(const QuasiMetricSpace& space,
                           const std::vector<DyadicCube>& cubes,
                           const Func& g) {
  CubeAverages avg;
  for (const auto& cube : cubes) {
    CompensatedSum mass, sum;
    for (int p : cube.points) {
      mass.add(space.weight(p));
      sum.add(space.weight(p) * g[p]);
    }
    avg.mass.push_back(mass.value());
    avg.mean.push_back(sum.value() / mass.value());
  }
  return avg;
}

}  // namespace

double plus_norm(const QuasiMetricSpace& space, const DyadicSystem& system,
                 const BasePointContext& ctx, const Func& g, PlusNormKind kind,
                 double p) {
  const int li0 = -system.k_min;
  if (li0 < 0 || li0 >= system.level_count()) {
    throw std::invalid_argument("missing level 0");
  }
  auto [ms, filt] = system_to_filtration(space, system);

  if (kind == PlusNormKind::BMO_psi) {
    const MusielakFunction psi =
        p == 1.0 ? psi_1(space, ctx.O) : psi_p(space, ctx.O, p);
    double sup = 0.0;
    for (int li = 0; li < system.level_count(); ++li) {
      const auto& cubes = system.levels[li];
      const CubeAverages avg = cube_averages(space, cubes, g);
      for (int c = 0; c < static_cast<int>(cubes.size()); ++c) {
        CompensatedSum dev;
        for (int q : cubes[c].points) {
          dev.add(space.weight(q) * std::abs(g[q] - avg.mean[c]));
        }
        if (dev.value() == 0.0) continue;
        Func indicator(space.size(), 0.0);
        for (int q : cubes[c].points) indicator[q] = 1.0;
        const double lux = luxembourg_norm(ms, psi, indicator);
        sup = std::max(sup, dev.value() / lux);
      }
    }
    return sup;
  }

  const auto& level0 = system.levels[li0];
  const CubeAverages avg = cube_averages(space, level0, g);
  const double g_q0 = avg.mean[ctx.q0_cube];

  double offset_sup = 0.0;
  const double alpha_p = 1.0 / p - 1.0;
  for (const auto& [cube_id, center] : ctx.level0) {
    const double osc = std::abs(avg.mean[cube_id] - g_q0);
    const double d = space.distance(center, ctx.O);
    if (kind == PlusNormKind::BMO_plus) {
      offset_sup = std::max(offset_sup, osc / std::log(kE + d));
    } else {
      const double mb = space.ball_mass(ctx.O, d);
      offset_sup = std::max(offset_sup, osc / (1.0 + std::pow(mb, alpha_p)));
    }
  }

  const double alpha = kind == PlusNormKind::BMO_plus ? 0.0 : alpha_p;
  const double dyadic = event_oscillation_sup(ms, filt, g, alpha, 1.0);
  return offset_sup + std::abs(g_q0) + dyadic;
}

ValidationReport validate_ball_atom(const QuasiMetricSpace& space,
                                    const BallAtom& atom) {
  ValidationReport report;
  const int n = space.size();
  if (static_cast<int>(atom.values.size()) != n) {
    report.issues.push_back("values length != point count");
    return report;
  }
  std::vector<char> inside(n, 0);
  for (int p : space.ball(atom.center, atom.radius)) inside[p] = 1;

  const double sup = sup_abs(atom.values);
  for (int i = 0; i < n; ++i) {
    if (!inside[i] && atom.values[i] != 0.0) {
      report.issues.push_back("support leaks outside the ball (point " +
                              std::to_string(i) + ")");
      break;
    }
  }

  const double mass = space.ball_mass(atom.center, atom.radius);
  if (mass <= 0.0) {
    report.issues.push_back("empty ball");
    return report;
  }
  const double inv_q = std::isinf(atom.q) ? 0.0 : 1.0 / atom.q;
  double qn;
  if (std::isinf(atom.q)) {
    qn = sup;
  } else {
    CompensatedSum acc;
    for (int i = 0; i < n; ++i) {
      if (atom.values[i] != 0.0) {
        acc.add(space.weight(i) * std::pow(std::abs(atom.values[i]), atom.q));
      }
    }
    qn = std::pow(acc.value(), 1.0 / atom.q);
  }
  const double bound = std::pow(mass, inv_q - 1.0 / atom.p);
  if (qn > bound * (1.0 + 1e-12)) {
    report.issues.push_back("size bound violated by factor " +
                            std::to_string(qn / bound));
  }

  CompensatedSum mean;
  for (int i = 0; i < n; ++i) mean.add(space.weight(i) * atom.values[i]);
  if (std::abs(mean.value()) >
      1e-12 * std::max(1.0, sup * std::max(1.0, mass))) {
    report.issues.push_back("mean not zero (" + std::to_string(mean.value()) +
                            ")");
  }
  return report;
}

ValidationReport validate_psi_atom(const QuasiMetricSpace& space, int O,
                                   const PsiAtom& atom) {
  ValidationReport report;
  const int n = space.size();
  if (static_cast<int>(atom.values.size()) != n) {
    report.issues.push_back("values length != point count");
    return report;
  }
  if (atom.region.empty()) {
    report.issues.push_back("empty region");
    return report;
  }
  std::vector<char> inside(n, 0);
  for (int p : atom.region) inside[p] = 1;
  for (int i = 0; i < n; ++i) {
    if (!inside[i] && atom.values[i] != 0.0) {
      report.issues.push_back("support leaks outside the region (point " +
                              std::to_string(i) + ")");
      break;
    }
  }

  const MeasureSpace ms(SpaceKind::sigma_finite, space.weights());
  const MusielakFunction psi =
      atom.p == 1.0 ? psi_1(space, O) : psi_p(space, O, atom.p);
  Func indicator(n, 0.0);
  for (int p : atom.region) indicator[p] = 1.0;
  const double lux = luxembourg_norm(ms, psi, indicator);
  const double sup = sup_abs(atom.values);
  if (sup * lux > 1.0 + 1e-10) {
    report.issues.push_back("size bound violated by factor " +
                            std::to_string(sup * lux));
  }

  CompensatedSum mean;
  for (int i = 0; i < n; ++i) mean.add(space.weight(i) * atom.values[i]);
  if (std::abs(mean.value()) > 1e-12 * std::max(1.0, sup)) {
    report.issues.push_back("mean not zero (" + std::to_string(mean.value()) +
                            ")");
  }
  return report;
}

namespace {

double restricted_q_norm(const QuasiMetricSpace& space, const Func& f,
                         double q) {
  if (std::isinf(q)) return sup_abs(f);
  CompensatedSum acc;
  for (int i = 0; i < space.size(); ++i) {
    if (f[i] != 0.0) {
      acc.add(space.weight(i) * std::pow(std::abs(f[i]), q));
    }
  }
  return std::pow(acc.value(), 1.0 / q);
}

double cube_mass(const QuasiMetricSpace& space, const DyadicCube& cube) {
  CompensatedSum acc;
  for (int p : cube.points) acc.add(space.weight(p));
  return acc.value();
}

std::optional<std::pair<int, int>> cover_ball_in_system(
    const QuasiMetricSpace& space, const DyadicSystem& sys, int center,
    double r) {
  const std::vector<int> ball = space.ball(center, r);
  std::optional<std::pair<int, int>> best;
  double best_diam = std::numeric_limits<double>::infinity();
  for (int li = 0; li < sys.level_count(); ++li) {
    const int c = sys.cube_of[li][center];
    const auto& cube = sys.levels[li][c];
    if (cube.points.size() < ball.size()) continue;
    bool contains = true;
    for (int p : ball) {
      if (sys.cube_of[li][p] != c) {
        contains = false;
        break;
      }
    }
    if (contains && cube.diameter < best_diam) {
      best_diam = cube.diameter;
      best = std::make_pair(li, c);
    }
  }
  return best;
}

}  // namespace

ConvertedAtom ball_atom_to_dyadic(const QuasiMetricSpace& space,
                                  const AdjacentSystems& adjacent,
                                  const BallAtom& atom) {
  // Lexicographically smallest qualifying system hosts the atom.
  for (int t = 0; t < static_cast<int>(adjacent.systems.size()); ++t) {
    const auto hit =
        cover_ball_in_system(space, adjacent.systems[t], atom.center,
                             atom.radius);
    if (!hit) continue;
    const auto [li, c] = *hit;
    const DyadicSystem& sys = adjacent.systems[t];
    const DyadicCube& cube = sys.levels[li][c];

    ConvertedAtom out;
    out.system = t;
    out.atom.level = sys.k_min + li;
    out.atom.block = cube.points;
    out.atom.p = atom.p;
    out.atom.q = atom.q;

    const double qn = restricted_q_norm(space, atom.values, atom.q);
    const double inv_q = std::isinf(atom.q) ? 0.0 : 1.0 / atom.q;
    const double bound =
        std::pow(cube_mass(space, cube), inv_q - 1.0 / atom.p);
    out.scalar = qn / bound;
    out.atom.values.assign(space.size(), 0.0);
    if (out.scalar > 0.0) {
      for (int i = 0; i < space.size(); ++i) {
        out.atom.values[i] = atom.values[i] / out.scalar;
      }
    }
    return out;
  }
  throw std::runtime_error("no qualifying cube covers the ball");
}

BallConvertedAtom dyadic_atom_to_ball(const QuasiMetricSpace& space,
                                      const DyadicSystem& system,
                                      const SimpleAtom& atom) {
  const int li = atom.level - system.k_min;
  if (li < 0 || li >= system.level_count()) {
    throw std::invalid_argument("atom level outside the system");
  }
  if (atom.block.empty()) {
    throw std::invalid_argument("empty atom block");
  }
  const int c = system.cube_of[li][atom.block.front()];
  const DyadicCube& cube = system.levels[li][c];
  std::vector<int> sorted = atom.block;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != cube.points) {
    throw std::invalid_argument("atom block is not a cube of the system");
  }

  BallConvertedAtom out;
  out.atom.center = cube.center;
  out.atom.radius = system.C1 * system.scale(atom.level);
  out.atom.p = atom.p;
  out.atom.q = atom.q;

  const double qn = restricted_q_norm(space, atom.values, atom.q);
  const double inv_q = std::isinf(atom.q) ? 0.0 : 1.0 / atom.q;
  const double mass = space.ball_mass(out.atom.center, out.atom.radius);
  const double bound = std::pow(mass, inv_q - 1.0 / atom.p);
  out.scalar = qn / bound;
  out.atom.values.assign(space.size(), 0.0);
  if (out.scalar > 0.0) {
    for (int i = 0; i < space.size(); ++i) {
      out.atom.values[i] = atom.values[i] / out.scalar;
    }
  }
  return out;
}

MultiplierConstants multiplier_check(const QuasiMetricSpace& space, int O,
                                     const Func& h, double alpha_p) {
  const int n = space.size();
  MultiplierConstants out{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const double d = space.distance(i, O);
    const double m = space.ball_mass(O, d);
    out.decay = std::max(out.decay, std::abs(h[i]) *
                                        (1.0 + std::pow(m, alpha_p)) *
                                        std::log(kE + d));
  }
  const double a0 = space.a0();
  for (int c = 0; c < n; ++c) {
    const double dc = space.distance(c, O);
    const double r_cap = dc / (2.0 * a0) + 1.0;
    const auto& ord = space.by_distance(c);
    double lo = h[ord[0]], hi = h[ord[0]];
    CompensatedSum mass;
    for (int m = 0; m < n; ++m) {
      lo = std::min(lo, h[ord[m]]);
      hi = std::max(hi, h[ord[m]]);
      mass.add(space.weight(ord[m]));
      if (m + 1 < 2) continue;  // oscillation needs two points
      // Radii in (d_m, d_{m+1}] all carve out this prefix; the constraint
      // tightens as r grows, so the binding radius is the largest admissible.
      const double r_lo = space.distance(c, ord[m]);
      const double r_hi = m + 1 < n
                              ? space.distance(c, ord[m + 1])
                              : space.max_distance() * (1.0 + 1e-9) + 1.0;
      if (r_lo >= r_cap) continue;
      const double r = std::min(r_hi, r_cap);
      const double outer =
          1.0 + std::pow(space.ball_mass(O, 1.0 + r + dc), alpha_p);
      const double scale =
          std::pow(mass.value(), alpha_p) / (outer * std::log(kE + r + dc));
      if (scale > 0.0) {
        out.oscillation = std::max(out.oscillation, (hi - lo) / scale);
      }
    }
  }
  return out;
}

double multiplier_inequality(const QuasiMetricSpace& space,
                             const AdjacentSystems& adjacent,
                             const BasePointContext& ctx, const Func& g,
                             const Func& h, double p) {
  const PlusNormKind kind =
      p == 1.0 ? PlusNormKind::BMO_plus : PlusNormKind::Lip_plus;
  double g_norm = 0.0, gh_norm = 0.0;
  Func gh(space.size());
  for (int i = 0; i < space.size(); ++i) gh[i] = g[i] * h[i];
  for (const auto& sys : adjacent.systems) {
    const BasePointContext local = make_base_point_context(space, sys, ctx.O);
    g_norm = std::max(g_norm, plus_norm(space, sys, local, g, kind, p));
    gh_norm = std::max(gh_norm, plus_norm(space, sys, local, gh, kind, p));
  }
  if (g_norm <= 0.0) {
    throw std::invalid_argument("zero norm");
  }
  return gh_norm / (g_norm * (sup_abs(h) + 1.0));
}

PiFDecomposition pi_f_operators(const QuasiMetricSpace& space,
                                const AdjacentSystems& adjacent, const Func& f,
                                const Func& g, double p) {
  const int n = space.size();
  if (static_cast<int>(f.size()) != n || static_cast<int>(g.size()) != n) {
    throw std::invalid_argument("func length != point count");
  }
  const int n_sys = static_cast<int>(adjacent.systems.size());
  if (n_sys == 0) {
    throw std::invalid_argument("no systems");
  }
  for (const auto& sys : adjacent.systems) {
    for (const auto& cube : sys.levels.back()) {
      if (cube.points.size() != 1) {
        throw std::invalid_argument("finest level must separate points");
      }
    }
  }

  auto [ms0, filt0] = system_to_filtration(space, adjacent.systems[0]);
  const AtomicDecomposition dec =
      stopping_time_decomposition(ms0, filt0, f, p, kInfinity);

  PiFDecomposition out;
  out.pi1.assign(n, 0.0);
  out.pi2.assign(n, 0.0);
  out.pi3.assign(n, 0.0);
  out.per_system.assign(n_sys, Func(n, 0.0));
  out.atomic_quasi_norm = dec.quasi_norm();

  for (const AtomicTerm& term : dec.terms) {
    const BallConvertedAtom ball =
        dyadic_atom_to_ball(space, adjacent.systems[0], term.atom);
    int target = -1;
    for (int t = 0; t < n_sys; ++t) {
      if (cover_ball_in_system(space, adjacent.systems[t], ball.atom.center,
                               ball.atom.radius)) {
        target = t;
        break;
      }
    }
    if (target < 0) {
      throw std::runtime_error("no qualifying cube covers an atom ball");
    }
    for (int i = 0; i < n; ++i) {
      out.per_system[target][i] += term.lambda * term.atom.values[i];
    }
  }

  for (int t = 0; t < n_sys; ++t) {
    auto [ms, filt] = system_to_filtration(space, adjacent.systems[t]);
    const MartingaleExpansion fe = expand(ms, filt, out.per_system[t], true);
    const MartingaleExpansion ge = expand(ms, filt, g, false);
    const Paraproducts pp = paraproducts(ms, filt, fe, ge);
    for (int i = 0; i < n; ++i) {
      out.pi1[i] += pp.pi1[i];
      out.pi2[i] += pp.pi2[i];
      out.pi3[i] += pp.pi3[i];
    }
  }
  return out;
}

BallGrowthCheck ball_integral_growth_check(const QuasiMetricSpace& space,
                                           int O, double p, int x0, double D) {
  if (!(D >= 1.0)) {
    throw std::invalid_argument("D must be at least 1");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("p must lie in (0,1)");
  }
  const int n = space.size();
  std::vector<double> damped(n);
  for (int i = 0; i < n; ++i) {
    const double m = space.ball_mass(O, space.distance(i, O));
    damped[i] = 1.0 / (1.0 + std::pow(1.0 + m, 1.0 - p));
  }

  const auto& ord = space.by_distance(x0);
  CompensatedSum acc;
  double radius = -1.0;
  for (int m = 0; m < n; ++m) {
    acc.add(space.weight(ord[m]) * damped[ord[m]]);
    if (std::abs(acc.value() - 1.0) <= 1e-6) {
      const double d_in = space.distance(x0, ord[m]);
      const double d_out = m + 1 < n ? space.distance(x0, ord[m + 1])
                                     : d_in * (1.0 + 1.0) + 1.0;
      radius = 0.5 * (d_in + d_out);
      break;
    }
    if (acc.value() > 1.0 + 1e-6) break;
  }
  if (radius < 0.0) {
    throw std::runtime_error("normalization radius not found in range");
  }

  auto integral = [&](double r) {
    CompensatedSum s;
    for (int i = 0; i < n; ++i) {
      if (space.distance(x0, i) < r) s.add(space.weight(i) * damped[i]);
    }
    return s.value();
  };

  BallGrowthCheck out;
  out.radius = radius;
  out.base_integral = integral(radius);
  out.dilated_integral = integral(D * radius);
  return out;
}

}  // namespace martcalc
