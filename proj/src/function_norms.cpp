#include "martcalc/function_norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "martcalc/martingale_ops.hpp"
#include "martcalc/summation.hpp"

namespace martcalc {

OrliczFunction OrliczFunction::t_over_log() {
  OrliczFunction phi;
  phi.eval = [](double t) {
    return t <= 0.0 ? 0.0 : t / std::log(std::exp(1.0) + t);
  };
  phi.lower_type = 0.5;
  phi.upper_type = 1.0;
  return phi;
}

MusielakFunction MusielakFunction::from_orlicz(const OrliczFunction& phi) {
  MusielakFunction psi;
  psi.eval = [f = phi.eval](int, double t) { return f(t); };
  return psi;
}

ValidationReport validate_orlicz(const OrliczFunction& phi) {
  ValidationReport report;
  if (phi.eval(0.0) != 0.0) {
    report.issues.push_back("value at 0 is not 0");
  }
  double prev = 0.0;
  for (int e = -20; e <= 40; ++e) {
    const double t = std::ldexp(1.0, e);
    const double v = phi.eval(t);
    if (!(v > 0.0)) {
      report.issues.push_back("not strictly positive at t = 2^" +
                              std::to_string(e));
      break;
    }
    if (v + 1e-15 * std::abs(v) < prev) {
      report.issues.push_back("not nondecreasing near t = 2^" +
                              std::to_string(e));
      break;
    }
    prev = v;
  }
  if (!(phi.eval(1e12) > 1e6)) {
    report.issues.push_back("growth check failed at t = 1e12");
  }
  return report;
}

double lp_norm(const MeasureSpace& space, const Func& f, double p) {
  if (static_cast<int>(f.size()) != space.size()) {
    throw std::invalid_argument("func length != point count");
  }
  if (!(p > 0.0)) {
    throw std::invalid_argument("p must be positive");
  }
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  }
  CompensatedSum acc;
  for (int i = 0; i < space.size(); ++i) {
    acc.add(space.weight(i) * std::pow(std::abs(f[i]), p));
  }
  return std::pow(acc.value(), 1.0 / p);
}

double hardy_norm(const MeasureSpace& space, const Filtration& filt,
                  const Func& f, NormVariant variant, double p) {
  const MartingaleExpansion exp = expand(space, filt, f, true);
  switch (variant) {
    case NormVariant::Hp_S:
      return lp_norm(space, square_function(exp), p);
    case NormVariant::hp_s:
      return lp_norm(space, conditional_square_function(space, filt, exp), p);
    case NormVariant::Hp_max:
      return lp_norm(space, maximal_function(exp), p);
    default:
      throw std::invalid_argument("hardy_norm variant must be Hp_S|hp_s|Hp_max");
  }
}

double bmo_norm(const MeasureSpace& space, const Filtration& filt,
                const Func& g, NormVariant variant, bool zero_base) {
  if (variant != NormVariant::BMO && variant != NormVariant::bmo) {
    throw std::invalid_argument("bmo_norm variant must be BMO|bmo");
  }
  if (static_cast<int>(g.size()) != space.size()) {
    throw std::invalid_argument("func length != point count");
  }
  const int n = space.size();
  const bool inner_is_previous = variant == NormVariant::BMO;
  const int first = inner_is_previous ? filt.k_min + 1 : filt.k_min;

  double sup_sq = 0.0;
  for (int level = first; level <= filt.k_max(); ++level) {
    const int ref_level = inner_is_previous ? level - 1 : level;
    Func ref;
    if (ref_level == filt.k_min && zero_base) {
      ref.assign(n, 0.0);
    } else {
      ref = conditional_expectation(space, filt.level(ref_level), g);
    }
    Func sq(n);
    for (int i = 0; i < n; ++i) {
      const double d = g[i] - ref[i];
      sq[i] = d * d;
    }
    const Func cond = conditional_expectation(space, filt.level(level), sq);
    for (int i = 0; i < n; ++i) sup_sq = std::max(sup_sq, cond[i]);
  }
  return std::sqrt(sup_sq);
}

double diagonal_norm(const MeasureSpace& space, const Filtration& filt,
                     const Func& f) {
  const MartingaleExpansion exp = expand(space, filt, f, true);
  CompensatedSum acc;
  for (const Func& d : exp.diffs) acc.add(lp_norm(space, d, 1.0));
  return acc.value();
}

namespace {

struct BlockStat {
  double mass;
  double integral_q;  // int_A |g - g_n|^q (q < inf)
  double sup;         // max_A |g - g_n|
};

std::vector<std::vector<BlockStat>> level_block_stats(
    const MeasureSpace& space, const Filtration& filt, const Func& g, double q,
    bool zero_base) {
  std::vector<std::vector<BlockStat>> stats;
  for (int level = filt.k_min; level <= filt.k_max(); ++level) {
    Func ref;
    if (level == filt.k_min && zero_base) {
      ref.assign(space.size(), 0.0);
    } else {
      ref = conditional_expectation(space, filt.level(level), g);
    }
    std::vector<BlockStat> row;
    for (const auto& block : filt.level(level).blocks) {
      CompensatedSum mass, integ;
      double sup = 0.0;
      for (int p : block) {
        const double d = std::abs(g[p] - ref[p]);
        mass.add(space.weight(p));
        integ.add(space.weight(p) * std::pow(d, q));
        sup = std::max(sup, d);
      }
      row.push_back(BlockStat{mass.value(), integ.value(), sup});
    }
    stats.push_back(std::move(row));
  }
  return stats;
}

// Enumerates index combinations of size 1..cap and folds the functional.
template <typename Fold>
void for_each_union(int n_blocks, int cap, Fold&& fold) {
  std::vector<int> pick;
  const auto rec = [&](auto&& self, int start) -> void {
    if (!pick.empty()) fold(pick);
    if (static_cast<int>(pick.size()) == cap) return;
    for (int i = start; i < n_blocks; ++i) {
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
}

}  // namespace

double event_oscillation_sup(const MeasureSpace& space, const Filtration& filt,
                             const Func& g, double alpha, double q,
                             int union_cap, bool zero_base) {
  if (static_cast<int>(g.size()) != space.size()) {
    throw std::invalid_argument("func length != point count");
  }
  if (union_cap < 1) union_cap = 1;
  const auto stats = level_block_stats(space, filt, g, q, zero_base);
  double sup = 0.0;
  for (const auto& row : stats) {
    if (union_cap == 1) {
      for (const BlockStat& b : row) {
        sup = std::max(sup, std::pow(b.mass, -1.0 / q - alpha) *
                                std::pow(b.integral_q, 1.0 / q));
      }
    } else {
      for_each_union(static_cast<int>(row.size()), union_cap,
                     [&](const std::vector<int>& pick) {
                       CompensatedSum mass, integ;
                       for (int b : pick) {
                         mass.add(row[b].mass);
                         integ.add(row[b].integral_q);
                       }
                       sup = std::max(
                           sup, std::pow(mass.value(), -1.0 / q - alpha) *
                                    std::pow(integ.value(), 1.0 / q));
                     });
    }
  }
  return sup;
}

double lipschitz_norm(const MeasureSpace& space, const Filtration& filt,
                      const Func& g, double p, int q, int union_cap) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("p must lie in (0,1)");
  }
  if (q != 1 && q != 2) {
    throw std::invalid_argument("q must be 1 or 2");
  }
  return event_oscillation_sup(space, filt, g, 1.0 / p - 1.0,
                               static_cast<double>(q), union_cap);
}

double lipschitz_sup_norm(const MeasureSpace& space, const Filtration& filt,
                          const Func& g, double p, int union_cap) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("p must lie in (0,1)");
  }
  if (union_cap < 1) union_cap = 1;
  const double alpha = 1.0 / p - 1.0;
  const auto stats = level_block_stats(space, filt, g, 1.0, false);
  double sup = 0.0;
  for (const auto& row : stats) {
    if (union_cap == 1) {
      for (const BlockStat& b : row) {
        sup = std::max(sup, std::pow(b.mass, -alpha) * b.sup);
      }
    } else {
      for_each_union(static_cast<int>(row.size()), union_cap,
                     [&](const std::vector<int>& pick) {
                       CompensatedSum mass;
                       double m = 0.0;
                       for (int b : pick) {
                         mass.add(row[b].mass);
                         m = std::max(m, row[b].sup);
                       }
                       sup = std::max(sup,
                                      std::pow(mass.value(), -alpha) * m);
                     });
    }
  }
  return sup;
}

namespace {

double psi_integral(const MeasureSpace& space, const MusielakFunction& psi,
                    const Func& f, double lambda) {
  CompensatedSum acc;
  for (int i = 0; i < space.size(); ++i) {
    acc.add(space.weight(i) * psi.eval(i, std::abs(f[i]) / lambda));
  }
  return acc.value();
}

}  // namespace

double luxembourg_norm(const MeasureSpace& space, const MusielakFunction& psi,
                       const Func& f) {
  if (static_cast<int>(f.size()) != space.size()) {
    throw std::invalid_argument("func length != point count");
  }
  double sup = 0.0;
  for (double v : f) sup = std::max(sup, std::abs(v));
  if (sup == 0.0) return 0.0;

  double lambda = lp_norm(space, f, 1.0) + sup;
  double lo, hi;
  if (psi_integral(space, psi, f, lambda) <= 1.0) {
    hi = lambda;
    lo = lambda;
    for (int i = 0; i < 2100; ++i) {
      lo *= 0.5;
      if (psi_integral(space, psi, f, lo) > 1.0) break;
      hi = lo;
    }
    if (psi_integral(space, psi, f, lo) <= 1.0) {
      throw std::runtime_error("luxembourg bracket not found");
    }
  } else {
    lo = lambda;
    hi = lambda;
    for (int i = 0; i < 2100; ++i) {
      hi *= 2.0;
      if (psi_integral(space, psi, f, hi) <= 1.0) break;
      lo = hi;
    }
    if (psi_integral(space, psi, f, hi) > 1.0) {
      throw std::runtime_error("luxembourg bracket not found");
    }
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (psi_integral(space, psi, f, mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double luxembourg_norm(const MeasureSpace& space, const OrliczFunction& phi,
                       const Func& f) {
  return luxembourg_norm(space, MusielakFunction::from_orlicz(phi), f);
}

namespace {

struct SplitWork {
  std::vector<Func> diffs;            // d_k f, zero-base expansion
  std::vector<Func> predicted_sq;     // E_{k-1} |d_k f|^2
  std::vector<double> l1;             // |d_k f|_1
};

SplitWork split_precompute(const MeasureSpace& space, const Filtration& filt,
                           const Func& f) {
  SplitWork w;
  const MartingaleExpansion exp = expand(space, filt, f, true);
  w.diffs = exp.diffs;
  for (int k = filt.k_min + 1; k <= filt.k_max(); ++k) {
    const Func& d = w.diffs[k - filt.k_min - 1];
    Func sq(space.size());
    for (int i = 0; i < space.size(); ++i) sq[i] = d[i] * d[i];
    w.predicted_sq.push_back(
        conditional_expectation(space, filt.level(k - 1), sq));
    w.l1.push_back(lp_norm(space, d, 1.0));
  }
  return w;
}

// |s(sum theta_k d_k)|_1 + sum (1 - theta_k) |d_k|_1
double split_objective(const MeasureSpace& space, const SplitWork& w,
                       const std::vector<double>& theta) {
  CompensatedSum value;
  for (int i = 0; i < space.size(); ++i) {
    CompensatedSum s2;
    for (std::size_t k = 0; k < w.diffs.size(); ++k) {
      s2.add(theta[k] * theta[k] * w.predicted_sq[k][i]);
    }
    value.add(space.weight(i) * std::sqrt(s2.value()));
  }
  for (std::size_t k = 0; k < w.diffs.size(); ++k) {
    value.add((1.0 - theta[k]) * w.l1[k]);
  }
  return value.value();
}

}  // namespace

SumNormSplit sum_norm_upper(const MeasureSpace& space, const Filtration& filt,
                            const Func& f, SplitStrategy strategy) {
  const SplitWork w = split_precompute(space, filt, f);
  const std::size_t levels = w.diffs.size();

  std::vector<double> theta(levels, 1.0);
  if (strategy == SplitStrategy::trivial_right) {
    theta.assign(levels, 0.0);
  } else if (strategy == SplitStrategy::coordinate_descent) {
    const std::vector<double> ones(levels, 1.0);
    const std::vector<double> zeros(levels, 0.0);
    theta = split_objective(space, w, ones) <= split_objective(space, w, zeros)
                ? ones
                : zeros;
    constexpr double kGolden = 0.6180339887498949;
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (std::size_t k = 0; k < levels; ++k) {
        double a = 0.0, b = 1.0;
        double x1 = b - kGolden * (b - a);
        double x2 = a + kGolden * (b - a);
        auto eval = [&](double t) {
          theta[k] = t;
          return split_objective(space, w, theta);
        };
        double f1 = eval(x1), f2 = eval(x2);
        for (int it = 0; it < 40; ++it) {
          if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = eval(x1);
          } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = eval(x2);
          }
        }
        const double mid = 0.5 * (a + b);
        const double fm = eval(mid);
        const double f_one = eval(1.0);
        const double f_zero = eval(0.0);
        if (fm <= f_one && fm <= f_zero) {
          theta[k] = mid;
        } else {
          theta[k] = f_one <= f_zero ? 1.0 : 0.0;
        }
      }
    }
  }

  SumNormSplit out;
  out.left.assign(space.size(), 0.0);
  for (std::size_t k = 0; k < levels; ++k) {
    for (int i = 0; i < space.size(); ++i) {
      out.left[i] += theta[k] * w.diffs[k][i];
    }
  }
  out.right.resize(space.size());
  for (int i = 0; i < space.size(); ++i) out.right[i] = f[i] - out.left[i];
  out.value = hardy_norm(space, filt, out.left, NormVariant::hp_s, 1.0) +
              diagonal_norm(space, filt, out.right);
  return out;
}

}  // namespace martcalc
