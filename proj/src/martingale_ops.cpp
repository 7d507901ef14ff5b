#include "martcalc/martingale_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "martcalc/function_norms.hpp"
#include "martcalc/summation.hpp"

namespace martcalc {

Func MartingaleExpansion::level_value(int k) const {
  if (k < k_min || k > k_max()) {
    throw std::invalid_argument("level outside expansion range");
  }
  Func out = base;
  for (int i = 0; i < k - k_min; ++i) {
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += diffs[i][p];
  }
  return out;
}

MartingaleExpansion expand(const MeasureSpace& space, const Filtration& filt,
                           const Func& f, bool zero_base) {
  if (static_cast<int>(f.size()) != space.size()) {
    throw std::invalid_argument("func length != point count");
  }
  MartingaleExpansion exp;
  exp.k_min = filt.k_min;
  exp.zero_base = zero_base;

  Func prev = conditional_expectation(space, filt.level(filt.k_min), f);
  exp.base = zero_base ? Func(space.size(), 0.0) : prev;
  if (zero_base) prev.assign(space.size(), 0.0);

  for (int k = filt.k_min + 1; k <= filt.k_max(); ++k) {
    Func cur = conditional_expectation(space, filt.level(k), f);
    Func d(space.size());
    for (int p = 0; p < space.size(); ++p) d[p] = cur[p] - prev[p];
    exp.diffs.push_back(std::move(d));
    prev = std::move(cur);
  }
  return exp;
}

Func maximal_function(const MartingaleExpansion& exp) {
  const std::size_t n = exp.base.size();
  Func cur = exp.base;
  Func out(n);
  for (std::size_t p = 0; p < n; ++p) out[p] = std::abs(cur[p]);
  for (const Func& d : exp.diffs) {
    for (std::size_t p = 0; p < n; ++p) {
      cur[p] += d[p];
      out[p] = std::max(out[p], std::abs(cur[p]));
    }
  }
  return out;
}

Func square_function(const MartingaleExpansion& exp) {
  const std::size_t n = exp.base.size();
  std::vector<CompensatedSum> acc(n);
  for (const Func& d : exp.diffs) {
    for (std::size_t p = 0; p < n; ++p) acc[p].add(d[p] * d[p]);
  }
  Func out(n);
  for (std::size_t p = 0; p < n; ++p) out[p] = std::sqrt(acc[p].value());
  return out;
}

Func conditional_square_function(const MeasureSpace& space,
                                 const Filtration& filt,
                                 const MartingaleExpansion& exp) {
  if (exp.k_min != filt.k_min ||
      exp.k_max() != filt.k_max()) {
    throw std::invalid_argument("expansion does not match filtration");
  }
  const int n = space.size();
  std::vector<CompensatedSum> acc(n);
  for (int k = filt.k_min + 1; k <= filt.k_max(); ++k) {
    const Func& d = exp.diffs[k - filt.k_min - 1];
    Func sq(n);
    for (int p = 0; p < n; ++p) sq[p] = d[p] * d[p];
    Func pred = conditional_expectation(space, filt.level(k - 1), sq);
    for (int p = 0; p < n; ++p) acc[p].add(pred[p]);
  }
  Func out(n);
  for (int p = 0; p < n; ++p) out[p] = std::sqrt(acc[p].value());
  return out;
}

Paraproducts paraproducts(const MeasureSpace& space, const Filtration& filt,
                          const Func& f, const Func& g) {
  return paraproducts(space, filt, expand(space, filt, f, true),
                      expand(space, filt, g, true));
}

namespace {

// sum_k low_{k-1} d_k high, accumulated level-by-level in ascending order.
Func low_high_sum(const MartingaleExpansion& low,
                  const MartingaleExpansion& high) {
  const std::size_t n = low.base.size();
  Func running = low.base;
  std::vector<CompensatedSum> acc(n);
  for (std::size_t i = 0; i < low.diffs.size(); ++i) {
    const Func& dh = high.diffs[i];
    for (std::size_t p = 0; p < n; ++p) acc[p].add(running[p] * dh[p]);
    const Func& dl = low.diffs[i];
    for (std::size_t p = 0; p < n; ++p) running[p] += dl[p];
  }
  Func out(n);
  for (std::size_t p = 0; p < n; ++p) out[p] = acc[p].value();
  return out;
}

bool base_vanishes(const MartingaleExpansion& e) {
  if (e.zero_base) return true;
  double m = 0.0;
  for (double v : e.base) m = std::max(m, std::abs(v));
  return m <= 1e-12;
}

}  // namespace

Paraproducts paraproducts(const MeasureSpace& space, const Filtration& filt,
                          const MartingaleExpansion& fe,
                          const MartingaleExpansion& ge) {
  if (static_cast<int>(fe.base.size()) != space.size() ||
      static_cast<int>(ge.base.size()) != space.size()) {
    throw std::invalid_argument("expansion length != point count");
  }
  if (fe.k_min != filt.k_min || ge.k_min != filt.k_min ||
      fe.diffs.size() != ge.diffs.size() ||
      fe.k_max() != filt.k_max()) {
    throw std::invalid_argument("mismatched spaces or filtrations");
  }
  if (!base_vanishes(fe)) {
    throw std::invalid_argument(
        "paraproducts need a vanishing base on the first factor");
  }

  const std::size_t n = fe.base.size();
  Paraproducts out;

  std::vector<CompensatedSum> diag(n);
  for (std::size_t i = 0; i < fe.diffs.size(); ++i) {
    const Func& df = fe.diffs[i];
    const Func& dg = ge.diffs[i];
    for (std::size_t p = 0; p < n; ++p) diag[p].add(df[p] * dg[p]);
  }
  out.pi1.resize(n);
  for (std::size_t p = 0; p < n; ++p) out.pi1[p] = diag[p].value();

  out.pi2 = low_high_sum(fe, ge);
  out.pi3 = low_high_sum(ge, fe);
  return out;
}

BmoMaximalReport check_bmo_maximal(const MeasureSpace& space,
                                   const Filtration& filt, const Func& g) {
  const double bmo = bmo_norm(space, filt, g, NormVariant::BMO, true);
  if (bmo <= 0.0) {
    throw std::invalid_argument("zero BMO norm");
  }
  const Func gstar = maximal_function(expand(space, filt, g, true));
  const Func base =
      conditional_expectation(space, filt.level(filt.k_min), gstar);
  double base_sup = 0.0;
  for (double v : base) base_sup = std::max(base_sup, std::abs(v));

  BmoMaximalReport report;
  report.base_ratio = base_sup / bmo;
  report.bmo_ratio = bmo_norm(space, filt, gstar, NormVariant::BMO, true) / bmo;
  return report;
}

}  // namespace martcalc
