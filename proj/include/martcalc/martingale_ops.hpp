#pragma once

#include "martcalc/measure_space.hpp"

namespace martcalc {

// Martingale of f along a filtration, stored as base value plus one
// difference per refinement level. With zero_base set, the base is forced to
// zero and the first difference absorbs the coarse-level expectation, so
// partial sums still reconstruct E_k f exactly.
struct MartingaleExpansion {
  int k_min = 0;
  bool zero_base = true;
  Func base;                // value at level k_min (zeros when zero_base)
  std::vector<Func> diffs;  // diffs[i] = difference at level k_min + 1 + i

  int k_max() const { return k_min + static_cast<int>(diffs.size()); }

  // f_k = base + sum of differences up to level k.
  Func level_value(int k) const;
};

MartingaleExpansion expand(const MeasureSpace& space, const Filtration& filt,
                           const Func& f, bool zero_base = true);

// f* = sup_k |f_k| over all levels including the base.
Func maximal_function(const MartingaleExpansion& exp);

// S(f) = (sum_k |d_k f|^2)^(1/2).
Func square_function(const MartingaleExpansion& exp);

// s(f) = (sum_k E_{k-1} |d_k f|^2)^(1/2).
Func conditional_square_function(const MeasureSpace& space,
                                 const Filtration& filt,
                                 const MartingaleExpansion& exp);

struct Paraproducts {
  Func pi1;  // diagonal: sum_k d_k f d_k g
  Func pi2;  // low-high: sum_k f_{k-1} d_k g
  Func pi3;  // high-low: sum_k g_{k-1} d_k f
};

// Exact product decomposition f.g = pi1 + pi2 + pi3 along the filtration.
// Both inputs are expanded with a zero base; sums run level-by-level in
// ascending order so results are bitwise reproducible and pi2(f,g) equals
// pi3(g,f) exactly.
Paraproducts paraproducts(const MeasureSpace& space, const Filtration& filt,
                          const Func& f, const Func& g);

// General form on prepared expansions. fe must carry a vanishing base (flag
// or zero values); ge may keep its true base, which then enters the g_{k-1}
// factors of pi3.
Paraproducts paraproducts(const MeasureSpace& space, const Filtration& filt,
                          const MartingaleExpansion& fe,
                          const MartingaleExpansion& ge);

struct BmoMaximalReport {
  double base_ratio;  // (g*)_0 / |g|_BMO
  double bmo_ratio;   // |g*|_BMO / |g|_BMO
};

// Empirical constants of the maximal-function BMO bound, computed with the
// zero-base convention on g. Throws when g has zero BMO norm.
BmoMaximalReport check_bmo_maximal(const MeasureSpace& space,
                                   const Filtration& filt, const Func& g);

}  // namespace martcalc
