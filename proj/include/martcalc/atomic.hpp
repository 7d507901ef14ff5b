#pragma once

#include "martcalc/measure_space.hpp"

namespace martcalc {

// Block-supported function with vanishing level-k expectation and normalized
// size. The block must be measurable at the stated level.
struct SimpleAtom {
  Func values;
  int level = 0;
  std::vector<int> block;
  double p = 1.0;
  double q = 2.0;
};

// Checks the three atom conditions and reports each failure with its margin.
ValidationReport validate_simple_atom(const MeasureSpace& space,
                                      const Filtration& filt,
                                      const SimpleAtom& atom);

struct AtomicTerm {
  double lambda;
  SimpleAtom atom;
};

struct AtomicDecomposition {
  double p = 1.0;
  double q = 2.0;
  std::vector<AtomicTerm> terms;
  double quasi_norm() const;  // (sum |lambda_j|^p)^(1/p)
};

Func reconstruct(const AtomicDecomposition& dec, int n_points);

// Stopping-time decomposition driven by the conditional square function:
// shells between the dyadic thresholds 2^j are cut block-by-block into simple
// atoms normalized to the exact size bound. Terms are ordered by
// (shell, level, block). Reconstruction is exact up to rounding.
AtomicDecomposition stopping_time_decomposition(const MeasureSpace& space,
                                                const Filtration& filt,
                                                const Func& f, double p,
                                                double q);

// Quasi-norm of the exhibited decomposition; an upper bound for the atomic
// norm infimum.
double atomic_norm_upper(const MeasureSpace& space, const Filtration& filt,
                         const Func& f, double p, double q);

}  // namespace martcalc
