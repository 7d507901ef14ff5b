#pragma once

#include <functional>
#include <limits>

#include "martcalc/measure_space.hpp"

namespace martcalc {

enum class NormVariant {
  Hp_S,      // |S(f)|_p
  hp_s,      // |s(f)|_p
  Hp_max,    // |f*|_p
  BMO,       // sup_n |E_n |f - f_{n-1}|^2|_inf^(1/2), n past the base
  bmo,       // sup_n |E_n |f - f_n|^2|_inf^(1/2), n from the base
  h1_diag,   // sum_k |d_k f|_1
  Lambda_q,  // scaled q-oscillation over filtration events
  Lambda_sup,
  Orlicz_Hardy,  // |S(f)| in the Luxembourg norm of t / log(e + t)
};

// Growth function on [0, inf): zero at zero, positive, nondecreasing,
// unbounded. Declared lower/upper types are carried for reporting.
struct OrliczFunction {
  std::function<double(double)> eval;
  double lower_type = 1.0;
  double upper_type = 1.0;

  // t / log(e + t), lower type p for every p in (0,1), upper type 1.
  static OrliczFunction t_over_log();
};

// Point-dependent growth function; per-point slices are Orlicz.
struct MusielakFunction {
  std::function<double(int, double)> eval;

  static MusielakFunction from_orlicz(const OrliczFunction& phi);
};

// Spot-checks the growth-function axioms on a geometric grid.
ValidationReport validate_orlicz(const OrliczFunction& phi);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// (sum_i w_i |f_i|^p)^(1/p); p = infinity gives max |f_i|.
double lp_norm(const MeasureSpace& space, const Func& f, double p);

// Variant must be one of Hp_S, hp_s, Hp_max.
double hardy_norm(const MeasureSpace& space, const Filtration& filt,
                  const Func& f, NormVariant variant, double p);

// Variant BMO or bmo. With zero_base the value at the base level is treated
// as zero, matching martingale conventions where the filtration has no
// trivial level; the default uses true conditional expectations.
double bmo_norm(const MeasureSpace& space, const Filtration& filt,
                const Func& g, NormVariant variant, bool zero_base = false);

// sum_k |d_k f|_1 with the zero-base expansion.
double diagonal_norm(const MeasureSpace& space, const Filtration& filt,
                     const Func& f);

// sup over levels n and events A of mass(A)^(-1/q - alpha) (int_A |g - g_n|^q)^(1/q).
// Single blocks attain the event sup for alpha >= 0 (superadditivity of
// x -> x^(1 + q alpha)); union_cap > 1 additionally scans unions of up to
// that many blocks as a cross-check.
double event_oscillation_sup(const MeasureSpace& space, const Filtration& filt,
                             const Func& g, double alpha, double q,
                             int union_cap = 1, bool zero_base = false);

// The q-oscillation norm with alpha = 1/p - 1, p in (0,1), q in {1,2}.
double lipschitz_norm(const MeasureSpace& space, const Filtration& filt,
                      const Func& g, double p, int q, int union_cap = 1);

// sup over levels n and events A of mass(A)^(-alpha) |1_A (g - g_n)|_inf.
double lipschitz_sup_norm(const MeasureSpace& space, const Filtration& filt,
                          const Func& g, double p, int union_cap = 1);

// Luxembourg norm inf{lambda > 0 : int Psi(x, |f|/lambda) <= 1}. Brackets by
// doubling/halving from |f|_1 + |f|_inf, then bisects to relative width
// 1e-12. Returns 0 for f = 0.
double luxembourg_norm(const MeasureSpace& space, const MusielakFunction& psi,
                       const Func& f);
double luxembourg_norm(const MeasureSpace& space, const OrliczFunction& phi,
                       const Func& f);

enum class SplitStrategy { trivial_left, trivial_right, coordinate_descent };

struct SumNormSplit {
  double value;  // |left|_{h1} + |right|_{h1_d}, an upper bound of the
                 // infimum over all splits
  Func left;
  Func right;
};

// Exhibits a split f = left + right and the resulting sum-space bound.
// coordinate_descent runs a per-level convex search seeded from the better
// trivial split, so it never exceeds either one.
SumNormSplit sum_norm_upper(const MeasureSpace& space, const Filtration& filt,
                            const Func& f, SplitStrategy strategy);

}  // namespace martcalc
