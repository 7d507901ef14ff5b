#pragma once

#include "martcalc/atomic.hpp"
#include "martcalc/dyadic_geometry.hpp"
#include "martcalc/function_norms.hpp"
#include "martcalc/measure_space.hpp"

namespace martcalc {

// Ball-supported mean-zero function with normalized size.
struct BallAtom {
  Func values;
  int center = 0;
  double radius = 0.0;
  double p = 1.0;
  double q = kInfinity;
};

// Atom for the point-dependent growth-function Hardy spaces: sup-norm bounded
// by the reciprocal Luxembourg norm of the region indicator.
struct PsiAtom {
  Func values;
  std::vector<int> region;  // ball or cube as a point set
  double p = 1.0;
};

// Fixed base point O with its level-0 cube and the level-0 cube table of one
// dyadic system.
struct BasePointContext {
  int O = 0;
  int q0_cube = -1;
  std::vector<int> ball_one;                  // B(O, 1)
  std::vector<std::pair<int, int>> level0;    // (cube id, center point)
};

BasePointContext make_base_point_context(const QuasiMetricSpace& space,
                                         const DyadicSystem& system, int O);

enum class BallNormKind { BMO_mu, Lip_alpha };

// BMO_mu: sup over the point-pair ball family of the mean oscillation.
// Lip_alpha: smallest C with osc(f, B) <= C mu(B)^alpha over the family.
double ball_norm(const QuasiMetricSpace& space, const Func& f,
                 BallNormKind kind, double alpha = 0.0);

// |f_{B(O,1)}| + ball_norm, the base-point-augmented variants.
double ball_plus_norm(const QuasiMetricSpace& space, int O, const Func& f,
                      BallNormKind kind, double alpha = 0.0);

// Point-dependent growth function value at (x, t). p = 1 uses the
// log-damped profile; p < 1 weights by the measure of B(O, d(x,O)) with the
// open-ball convention, so x = O contributes measure zero.
double musielak_psi(const QuasiMetricSpace& space, int O, double p, int x,
                    double t);

MusielakFunction psi_1(const QuasiMetricSpace& space, int O);
MusielakFunction psi_p(const QuasiMetricSpace& space, int O, double p);

enum class PlusNormKind { BMO_plus, Lip_plus, BMO_psi };

// Base-point-augmented dyadic norms: cube-average offsets at level 0 plus the
// plain dyadic norm; BMO_psi scales cube oscillations by reciprocal
// Luxembourg norms of cube indicators.
double plus_norm(const QuasiMetricSpace& space, const DyadicSystem& system,
                 const BasePointContext& ctx, const Func& g, PlusNormKind kind,
                 double p);

ValidationReport validate_ball_atom(const QuasiMetricSpace& space,
                                    const BallAtom& atom);
ValidationReport validate_psi_atom(const QuasiMetricSpace& space, int O,
                                   const PsiAtom& atom);

struct ConvertedAtom {
  int system = -1;
  SimpleAtom atom;
  double scalar = 0.0;  // original = scalar * atom
};

// Hosts a ball atom on the minimal covering cube of the lexicographically
// smallest qualifying system, renormalized to the cube size bound.
ConvertedAtom ball_atom_to_dyadic(const QuasiMetricSpace& space,
                                  const AdjacentSystems& adjacent,
                                  const BallAtom& atom);

struct BallConvertedAtom {
  BallAtom atom;
  double scalar = 0.0;
};

// Re-supports a cube atom on the outer sandwich ball of its cube.
BallConvertedAtom dyadic_atom_to_ball(const QuasiMetricSpace& space,
                                      const DyadicSystem& system,
                                      const SimpleAtom& atom);

struct MultiplierConstants {
  double decay;        // sup |h| against the decay profile
  double oscillation;  // sup of scaled oscillations over admissible balls
};

// Smallest constants for the two test-function conditions at exponent
// alpha_p; both are finite on finite spaces and reported as magnitudes.
MultiplierConstants multiplier_check(const QuasiMetricSpace& space, int O,
                                     const Func& h, double alpha_p);

// |g h|_+ / (|g|_+ (|h|_inf + 1)) with the plus norm maximized over the
// systems; BMO_plus at p = 1, Lip_plus for p < 1.
double multiplier_inequality(const QuasiMetricSpace& space,
                             const AdjacentSystems& adjacent,
                             const BasePointContext& ctx, const Func& g,
                             const Func& h, double p);

struct PiFDecomposition {
  Func pi1, pi2, pi3;
  std::vector<Func> per_system;          // f^t routed to each system
  double atomic_quasi_norm = 0.0;        // (sum |lambda|^p)^(1/p) of the split
};

// Splits f across the adjacent systems by routing each atom of its ball
// decomposition to the covering system, then sums the per-system
// paraproducts against g. The three outputs add up to f.g exactly.
PiFDecomposition pi_f_operators(const QuasiMetricSpace& space,
                                const AdjacentSystems& adjacent, const Func& f,
                                const Func& g, double p);

struct BallGrowthCheck {
  double base_integral;     // over the normalized ball, within 1e-6 of 1
  double dilated_integral;  // over the D-dilated ball
  double radius;
};

// Finds a radius at x0 normalizing the damped integral to 1, then evaluates
// the same integral over the D-dilated ball.
BallGrowthCheck ball_integral_growth_check(const QuasiMetricSpace& space,
                                           int O, double p, int x0, double D);

}  // namespace martcalc
