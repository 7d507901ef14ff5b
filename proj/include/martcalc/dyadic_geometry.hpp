#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "martcalc/measure_space.hpp"

namespace martcalc {

// Finite quasi-metric measure space. Distances are held as a full matrix;
// Euclidean inputs additionally keep coordinates so grid-based constructions
// can use them. Zero-distance distinct points are rejected: merge them first.
class QuasiMetricSpace {
 public:
  static QuasiMetricSpace from_coordinates(std::vector<std::array<double, 2>> coords,
                                           int dim, std::vector<double> weights,
                                           double a0 = 1.0);
  static QuasiMetricSpace from_matrix(std::vector<std::vector<double>> distances,
                                      std::vector<double> weights, double a0);

  int size() const { return static_cast<int>(weights_.size()); }
  double weight(int i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double total_mass() const { return total_mass_; }
  double a0() const { return a0_; }
  bool has_coordinates() const { return dim_ > 0; }
  int dim() const { return dim_; }
  const std::array<double, 2>& coord(int i) const { return coords_[i]; }

  double distance(int i, int j) const { return dist_[i][j]; }
  double max_distance() const { return max_distance_; }

  // Open ball {y : d(y, x) < r} as point ids, in ascending distance order.
  std::vector<int> ball(int center, double r) const;
  double ball_mass(int center, double r) const;

  // Point ids sorted by distance from the center (center first).
  const std::vector<int>& by_distance(int center) const {
    return order_[center];
  }

 private:
  QuasiMetricSpace() = default;
  void finish();

  int dim_ = 0;
  std::vector<std::array<double, 2>> coords_;
  std::vector<std::vector<double>> dist_;
  std::vector<double> weights_;
  double total_mass_ = 0.0;
  double a0_ = 1.0;
  double max_distance_ = 0.0;
  std::vector<std::vector<int>> order_;       // per point, by distance
  std::vector<std::vector<double>> masses_;   // prefix masses along order_
};

struct ConstantEstimates {
  double a0;    // max triple ratio d(x,y) / (d(x,z) + d(z,y))
  double c_mu;  // max log2 of mu B(x,2r) / mu B(x,r)
  int a1;       // greedy half-radius covering number
};

ConstantEstimates estimate_constants(const QuasiMetricSpace& space,
                                     std::uint64_t sample_seed = 1);

// Greedy maximal r-separated subset in the given visit order (default: input
// order). Every point ends up within r of the returned net.
std::vector<int> greedy_net(const QuasiMetricSpace& space, double r,
                            const std::vector<int>& order = {});

struct DyadicCube {
  int center = -1;            // point id of the reference center
  std::vector<int> points;    // members, ascending
  int parent = -1;            // cube index in the previous level
  std::vector<int> children;  // cube indices in the next level
  double diameter = 0.0;      // max pairwise member distance, precomputed
};

struct DyadicSystem {
  int k_min = 0;
  double delta = 0.5;
  double c0 = 1.0;
  double C0 = 1.0;
  double c1 = 0.0;  // inner sandwich radius coefficient
  double C1 = 0.0;  // outer sandwich radius coefficient
  std::vector<std::vector<DyadicCube>> levels;
  std::vector<std::vector<int>> cube_of;  // [level_index][point] -> cube id

  int level_count() const { return static_cast<int>(levels.size()); }
  int k_max() const { return k_min + level_count() - 1; }
  double scale(int k) const;  // delta^k
};

// Checks partition/nesting/sandwich/separation/coverage exhaustively.
ValidationReport verify_system(const QuasiMetricSpace& space,
                               const DyadicSystem& system);

struct DyadicParams {
  double delta;
  double c0;
  double C0;
  int k_min;
  int k_max;
};

// Net-based construction: nested greedy nets fine-to-coarse, membership by
// closest center corrected top-down for parent consistency. Requires
// 12 A0^3 C0 delta <= c0; retries with reshuffled orders until the sandwich
// checks pass, then fails with witnesses.
DyadicSystem build_dyadic_system(const QuasiMetricSpace& space,
                                 const DyadicParams& params,
                                 std::uint64_t seed, int retry_cap = 16);

struct AdjacentSystems {
  std::vector<DyadicSystem> systems;
  double covering_constant = 0.0;  // max over checked balls of diam(Q) / r
};

// Shifted nested grids on [0,1)^dim (dim 1 or 2), shifts {0,1/3,2/3} per
// axis, K = 3^dim systems covering every ball within diameter 6 sqrt(dim) r.
// With certify set, the covering constant is measured exhaustively over the
// point-pair ball family.
AdjacentSystems euclidean_shifted_grids(const QuasiMetricSpace& space,
                                        int depth, int k_min = -2,
                                        bool certify = true);

struct CoveringCheck {
  double achieved_constant = 0.0;  // max over balls of best diam(Q) / r
  std::vector<std::pair<int, double>> uncovered;  // (center, radius) misses
};

// Exhaustive scan of the point-pair ball family (plus a whole-space ball per
// center) against the adjacent systems.
CoveringCheck check_covering(const QuasiMetricSpace& space,
                             const AdjacentSystems& adjacent);

// Randomized general-metric construction: K independently seeded systems,
// verified over the full point-pair ball family. Requires 96 A0^6 delta <= 1.
AdjacentSystems build_adjacent_systems(const QuasiMetricSpace& space,
                                       const DyadicParams& params, int K,
                                       std::uint64_t seed, int retry_cap = 8);

struct BallCover {
  int system = -1;
  int level = 0;       // level index offset from k_min
  int cube = -1;
  double diameter = 0.0;
};

// Minimal-diameter cube containing the ball across all systems. Throws when
// nothing qualifies.
BallCover cover_ball(const QuasiMetricSpace& space,
                     const AdjacentSystems& adjacent, int center, double r);

// Measure space plus the two-sided filtration of cube partitions.
std::pair<MeasureSpace, Filtration> system_to_filtration(
    const QuasiMetricSpace& space, const DyadicSystem& system);

// Max pairwise distance among a cube's member points.
double cube_diameter(const QuasiMetricSpace& space, const DyadicCube& cube);

}  // namespace martcalc
