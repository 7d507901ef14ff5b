#include "martcalc/dyadic_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "martcalc/rng.hpp"
#include "martcalc/summation.hpp"

namespace martcalc {

QuasiMetricSpace QuasiMetricSpace::from_coordinates(
    std::vector<std::array<double, 2>> coords, int dim,
    std::vector<double> weights, double a0) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("coordinate backend supports dim 1 or 2");
  }
  if (coords.size() != weights.size() || coords.empty()) {
    throw std::invalid_argument("coordinates/weights size mismatch");
  }
  QuasiMetricSpace s;
  s.dim_ = dim;
  s.coords_ = std::move(coords);
  s.weights_ = std::move(weights);
  s.a0_ = a0;
  const int n = s.size();
  s.dist_.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = s.coords_[i][0] - s.coords_[j][0];
      const double dy = dim == 2 ? s.coords_[i][1] - s.coords_[j][1] : 0.0;
      const double d = std::sqrt(dx * dx + dy * dy);
      s.dist_[i][j] = d;
      s.dist_[j][i] = d;
    }
  }
  s.finish();
  return s;
}

QuasiMetricSpace QuasiMetricSpace::from_matrix(
    std::vector<std::vector<double>> distances, std::vector<double> weights,
    double a0) {
  QuasiMetricSpace s;
  s.dist_ = std::move(distances);
  s.weights_ = std::move(weights);
  s.a0_ = a0;
  const int n = s.size();
  if (static_cast<int>(s.dist_.size()) != n || n == 0) {
    throw std::invalid_argument("distance matrix size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(s.dist_[i].size()) != n) {
      throw std::invalid_argument("distance matrix not square");
    }
    if (s.dist_[i][i] != 0.0) {
      throw std::invalid_argument("distance matrix needs a zero diagonal");
    }
    for (int j = 0; j < n; ++j) {
      if (!(s.dist_[i][j] >= 0.0) || !std::isfinite(s.dist_[i][j])) {
        throw std::invalid_argument("distances must be finite nonnegative");
      }
      if (std::abs(s.dist_[i][j] - s.dist_[j][i]) >
          1e-12 * std::max(1.0, s.dist_[i][j])) {
        throw std::invalid_argument("distance matrix not symmetric");
      }
    }
  }
  s.finish();
  return s;
}

void QuasiMetricSpace::finish() {
  const int n = size();
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weights must be strictly positive finite");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (dist_[i][j] == 0.0) {
        throw std::invalid_argument(
            "zero-distance distinct points (" + std::to_string(i) + "," +
            std::to_string(j) + "); merge them first");
      }
      max_distance_ = std::max(max_distance_, dist_[i][j]);
    }
  }
  total_mass_ = compensated_total(weights_);

  order_.resize(n);
  masses_.resize(n);
  for (int i = 0; i < n; ++i) {
    order_[i].resize(n);
    for (int j = 0; j < n; ++j) order_[i][j] = j;
    std::sort(order_[i].begin(), order_[i].end(), [&](int a, int b) {
      if (dist_[i][a] != dist_[i][b]) return dist_[i][a] < dist_[i][b];
      return a < b;
    });
    masses_[i].resize(n);
    CompensatedSum acc;
    for (int r = 0; r < n; ++r) {
      acc.add(weights_[order_[i][r]]);
      masses_[i][r] = acc.value();
    }
  }
}

std::vector<int> QuasiMetricSpace::ball(int center, double r) const {
  std::vector<int> out;
  for (int p : order_[center]) {
    if (dist_[center][p] < r) {
      out.push_back(p);
    } else {
      break;
    }
  }
  return out;
}

double QuasiMetricSpace::ball_mass(int center, double r) const {
  const auto& ord = order_[center];
  int lo = 0, hi = size();  // first rank with distance >= r
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (dist_[center][ord[mid]] < r) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo == 0 ? 0.0 : masses_[center][lo - 1];
}

ConstantEstimates estimate_constants(const QuasiMetricSpace& space,
                                     std::uint64_t sample_seed) {
  const int n = space.size();
  ConstantEstimates est{1.0, 0.0, 1};

  if (n <= 512) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dij = space.distance(i, j);
        for (int k = 0; k < n; ++k) {
          const double den = space.distance(i, k) + space.distance(k, j);
          if (den > 0.0) est.a0 = std::max(est.a0, dij / den);
        }
      }
    }
  } else {
    Rng rng(sample_seed);
    for (int t = 0; t < 4'000'000; ++t) {
      const int i = static_cast<int>(rng.next_below(n));
      const int j = static_cast<int>(rng.next_below(n));
      const int k = static_cast<int>(rng.next_below(n));
      if (i == j) continue;
      const double den = space.distance(i, k) + space.distance(k, j);
      if (den > 0.0) est.a0 = std::max(est.a0, space.distance(i, j) / den);
    }
  }

  // Doubling ratio over the jump radii of either ball.
  double max_ratio = 1.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> radii;
    for (int j = 0; j < n; ++j) {
      const double d = space.distance(i, j);
      if (d > 0.0) {
        radii.push_back(d);
        radii.push_back(0.5 * d);
      }
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    for (double v : radii) {
      for (double r : {v, v * (1.0 + 1e-9)}) {
        const double small = space.ball_mass(i, r);
        if (small <= 0.0) continue;
        max_ratio = std::max(max_ratio, space.ball_mass(i, 2.0 * r) / small);
      }
    }
  }
  est.c_mu = std::log2(max_ratio);

  // Greedy half-radius covers on a subsampled radius grid.
  int a1 = 1;
  for (int i = 0; i < n; ++i) {
    std::vector<double> radii;
    for (int j = 0; j < n; ++j) {
      if (space.distance(i, j) > 0.0) radii.push_back(space.distance(i, j));
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    const int step = std::max<std::size_t>(1, radii.size() / 16);
    for (std::size_t ri = 0; ri < radii.size(); ri += step) {
      const double r = radii[ri] * (1.0 + 1e-9);
      const std::vector<int> members = space.ball(i, r);
      std::vector<char> covered(members.size(), 0);
      int count = 0;
      for (std::size_t m = 0; m < members.size(); ++m) {
        if (covered[m]) continue;
        ++count;
        const int z = members[m];
        for (std::size_t l = m; l < members.size(); ++l) {
          if (!covered[l] && space.distance(z, members[l]) < 0.5 * r) {
            covered[l] = 1;
          }
        }
      }
      a1 = std::max(a1, count);
    }
  }
  est.a1 = a1;
  return est;
}

std::vector<int> greedy_net(const QuasiMetricSpace& space, double r,
                            const std::vector<int>& order) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("net radius must be positive");
  }
  std::vector<int> visit = order;
  if (visit.empty()) {
    visit.resize(space.size());
    for (int i = 0; i < space.size(); ++i) visit[i] = i;
  }
  std::vector<int> net;
  for (int p : visit) {
    bool separated = true;
    for (int z : net) {
      if (space.distance(p, z) < r) {
        separated = false;
        break;
      }
    }
    if (separated) net.push_back(p);
  }
  return net;
}

double DyadicSystem::scale(int k) const { return std::pow(delta, k); }

double cube_diameter(const QuasiMetricSpace& space, const DyadicCube& cube) {
  double d = 0.0;
  for (std::size_t a = 0; a < cube.points.size(); ++a) {
    for (std::size_t b = a + 1; b < cube.points.size(); ++b) {
      d = std::max(d, space.distance(cube.points[a], cube.points[b]));
    }
  }
  return d;
}

namespace {

void finalize_system(const QuasiMetricSpace& space, DyadicSystem& system) {
  for (auto& level : system.levels) {
    for (auto& cube : level) {
      std::sort(cube.points.begin(), cube.points.end());
      cube.diameter = cube_diameter(space, cube);
    }
  }
}

}  // namespace

ValidationReport verify_system(const QuasiMetricSpace& space,
                               const DyadicSystem& system) {
  ValidationReport report;
  const int n = space.size();
  const double eps = 1e-12;

  for (int li = 0; li < system.level_count(); ++li) {
    const int k = system.k_min + li;
    const double sk = system.scale(k);
    const auto& cubes = system.levels[li];

    std::vector<int> seen(n, -1);
    for (int c = 0; c < static_cast<int>(cubes.size()); ++c) {
      if (cubes[c].points.empty()) {
        report.issues.push_back("level " + std::to_string(k) + " cube " +
                                std::to_string(c) + " empty");
      }
      for (int p : cubes[c].points) {
        if (seen[p] != -1) {
          report.issues.push_back("level " + std::to_string(k) + " point " +
                                  std::to_string(p) + " in two cubes");
        }
        seen[p] = c;
        if (system.cube_of[li][p] != c) {
          report.issues.push_back("level " + std::to_string(k) +
                                  " cube_of inconsistent at point " +
                                  std::to_string(p));
        }
      }
    }
    for (int p = 0; p < n; ++p) {
      if (seen[p] == -1) {
        report.issues.push_back("level " + std::to_string(k) + " point " +
                                std::to_string(p) + " uncovered");
      }
    }

    // Center separation and point coverage.
    for (std::size_t a = 0; a < cubes.size(); ++a) {
      for (std::size_t b = a + 1; b < cubes.size(); ++b) {
        if (space.distance(cubes[a].center, cubes[b].center) <
            system.c0 * sk * (1.0 - eps)) {
          report.issues.push_back("level " + std::to_string(k) +
                                  " centers too close: cubes " +
                                  std::to_string(a) + "," + std::to_string(b));
        }
      }
    }
    for (int p = 0; p < n; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& cube : cubes) {
        best = std::min(best, space.distance(p, cube.center));
      }
      if (!(best < system.C0 * sk * (1.0 + eps))) {
        report.issues.push_back("level " + std::to_string(k) + " point " +
                                std::to_string(p) + " not covered by centers");
      }
    }

    // Sandwich balls.
    for (int c = 0; c < static_cast<int>(cubes.size()); ++c) {
      const int z = cubes[c].center;
      for (int p : cubes[c].points) {
        if (!(space.distance(z, p) < system.C1 * sk * (1.0 + eps))) {
          report.issues.push_back("level " + std::to_string(k) + " cube " +
                                  std::to_string(c) +
                                  " outer sandwich violated at point " +
                                  std::to_string(p));
        }
      }
      for (int p = 0; p < n; ++p) {
        if (space.distance(z, p) < system.c1 * sk * (1.0 - eps) &&
            seen[p] != c) {
          report.issues.push_back("level " + std::to_string(k) + " cube " +
                                  std::to_string(c) +
                                  " inner sandwich violated at point " +
                                  std::to_string(p));
        }
      }
    }

    // Nestedness via parent links.
    if (li > 0) {
      for (int c = 0; c < static_cast<int>(cubes.size()); ++c) {
        const int parent = cubes[c].parent;
        if (parent < 0 ||
            parent >= static_cast<int>(system.levels[li - 1].size())) {
          report.issues.push_back("level " + std::to_string(k) + " cube " +
                                  std::to_string(c) + " missing parent");
          continue;
        }
        for (int p : cubes[c].points) {
          if (system.cube_of[li - 1][p] != parent) {
            report.issues.push_back("level " + std::to_string(k) + " cube " +
                                    std::to_string(c) +
                                    " escapes its parent at point " +
                                    std::to_string(p));
            break;
          }
        }
      }
    }
  }
  return report;
}

namespace {

DyadicSystem try_build_net_system(const QuasiMetricSpace& space,
                                  const DyadicParams& params,
                                  const std::vector<int>& order,
                                  std::string* failure) {
  DyadicSystem system;
  system.k_min = params.k_min;
  system.delta = params.delta;
  system.c0 = params.c0;
  system.C0 = params.C0;
  system.c1 = params.c0 / (3.0 * space.a0() * space.a0());
  system.C1 = 2.0 * space.a0() * params.C0;

  const int level_count = params.k_max - params.k_min + 1;
  const int n = space.size();

  // Nested nets, finest first; coarser nets select from the finer ones so
  // every coarse center stays a center below.
  std::vector<std::vector<int>> nets(level_count);
  for (int li = level_count - 1; li >= 0; --li) {
    const int k = params.k_min + li;
    const double r = params.c0 * std::pow(params.delta, k);
    if (li == level_count - 1) {
      nets[li] = greedy_net(space, r, order);
    } else {
      nets[li] = greedy_net(space, r, nets[li + 1]);
    }
    for (int p = 0; p < n; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (int z : nets[li]) best = std::min(best, space.distance(p, z));
      if (!(best < params.C0 * std::pow(params.delta, k))) {
        if (failure) {
          *failure = "net coverage misses C0 at level " + std::to_string(k) +
                     " (point " + std::to_string(p) + "); C0/c0 too tight";
        }
        return DyadicSystem{};
      }
    }
  }

  system.levels.resize(level_count);
  system.cube_of.assign(level_count, std::vector<int>(n, -1));

  for (int li = 0; li < level_count; ++li) {
    std::vector<int> centers = nets[li];
    std::sort(centers.begin(), centers.end());

    // Anchor each center to the parent cube it lives in; points may only
    // choose centers anchored to their own parent.
    std::vector<int> anchor(centers.size(), 0);
    if (li > 0) {
      for (std::size_t c = 0; c < centers.size(); ++c) {
        anchor[c] = system.cube_of[li - 1][centers[c]];
      }
    }

    std::map<std::pair<int, int>, int> cube_index;  // (anchor, center)
    auto& cubes = system.levels[li];
    for (int p = 0; p < n; ++p) {
      const int parent = li > 0 ? system.cube_of[li - 1][p] : 0;
      int best_center = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        if (li > 0 && anchor[c] != parent) continue;
        const double d = space.distance(p, centers[c]);
        if (d < best_d ||
            (d == best_d && centers[c] < best_center)) {
          best_d = d;
          best_center = centers[c];
        }
      }
      if (best_center < 0) {
        if (failure) *failure = "no parent-consistent center available";
        return DyadicSystem{};
      }
      auto [it, inserted] =
          cube_index.try_emplace({parent, best_center},
                                 static_cast<int>(cubes.size()));
      if (inserted) {
        DyadicCube cube;
        cube.center = best_center;
        cube.parent = li > 0 ? parent : -1;
        cubes.push_back(std::move(cube));
      }
      cubes[it->second].points.push_back(p);
      system.cube_of[li][p] = it->second;
    }
    if (li > 0) {
      for (int c = 0; c < static_cast<int>(cubes.size()); ++c) {
        system.levels[li - 1][cubes[c].parent].children.push_back(c);
      }
    }
  }

  finalize_system(space, system);
  return system;
}

}  // namespace

DyadicSystem build_dyadic_system(const QuasiMetricSpace& space,
                                 const DyadicParams& params,
                                 std::uint64_t seed, int retry_cap) {
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1)");
  }
  if (!(params.c0 > 0.0 && params.c0 <= params.C0)) {
    throw std::invalid_argument("need 0 < c0 <= C0");
  }
  if (params.k_max < params.k_min) {
    throw std::invalid_argument("empty level range");
  }
  const double a0 = space.a0();
  if (12.0 * a0 * a0 * a0 * params.C0 * params.delta >
      params.c0 * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "parameter inequality 12 A0^3 C0 delta <= c0 violated");
  }

  std::string last_failure = "construction failed";
  for (int attempt = 0; attempt < retry_cap; ++attempt) {
    std::vector<int> order(space.size());
    for (int i = 0; i < space.size(); ++i) order[i] = i;
    Rng rng(mix_seed(seed, attempt));
    rng.shuffle(order);

    std::string failure;
    DyadicSystem system =
        try_build_net_system(space, params, order, &failure);
    if (system.levels.empty()) {
      last_failure = failure;
      continue;
    }
    const ValidationReport report = verify_system(space, system);
    if (report.ok()) return system;
    last_failure = report.issues.front() + " (and " +
                   std::to_string(report.issues.size() - 1) + " more)";
  }
  throw std::runtime_error("dyadic construction failed after retries: " +
                           last_failure);
}

namespace {

// Shift of the level-k grid for base shift omega in {0, 1/3, 2/3}; the
// doubling orbit keeps consecutive levels nested.
double grid_shift(double omega, int k) {
  if (omega == 0.0) return 0.0;
  const int a = omega < 0.5 ? 1 : 2;  // numerator of omega = a/3
  if (k >= 0) {
    const int pow_mod = (k % 2 == 0) ? 1 : 2;
    return static_cast<double>((pow_mod * a) % 3) / 3.0;
  }
  return static_cast<double>(a) / (3.0 * std::ldexp(1.0, -k));
}

DyadicSystem build_euclidean_grid(const QuasiMetricSpace& space,
                                  const std::array<double, 2>& omega,
                                  int k_min, int k_max) {
  const int n = space.size();
  const int dim = space.dim();
  DyadicSystem system;
  system.k_min = k_min;
  system.delta = 0.5;
  const int level_count = k_max - k_min + 1;
  system.levels.resize(level_count);
  system.cube_of.assign(level_count, std::vector<int>(n, -1));

  for (int li = 0; li < level_count; ++li) {
    const int k = k_min + li;
    const double inv_len = std::ldexp(1.0, k);  // 1 / box side
    std::array<double, 2> shift = {grid_shift(omega[0], k),
                                   dim == 2 ? grid_shift(omega[1], k) : 0.0};

    std::map<std::array<long long, 2>, int> index;
    auto& cubes = system.levels[li];
    std::vector<std::array<long long, 2>> keys;
    for (int p = 0; p < n; ++p) {
      std::array<long long, 2> key = {0, 0};
      for (int a = 0; a < dim; ++a) {
        key[a] = static_cast<long long>(
            std::floor(space.coord(p)[a] * inv_len - shift[a]));
      }
      auto [it, inserted] =
          index.try_emplace(key, static_cast<int>(cubes.size()));
      if (inserted) {
        cubes.push_back(DyadicCube{});
        keys.push_back(key);
      }
      cubes[it->second].points.push_back(p);
      system.cube_of[li][p] = it->second;
    }

    // Center: the member point deepest inside its box.
    for (int c = 0; c < static_cast<int>(cubes.size()); ++c) {
      double best = -1.0;
      for (int p : cubes[c].points) {
        double clearance = std::numeric_limits<double>::infinity();
        for (int a = 0; a < dim; ++a) {
          const double lo = (keys[c][a] + shift[a]) / inv_len;
          const double hi = lo + 1.0 / inv_len;
          clearance = std::min(
              clearance, std::min(space.coord(p)[a] - lo, hi - space.coord(p)[a]));
        }
        if (clearance > best) {
          best = clearance;
          cubes[c].center = p;
        }
      }
      if (li > 0) {
        cubes[c].parent = system.cube_of[li - 1][cubes[c].points.front()];
        for (int p : cubes[c].points) {
          if (system.cube_of[li - 1][p] != cubes[c].parent) {
            throw std::runtime_error("grid nesting broke at a cut point");
          }
        }
        system.levels[li - 1][cubes[c].parent].children.push_back(c);
      }
    }
  }

  finalize_system(space, system);

  // Measured constants: classical grids are certified directly rather than
  // through the net-parameter gate.
  double c0 = std::numeric_limits<double>::infinity();
  double C0 = 0.0;
  double c1 = std::numeric_limits<double>::infinity();
  double C1 = 0.0;
  for (int li = 0; li < level_count; ++li) {
    const int k = k_min + li;
    const double sk = system.scale(k);
    const double inv_len = std::ldexp(1.0, k);
    std::array<double, 2> shift = {grid_shift(omega[0], k),
                                   dim == 2 ? grid_shift(omega[1], k) : 0.0};
    const auto& cubes = system.levels[li];
    for (std::size_t a = 0; a < cubes.size(); ++a) {
      for (std::size_t b = a + 1; b < cubes.size(); ++b) {
        c0 = std::min(c0,
                      space.distance(cubes[a].center, cubes[b].center) / sk);
      }
    }
    for (int p = 0; p < n; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& cube : cubes) {
        best = std::min(best, space.distance(p, cube.center));
      }
      C0 = std::max(C0, best / sk);
    }
    for (const auto& cube : cubes) {
      const int z = cube.center;
      double clearance = std::numeric_limits<double>::infinity();
      for (int axis = 0; axis < dim; ++axis) {
        const long long key = static_cast<long long>(
            std::floor(space.coord(z)[axis] * inv_len - shift[axis]));
        const double lo = (key + shift[axis]) / inv_len;
        const double hi = lo + 1.0 / inv_len;
        clearance = std::min(clearance, std::min(space.coord(z)[axis] - lo,
                                                 hi - space.coord(z)[axis]));
      }
      c1 = std::min(c1, std::max(clearance, 0.0) / sk);
      for (int p : cube.points) {
        C1 = std::max(C1, space.distance(z, p) / sk);
      }
    }
  }
  system.c0 = std::isfinite(c0) ? c0 : 1.0;
  system.C0 = C0 * (1.0 + 1e-9) + 1e-300;
  system.c1 = std::isfinite(c1) ? c1 : 0.0;
  system.C1 = C1 * (1.0 + 1e-9) + 1e-300;
  return system;
}

}  // namespace

AdjacentSystems euclidean_shifted_grids(const QuasiMetricSpace& space,
                                        int depth, int k_min, bool certify) {
  if (!space.has_coordinates()) {
    throw std::invalid_argument("shifted grids need coordinate data");
  }
  if (depth < k_min) {
    throw std::invalid_argument("depth below k_min");
  }
  const int dim = space.dim();
  AdjacentSystems adjacent;
  const std::array<double, 3> shifts = {0.0, 1.0 / 3.0, 2.0 / 3.0};
  if (dim == 1) {
    for (double w : shifts) {
      adjacent.systems.push_back(
          build_euclidean_grid(space, {w, 0.0}, k_min, depth));
    }
  } else {
    for (double wx : shifts) {
      for (double wy : shifts) {
        adjacent.systems.push_back(
            build_euclidean_grid(space, {wx, wy}, k_min, depth));
      }
    }
  }
  if (certify) {
    const CoveringCheck check = check_covering(space, adjacent);
    if (!check.uncovered.empty()) {
      throw std::runtime_error("shifted grids failed the covering check");
    }
    adjacent.covering_constant = check.achieved_constant;
  }
  return adjacent;
}

CoveringCheck check_covering(const QuasiMetricSpace& space,
                             const AdjacentSystems& adjacent) {
  CoveringCheck out;
  const int n = space.size();
  const int n_sys = static_cast<int>(adjacent.systems.size());

  for (int i = 0; i < n; ++i) {
    const auto& ord = space.by_distance(i);
    std::vector<double> radii;
    for (int j = 0; j < n; ++j) {
      if (space.distance(i, j) > 0.0) radii.push_back(space.distance(i, j));
    }
    radii.push_back((space.max_distance() + 1.0) * (1.0 + 1e-9));
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    // counters[t][li]: how many current ball points sit in the cube of i.
    std::vector<std::vector<int>> counters(n_sys);
    for (int t = 0; t < n_sys; ++t) {
      counters[t].assign(adjacent.systems[t].level_count(), 0);
    }
    int taken = 0;
    for (double r : radii) {
      while (taken < n && space.distance(i, ord[taken]) < r) {
        const int p = ord[taken];
        for (int t = 0; t < n_sys; ++t) {
          const auto& sys = adjacent.systems[t];
          for (int li = 0; li < sys.level_count(); ++li) {
            if (sys.cube_of[li][p] == sys.cube_of[li][i]) ++counters[t][li];
          }
        }
        ++taken;
      }
      double best = std::numeric_limits<double>::infinity();
      for (int t = 0; t < n_sys; ++t) {
        const auto& sys = adjacent.systems[t];
        for (int li = 0; li < sys.level_count(); ++li) {
          if (counters[t][li] == taken) {
            best = std::min(
                best, sys.levels[li][sys.cube_of[li][i]].diameter);
          }
        }
      }
      if (!std::isfinite(best)) {
        out.uncovered.emplace_back(i, r);
      } else {
        out.achieved_constant = std::max(out.achieved_constant, best / r);
      }
    }
  }
  return out;
}

AdjacentSystems build_adjacent_systems(const QuasiMetricSpace& space,
                                       const DyadicParams& params, int K,
                                       std::uint64_t seed, int retry_cap) {
  const double a0 = space.a0();
  if (96.0 * std::pow(a0, 6.0) * params.delta > 1.0 + 1e-12) {
    throw std::invalid_argument(
        "parameter inequality 96 A0^6 delta <= 1 violated");
  }
  if (K < 1) {
    throw std::invalid_argument("K must be at least 1");
  }

  CoveringCheck last_check;
  for (int attempt = 0; attempt < retry_cap; ++attempt) {
    AdjacentSystems adjacent;
    for (int t = 0; t < K; ++t) {
      adjacent.systems.push_back(build_dyadic_system(
          space, params, mix_seed(seed, attempt * K + t)));
    }
    last_check = check_covering(space, adjacent);
    if (last_check.uncovered.empty()) {
      adjacent.covering_constant = last_check.achieved_constant;
      return adjacent;
    }
  }
  std::string msg = "covering not achieved for requested K; misses:";
  for (std::size_t i = 0; i < std::min<std::size_t>(4, last_check.uncovered.size());
       ++i) {
    msg += " (center " + std::to_string(last_check.uncovered[i].first) +
           ", r " + std::to_string(last_check.uncovered[i].second) + ")";
  }
  throw std::runtime_error(msg);
}

BallCover cover_ball(const QuasiMetricSpace& space,
                     const AdjacentSystems& adjacent, int center, double r) {
  const std::vector<int> ball = space.ball(center, r);
  BallCover best;
  double best_diam = std::numeric_limits<double>::infinity();
  for (int t = 0; t < static_cast<int>(adjacent.systems.size()); ++t) {
    const auto& sys = adjacent.systems[t];
    for (int li = 0; li < sys.level_count(); ++li) {
      const int c = sys.cube_of[li][center];
      const auto& cube = sys.levels[li][c];
      if (static_cast<int>(cube.points.size()) < static_cast<int>(ball.size()))
        continue;
      bool contains = true;
      for (int p : ball) {
        if (sys.cube_of[li][p] != c) {
          contains = false;
          break;
        }
      }
      if (contains && cube.diameter < best_diam) {
        best_diam = cube.diameter;
        best = BallCover{t, li, c, cube.diameter};
      }
    }
  }
  if (best.system < 0) {
    throw std::runtime_error("no qualifying cube covers the ball");
  }
  return best;
}

std::pair<MeasureSpace, Filtration> system_to_filtration(
    const QuasiMetricSpace& space, const DyadicSystem& system) {
  Filtration filt;
  filt.k_min = system.k_min;
  for (const auto& level : system.levels) {
    Partition part;
    for (const auto& cube : level) part.blocks.push_back(cube.points);
    filt.partitions.push_back(std::move(part));
  }
  return {MeasureSpace(SpaceKind::sigma_finite, space.weights()),
          std::move(filt)};
}

}  // namespace martcalc
