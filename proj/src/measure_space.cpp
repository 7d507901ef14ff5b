#include "martcalc/measure_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "martcalc/summation.hpp"

namespace martcalc {

MeasureSpace::MeasureSpace(SpaceKind kind, std::vector<double> weights)
    : kind_(kind), weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw std::invalid_argument("measure space needs at least one point");
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weights must be strictly positive finite");
    }
  }
  total_mass_ = compensated_total(weights_);
  if (kind_ == SpaceKind::probability &&
      std::abs(total_mass_ - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "probability space weights must sum to 1 within 1e-12");
  }
}

double MeasureSpace::integral(const Func& f) const {
  if (static_cast<int>(f.size()) != size()) {
    throw std::invalid_argument("func length != point count");
  }
  return weighted_total(weights_, f);
}

std::vector<int> Partition::block_map(int n_points) const {
  std::vector<int> map(n_points, -1);
  for (int b = 0; b < block_count(); ++b) {
    for (int p : blocks[b]) {
      if (p < 0 || p >= n_points) {
        throw std::invalid_argument("partition references unknown point id");
      }
      if (map[p] != -1) {
        throw std::invalid_argument("point belongs to two blocks");
      }
      map[p] = b;
    }
  }
  return map;
}

ValidationReport validate_filtration(const MeasureSpace& space,
                                     const Filtration& filt) {
  ValidationReport report;
  const int n = space.size();
  if (filt.partitions.empty()) {
    report.issues.push_back("filtration has no levels");
    return report;
  }

  std::vector<std::vector<int>> maps;
  for (int li = 0; li < filt.level_count(); ++li) {
    const int k = filt.k_min + li;
    const Partition& part = filt.partitions[li];
    std::vector<int> map(n, -1);
    for (int b = 0; b < part.block_count(); ++b) {
      if (part.blocks[b].empty()) {
        report.issues.push_back("level " + std::to_string(k) + " block " +
                                std::to_string(b) + " is empty");
      }
      for (int p : part.blocks[b]) {
        if (p < 0 || p >= n) {
          report.issues.push_back("level " + std::to_string(k) +
                                  " references unknown point " +
                                  std::to_string(p));
          continue;
        }
        if (map[p] != -1) {
          report.issues.push_back("level " + std::to_string(k) + " point " +
                                  std::to_string(p) + " in two blocks");
        }
        map[p] = b;
      }
    }
    for (int p = 0; p < n; ++p) {
      if (map[p] == -1) {
        report.issues.push_back("level " + std::to_string(k) + " point " +
                                std::to_string(p) + " uncovered");
      }
    }
    maps.push_back(std::move(map));
  }

  // Nestedness: every block at level k+1 sits inside one block at level k.
  for (int li = 1; li < filt.level_count(); ++li) {
    const int k = filt.k_min + li;
    const Partition& part = filt.partitions[li];
    for (int b = 0; b < part.block_count(); ++b) {
      int parent = -2;
      for (int p : part.blocks[b]) {
        if (p < 0 || p >= n) continue;
        const int pb = maps[li - 1][p];
        if (parent == -2) {
          parent = pb;
        } else if (pb != parent) {
          report.issues.push_back("level " + std::to_string(k) + " block " +
                                  std::to_string(b) +
                                  " straddles two parents");
          break;
        }
      }
    }
  }
  return report;
}

Func conditional_expectation(const MeasureSpace& space,
                             const Partition& partition, const Func& f) {
  const int n = space.size();
  if (static_cast<int>(f.size()) != n) {
    throw std::invalid_argument("func length != point count");
  }
  const auto map = partition.block_map(n);
  for (int p = 0; p < n; ++p) {
    if (map[p] == -1) {
      throw std::invalid_argument("partition does not cover the space");
    }
  }
  Func out(n, 0.0);
  for (const auto& block : partition.blocks) {
    CompensatedSum mass, sum;
    for (int p : block) {
      mass.add(space.weight(p));
      sum.add(space.weight(p) * f[p]);
    }
    const double avg = sum.value() / mass.value();
    for (int p : block) out[p] = avg;
  }
  return out;
}

namespace {

double block_mass(const MeasureSpace& space, const std::vector<int>& block) {
  CompensatedSum acc;
  for (int p : block) acc.add(space.weight(p));
  return acc.value();
}

}  // namespace

double regularity_constant(const MeasureSpace& space, const Filtration& filt,
                           std::optional<int> base_level) {
  if (filt.two_sided() && !base_level.has_value()) {
    throw std::invalid_argument("regularity needs a root level");
  }
  const int base = base_level.value_or(filt.k_min);
  if (base < filt.k_min || base > filt.k_max()) {
    throw std::invalid_argument("base level outside filtration range");
  }
  double best = 1.0;
  for (int k = base + 1; k <= filt.k_max(); ++k) {
    const auto parent_map = filt.level(k - 1).block_map(space.size());
    for (const auto& block : filt.level(k).blocks) {
      if (block.empty()) continue;
      const double child = block_mass(space, block);
      const double parent =
          block_mass(space, filt.level(k - 1).blocks[parent_map[block[0]]]);
      best = std::max(best, parent / child);
    }
  }
  return best;
}

RestrictedSpace restrict_space(const MeasureSpace& space,
                               const Filtration& filt, int level,
                               int block_index) {
  if (level < filt.k_min || level > filt.k_max()) {
    throw std::invalid_argument("level outside filtration range");
  }
  const Partition& part = filt.level(level);
  if (block_index < 0 || block_index >= part.block_count()) {
    throw std::invalid_argument("A is not a block at the requested level");
  }
  std::vector<int> points = part.blocks[block_index];
  std::sort(points.begin(), points.end());

  std::vector<int> new_index(space.size(), -1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    new_index[points[i]] = static_cast<int>(i);
  }

  const double mass = block_mass(space, points);
  std::vector<double> weights(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    weights[i] = space.weight(points[i]) / mass;
  }

  Filtration traced;
  traced.k_min = 0;
  for (int k = level; k <= filt.k_max(); ++k) {
    Partition p;
    for (const auto& block : filt.level(k).blocks) {
      std::vector<int> trace;
      for (int q : block) {
        if (new_index[q] != -1) trace.push_back(new_index[q]);
      }
      if (!trace.empty()) {
        std::sort(trace.begin(), trace.end());
        p.blocks.push_back(std::move(trace));
      }
    }
    traced.partitions.push_back(std::move(p));
  }

  return RestrictedSpace{MeasureSpace(SpaceKind::probability, weights),
                         std::move(traced), std::move(points)};
}

int find_block(const Filtration& filt, int level,
               const std::vector<int>& block_points) {
  if (level < filt.k_min || level > filt.k_max()) {
    throw std::invalid_argument("level outside filtration range");
  }
  std::vector<int> wanted = block_points;
  std::sort(wanted.begin(), wanted.end());
  const Partition& part = filt.level(level);
  for (int b = 0; b < part.block_count(); ++b) {
    std::vector<int> got = part.blocks[b];
    std::sort(got.begin(), got.end());
    if (got == wanted) return b;
  }
  throw std::invalid_argument("A is not a block at the requested level");
}

}  // namespace martcalc
