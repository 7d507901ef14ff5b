#pragma once

#include <optional>
#include <string>
#include <vector>

namespace martcalc {

// A function on the sample points: one real value per point.
using Func = std::vector<double>;

enum class SpaceKind { probability, sigma_finite };

// Finite weighted point set standing in for (Omega, F, P) or (Omega, F, mu).
class MeasureSpace {
 public:
  MeasureSpace(SpaceKind kind, std::vector<double> weights);

  int size() const { return static_cast<int>(weights_.size()); }
  double weight(int i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  SpaceKind kind() const { return kind_; }
  double total_mass() const { return total_mass_; }

  // sum_i w_i f_i
  double integral(const Func& f) const;

 private:
  SpaceKind kind_;
  std::vector<double> weights_;
  double total_mass_;
};

// Disjoint blocks of point ids. Validity (coverage, disjointness) is checked
// by validate_filtration, not the constructor, so diagnostics can run on
// broken inputs.
struct Partition {
  std::vector<std::vector<int>> blocks;

  int block_count() const { return static_cast<int>(blocks.size()); }

  // point id -> block index; -1 for uncovered points. Throws if a point sits
  // in two blocks.
  std::vector<int> block_map(int n_points) const;
};

// Ordered nested partitions, levels k_min..k_min+partitions.size()-1.
// k_min = 0 with partition {Omega} models the probability setting; negative
// k_min arises from dyadic systems.
struct Filtration {
  int k_min = 0;
  std::vector<Partition> partitions;

  int level_count() const { return static_cast<int>(partitions.size()); }
  int k_max() const { return k_min + level_count() - 1; }
  const Partition& level(int k) const { return partitions[k - k_min]; }
  bool two_sided() const { return k_min < 0; }
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

// Lists nestedness violations, coverage gaps, duplicate memberships and
// empty blocks. Empty report iff the filtration invariants hold.
ValidationReport validate_filtration(const MeasureSpace& space,
                                     const Filtration& filt);

// Output is constant on each block with the weighted block average.
// Idempotent, linear, integral-preserving.
Func conditional_expectation(const MeasureSpace& space,
                             const Partition& partition, const Func& f);

// max over levels k > base and blocks A of mass(parent(A)) / mass(A).
// One-level filtrations return 1 by convention. Two-sided filtrations need
// an explicit base level.
double regularity_constant(const MeasureSpace& space, const Filtration& filt,
                           std::optional<int> base_level = std::nullopt);

struct RestrictedSpace {
  MeasureSpace space;
  Filtration filt;
  std::vector<int> points;  // new index -> original point id
};

// Conditional probability space on block A of the level-n partition, with the
// shifted filtration of traces.
RestrictedSpace restrict_space(const MeasureSpace& space,
                               const Filtration& filt, int level,
                               int block_index);

// Resolves a point set to its block index at the given level; throws if the
// set is not exactly one block.
int find_block(const Filtration& filt, int level,
               const std::vector<int>& block_points);

}  // namespace martcalc
