#include "martcalc/atomic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "martcalc/function_norms.hpp"
#include "martcalc/martingale_ops.hpp"
#include "martcalc/summation.hpp"

namespace martcalc {

double AtomicDecomposition::quasi_norm() const {
  CompensatedSum acc;
  for (const AtomicTerm& t : terms) acc.add(std::pow(std::abs(t.lambda), p));
  return std::pow(acc.value(), 1.0 / p);
}

Func reconstruct(const AtomicDecomposition& dec, int n_points) {
  std::vector<CompensatedSum> acc(n_points);
  for (const AtomicTerm& t : dec.terms) {
    for (int i = 0; i < n_points; ++i) {
      if (t.atom.values[i] != 0.0) acc[i].add(t.lambda * t.atom.values[i]);
    }
  }
  Func out(n_points);
  for (int i = 0; i < n_points; ++i) out[i] = acc[i].value();
  return out;
}

namespace {

double block_mass(const MeasureSpace& space, const std::vector<int>& block) {
  CompensatedSum acc;
  for (int p : block) acc.add(space.weight(p));
  return acc.value();
}

double restricted_q_norm(const MeasureSpace& space, const Func& f,
                         const std::vector<int>& block, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (int p : block) m = std::max(m, std::abs(f[p]));
    return m;
  }
  CompensatedSum acc;
  for (int p : block) {
    acc.add(space.weight(p) * std::pow(std::abs(f[p]), q));
  }
  return std::pow(acc.value(), 1.0 / q);
}

double size_exponent(double p, double q) {
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  return inv_q - 1.0 / p;
}

}  // namespace

ValidationReport validate_simple_atom(const MeasureSpace& space,
                                      const Filtration& filt,
                                      const SimpleAtom& atom) {
  ValidationReport report;
  if (static_cast<int>(atom.values.size()) != space.size()) {
    report.issues.push_back("values length != point count");
    return report;
  }
  if (atom.level < filt.k_min || atom.level > filt.k_max()) {
    report.issues.push_back("level outside filtration range");
    return report;
  }
  if (atom.block.empty()) {
    report.issues.push_back("empty block");
    return report;
  }

  std::vector<char> in_block(space.size(), 0);
  for (int p : atom.block) {
    if (p < 0 || p >= space.size()) {
      report.issues.push_back("block references unknown point");
      return report;
    }
    in_block[p] = 1;
  }

  // A must be measurable at the atom's level.
  const auto map = filt.level(atom.level).block_map(space.size());
  for (const auto& level_block : filt.level(atom.level).blocks) {
    bool any = false, all = true;
    for (int p : level_block) {
      if (in_block[p]) {
        any = true;
      } else {
        all = false;
      }
    }
    if (any && !all) {
      report.issues.push_back("block is not measurable at the atom level");
      break;
    }
  }
  (void)map;

  double sup = 0.0;
  for (double v : atom.values) sup = std::max(sup, std::abs(v));
  const double tol = 1e-12 * std::max(1.0, sup);

  for (int i = 0; i < space.size(); ++i) {
    if (!in_block[i] && std::abs(atom.values[i]) > 0.0) {
      report.issues.push_back("support leaks outside the block (point " +
                              std::to_string(i) + ")");
      break;
    }
  }

  const Func ce =
      conditional_expectation(space, filt.level(atom.level), atom.values);
  double ce_sup = 0.0;
  for (int p : atom.block) ce_sup = std::max(ce_sup, std::abs(ce[p]));
  if (ce_sup > tol) {
    report.issues.push_back("level expectation nonzero (max " +
                            std::to_string(ce_sup) + ")");
  }

  const double qn = restricted_q_norm(space, atom.values, atom.block, atom.q);
  const double bound =
      std::pow(block_mass(space, atom.block), size_exponent(atom.p, atom.q));
  if (qn > bound * (1.0 + 1e-12)) {
    report.issues.push_back("size bound violated by factor " +
                            std::to_string(qn / bound));
  }
  return report;
}

AtomicDecomposition stopping_time_decomposition(const MeasureSpace& space,
                                                const Filtration& filt,
                                                const Func& f, double p,
                                                double q) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument("p must lie in (0,1]");
  }
  if (!(q >= 1.0)) {
    throw std::invalid_argument("q must lie in [1,inf]");
  }
  const int n = space.size();
  if (static_cast<int>(f.size()) != n) {
    throw std::invalid_argument("func length != point count");
  }

  AtomicDecomposition dec;
  dec.p = p;
  dec.q = q;

  double f_sup = 0.0;
  for (double v : f) f_sup = std::max(f_sup, std::abs(v));
  if (f_sup == 0.0) return dec;

  const Func base = conditional_expectation(space, filt.level(filt.k_min), f);
  for (double v : base) {
    if (std::abs(v) > 1e-9 * std::max(1.0, f_sup)) {
      throw std::invalid_argument(
          "stopping decomposition needs a vanishing base (f_0 = 0)");
    }
  }

  const MartingaleExpansion exp = expand(space, filt, f, true);
  const int levels = static_cast<int>(exp.diffs.size());
  if (levels == 0) return dec;

  // profile[i][m] = s_{k_min+1+m}(x_i): running conditional square roots.
  std::vector<std::vector<double>> profile(n, std::vector<double>(levels));
  {
    std::vector<CompensatedSum> acc(n);
    for (int m = 0; m < levels; ++m) {
      const Func& d = exp.diffs[m];
      Func sq(n);
      for (int i = 0; i < n; ++i) sq[i] = d[i] * d[i];
      const Func pred =
          conditional_expectation(space, filt.level(filt.k_min + m), sq);
      for (int i = 0; i < n; ++i) {
        acc[i].add(pred[i]);
        profile[i][m] = std::sqrt(std::max(0.0, acc[i].value()));
      }
    }
  }

  std::vector<std::vector<int>> block_maps;
  for (int li = 0; li < filt.level_count(); ++li) {
    block_maps.push_back(filt.partitions[li].block_map(n));
  }

  // Shell j holds the contributions with 2^j < s <= 2^{j+1}; they are filed
  // under the stopping level (first crossing of 2^j) and its block.
  std::map<std::tuple<int, int, int>, Func> pieces;
  for (int m = 0; m < levels; ++m) {
    const Func& d = exp.diffs[m];
    for (int i = 0; i < n; ++i) {
      const double s = profile[i][m];
      if (s <= 0.0) continue;
      int j = static_cast<int>(std::floor(std::log2(s)));
      while (std::ldexp(1.0, j) >= s) --j;
      while (std::ldexp(1.0, j + 1) < s) ++j;
      const double threshold = std::ldexp(1.0, j);
      int cross = 0;
      while (profile[i][cross] <= threshold) ++cross;
      // nu_j = k_min + cross as a level; block index taken there.
      const int level_index = cross;  // offset from k_min
      const int block_id = block_maps[level_index][i];
      auto [it, inserted] = pieces.try_emplace(
          std::make_tuple(j, level_index, block_id), Func(n, 0.0));
      it->second[i] += d[i];
    }
  }

  // Pieces carry the rounding left over from conditional centering, so each
  // one is projected back onto the zero-expectation subspace of its block;
  // dust below 1e-14 of the data scale is dropped. Both corrections vanish
  // in exact arithmetic and stay far inside the 1e-10 reconstruction budget.
  const double dust = 1e-14 * f_sup;
  for (auto& [key, raw] : pieces) {
    const auto [j, level_index, block_id] = key;
    (void)j;
    const std::vector<int>& block =
        filt.partitions[level_index].blocks[block_id];
    CompensatedSum mass_acc, mean_acc;
    for (int i : block) {
      mass_acc.add(space.weight(i));
      mean_acc.add(space.weight(i) * raw[i]);
    }
    const double mass = mass_acc.value();
    const double mean = mean_acc.value() / mass;
    double piece_sup = 0.0;
    for (int i : block) {
      raw[i] -= mean;
      piece_sup = std::max(piece_sup, std::abs(raw[i]));
    }
    if (piece_sup <= dust) continue;
    const double qn = restricted_q_norm(space, raw, block, q);
    if (qn == 0.0) continue;
    const double lambda = qn * std::pow(mass, -size_exponent(p, q));
    SimpleAtom atom;
    atom.values.resize(n);
    for (int i = 0; i < n; ++i) atom.values[i] = raw[i] / lambda;
    atom.level = filt.k_min + level_index;
    atom.block = block;
    atom.p = p;
    atom.q = q;
    dec.terms.push_back(AtomicTerm{lambda, std::move(atom)});
  }
  return dec;
}

double atomic_norm_upper(const MeasureSpace& space, const Filtration& filt,
                         const Func& f, double p, double q) {
  const AtomicDecomposition dec =
      stopping_time_decomposition(space, filt, f, p, q);
  if (dec.terms.empty()) return 0.0;
  return dec.quasi_norm();
}

}  // namespace martcalc
