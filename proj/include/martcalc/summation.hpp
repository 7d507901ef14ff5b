#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace martcalc {

// Neumaier-compensated accumulator. Block sums feeding norm ratios are
// cancellation-sensitive, so every weighted reduction goes through this.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

// Weighted dot product sum_i w_i * x_i.
inline double weighted_total(std::span<const double> w,
                             std::span<const double> x) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < x.size(); ++i) acc.add(w[i] * x[i]);
  return acc.value();
}

}  // namespace martcalc
