#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace lace {

using Vec = std::vector<double>;
// 50 significant decimal digits, for coefficients whose recursion is badly conditioned.
using Extended = boost::multiprecision::cpp_bin_float_50;
using ExtendedVec = std::vector<Extended>;

// Neumaier's variant of Kahan summation.
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
  // Adds a * b, keeping the rounding error of the product.
  void add_product(double a, double b) {
    const double p = a * b;
    add(p);
    comp_ += std::fma(a, b, -p);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Recursive pairwise summation; the reduction tree depends only on the size.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const auto half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double norm2_squared(std::span<const double> k) {
  double s = 0.0;
  for (double x : k) s += x * x;
  return s;
}

inline double norm_inf(std::span<const double> k) {
  double m = 0.0;
  for (double x : k) m = std::max(m, std::abs(x));
  return m;
}

// Natural-log regime threshold gamma * log(j) / j separating the
// factorised (Gaussian) regime from the decay regime. Zero at j = 1.
inline double regime_threshold(double gamma, int j) {
  return j <= 1 ? 0.0 : gamma * std::log(static_cast<double>(j)) / j;
}

}  // namespace lace
