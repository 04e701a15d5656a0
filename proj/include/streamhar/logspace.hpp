#ifndef STREAMHAR_LOGSPACE_HPP
#define STREAMHAR_LOGSPACE_HPP

#include <cmath>
#include <limits>
#include <span>

namespace streamhar {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum(exp(x))) with the max-shift trick; -inf for an all -inf input.
inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) {
    if (x > m) m = x;
  }
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

// Subtracts the log normalizer in place and returns it.
inline double log_normalize(std::span<double> xs) {
  double z = log_sum_exp(xs);
  if (z != kNegInf) {
    for (double& x : xs) x -= z;
  }
  return z;
}

inline double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace streamhar

#endif  // STREAMHAR_LOGSPACE_HPP
