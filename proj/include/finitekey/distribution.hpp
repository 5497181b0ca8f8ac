#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace finitekey {

inline constexpr double kDistributionTolerance = 1e-12;

namespace detail {

/// Shannon entropy in bits of a nonnegative weight vector; entries below
/// zero are clamped and 0*log2(0) contributes nothing. No normalization
/// check is performed here.
inline double entropy_bits(std::span<const double> weights) {
  double s = 0.0;
  for (double w : weights) {
    if (w > 0.0) s -= w * std::log2(w);
  }
  return s;
}

}  // namespace detail

/// Empirical probability mass function over a finite alphabet together with
/// the sample count it was built from. samples == 0 denotes an idealized
/// distribution (a statistic in the infinite-sample limit).
struct EmpiricalDistribution {
  std::vector<double> probs;
  std::uint64_t samples = 0;

  std::size_t alphabet_size() const { return probs.size(); }

  /// Validating constructor. Entries must be nonnegative, sum to 1 within
  /// 1e-12, and (when samples > 0) each be an integer multiple of
  /// 1/samples within 1e-12.
  static EmpiricalDistribution validated(std::vector<double> probs,
                                         std::uint64_t samples) {
    if (probs.empty()) throw std::invalid_argument("distribution: empty alphabet");
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw std::invalid_argument("distribution: negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kDistributionTolerance)
      throw std::invalid_argument("distribution: entries do not sum to 1");
    if (samples > 0) {
      const double m = static_cast<double>(samples);
      for (double p : probs) {
        const double k = std::round(p * m);
        if (std::abs(p - k / m) > kDistributionTolerance)
          throw std::invalid_argument(
              "distribution: entry is not a multiple of 1/m");
      }
    }
    return EmpiricalDistribution{std::move(probs), samples};
  }
};

/// Binary entropy h(p) in bits, with h(0) = h(1) = 0.
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binary_entropy: p outside [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double shannon_entropy(const EmpiricalDistribution& dist) {
  return detail::entropy_bits(dist.probs);
}

/// Relative entropy D(P||Q) in bits. Returns +infinity when P puts mass
/// where Q does not; callers treat that value as an infeasibility signal
/// rather than an error.
inline double relative_entropy(const EmpiricalDistribution& p,
                               const EmpiricalDistribution& q) {
  if (p.alphabet_size() != q.alphabet_size())
    throw std::invalid_argument("relative_entropy: alphabet mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    if (pi <= 0.0) continue;
    const double qi = q.probs[i];
    if (qi <= 0.0) return std::numeric_limits<double>::infinity();
    s += pi * std::log2(pi / qi);
  }
  return s;
}

/// Variational distance sum_x |P(x) - Q(x)|, in [0, 2]. This is the sum
/// convention, twice the half-distance.
inline double variational_distance(const EmpiricalDistribution& p,
                                   const EmpiricalDistribution& q) {
  if (p.alphabet_size() != q.alphabet_size())
    throw std::invalid_argument("variational_distance: alphabet mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i)
    s += std::abs(p.probs[i] - q.probs[i]);
  return s;
}

}  // namespace finitekey
