#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "finitekey/binomial.hpp"
#include "finitekey/distribution.hpp"

namespace finitekey {

/// The five conservative constructions for the worst-case phase error
/// estimate in conventional channel estimation.
enum class EstimationMethod {
  variational,
  relative_entropy,
  chernoff,
  factorial_moment,
  klar,
};

/// Confidence-region description: a variational-distance or
/// relative-entropy ball of the given radius around the observed statistic.
struct RegionSpec {
  enum class Kind { variational_region, relative_entropy_region };
  Kind kind;
  double radius;
  double eps;
  std::uint64_t samples;
  std::size_t alphabet;

  static RegionSpec validated(Kind kind, double radius, double eps,
                              std::uint64_t samples, std::size_t alphabet) {
    if (!(radius > 0.0)) throw std::invalid_argument("region: radius <= 0");
    if (!(eps > 0.0 && eps < 1.0))
      throw std::invalid_argument("region: eps outside (0,1)");
    if (alphabet < 2) throw std::invalid_argument("region: alphabet < 2");
    return RegionSpec{kind, radius, eps, samples, alphabet};
  }
};

namespace detail {

inline void require_estimation_inputs(std::uint64_t m, std::size_t d,
                                      double eps) {
  if (m < 1) throw std::invalid_argument("estimation: m < 1");
  if (d < 2) throw std::invalid_argument("estimation: d < 2");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("estimation: eps outside (0,1)");
}

}  // namespace detail

/// Variational-distance confidence radius
/// xi = sqrt((2 ln(1/eps) + 2 d ln(m+1)) / m).
inline double xi_variational(std::uint64_t m, std::size_t d, double eps) {
  detail::require_estimation_inputs(m, d, eps);
  const double md = static_cast<double>(m);
  return std::sqrt((2.0 * std::log(1.0 / eps) +
                    2.0 * static_cast<double>(d) * std::log(md + 1.0)) /
                   md);
}

/// Relative-entropy confidence radius, in bits:
/// xi' = (log2(1/eps) + d log2(m+1)) / m.
inline double xi_relative(std::uint64_t m, std::size_t d, double eps) {
  detail::require_estimation_inputs(m, d, eps);
  const double md = static_cast<double>(m);
  return (std::log2(1.0 / eps) +
          static_cast<double>(d) * std::log2(md + 1.0)) /
         md;
}

namespace detail {

/// Worst-case offset of the variational region for a binary statistic:
/// sqrt((ln(1/eps) + 2 ln(m+1)) / (2m)). The 2m in the denominator already
/// resolves the sum-convention variational distance (|p - q| is counted on
/// both outcomes), so the offset applies directly to the error probability.
inline double variational_offset(std::uint64_t m, double eps) {
  const double md = static_cast<double>(m);
  return std::sqrt((std::log(1.0 / eps) + 2.0 * std::log(md + 1.0)) /
                   (2.0 * md));
}

/// Largest c in [observed, 1] with D(observed || c) <= radius_bits.
inline double invert_binary_divergence(double observed, double radius_bits) {
  if (observed >= 1.0) return 1.0;
  if (binary_rel_entropy_bits(observed, 1.0) <= radius_bits) return 1.0;
  double lo = observed, hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (binary_rel_entropy_bits(observed, mid) <= radius_bits)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

/// Worst-case phase error estimate at confidence level 1 - eps for the
/// given construction.
inline double worst_case_phase_error(EstimationMethod kind, std::uint64_t m,
                                     double observed, double eps) {
  detail::require_estimation_inputs(m, 2, eps);
  if (!(observed >= 0.0 && observed <= 1.0))
    throw std::invalid_argument("worst_case_phase_error: observed outside [0,1]");
  switch (kind) {
    case EstimationMethod::variational:
      return std::min(1.0, observed + detail::variational_offset(m, eps));
    case EstimationMethod::relative_entropy:
      return detail::invert_binary_divergence(observed,
                                              xi_relative(m, 2, eps));
    case EstimationMethod::chernoff:
      return invert_bound(TailBoundKind::chernoff, m, observed, eps).upper;
    case EstimationMethod::factorial_moment:
      return invert_bound(TailBoundKind::factorial_moment, m, observed, eps)
          .upper;
    case EstimationMethod::klar:
      return invert_bound(TailBoundKind::klar, m, observed, eps).upper;
  }
  throw std::invalid_argument("worst_case_phase_error: unknown method");
}

/// Eve's worst-case ambiguity 1 - h(p~) for conventional estimation, with
/// the estimate clamped at 1/2 (beyond it the formula would spuriously
/// grow again).
inline double conventional_ambiguity(EstimationMethod kind, std::uint64_t m,
                                     double observed, double eps) {
  const double p = worst_case_phase_error(kind, m, observed, eps);
  return 1.0 - binary_entropy(std::min(p, 0.5));
}

}  // namespace finitekey
