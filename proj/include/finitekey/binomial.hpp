#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "finitekey/distribution.hpp"

namespace finitekey {

/// Upper bounds on the lower-tail probability P[X/m <= p - delta] of the
/// binomial distribution B(m, p), plus an exact-summation oracle.
enum class TailBoundKind { chernoff, factorial_moment, klar, exact };

inline constexpr std::uint64_t kExactTailMaxSamples = 100000;

/// One-sided conservative confidence statement p <= upper at the given
/// level, produced by inverting a tail bound.
struct OneSidedInterval {
  double upper;
  double level;
  TailBoundKind method;
  std::uint64_t samples;
  double observed;
};

namespace detail {

/// Binary relative entropy D(a||b) in bits with the 0*log0 convention.
/// Infinite when b is degenerate and a is not.
inline double binary_rel_entropy_bits(double a, double b) {
  double s = 0.0;
  if (a > 0.0) {
    if (b <= 0.0) return std::numeric_limits<double>::infinity();
    s += a * std::log2(a / b);
  }
  if (a < 1.0) {
    if (b >= 1.0) return std::numeric_limits<double>::infinity();
    s += (1.0 - a) * std::log2((1.0 - a) / (1.0 - b));
  }
  return s;
}

}  // namespace detail

/// log2 of the binomial coefficient C(m, n), via log-gamma.
inline double log2_binomial(std::uint64_t m, std::uint64_t n) {
  if (n > m) throw std::invalid_argument("log2_binomial: n > m");
  if (n == 0 || n == m) return 0.0;
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  return (std::lgamma(md + 1.0) - std::lgamma(nd + 1.0) -
          std::lgamma(md - nd + 1.0)) / std::numbers::ln2;
}

/// Chernoff tail bound 2^{-m D(p-delta || p)}.
inline double chernoff_tail(std::uint64_t m, double p, double delta) {
  if (m < 1) throw std::invalid_argument("chernoff_tail: m < 1");
  if (!(delta >= 0.0 && delta <= p && p <= 1.0))
    throw std::invalid_argument("chernoff_tail: need 0 <= delta <= p <= 1");
  const double d = detail::binary_rel_entropy_bits(p - delta, p);
  if (std::isinf(d)) return 0.0;
  const double log2u = -static_cast<double>(m) * d;
  return std::min(1.0, std::exp2(log2u));
}

/// Factorial moment tail bound: the falling-factorial product
/// mu(mu-(1-p))...(mu-n*(1-p)) / (t(t-1)...(t-n*)) with t = m(1-p+delta),
/// mu = m(1-p), n* = floor(m delta / p), evaluated in log space through
/// log-gamma. The factor count is capped so every denominator factor stays
/// positive, which keeps the bound inside its validity domain.
inline double factorial_moment_tail(std::uint64_t m, double p, double delta) {
  if (m < 1) throw std::invalid_argument("factorial_moment_tail: m < 1");
  if (!(delta > 0.0 && delta <= p && p <= 1.0))
    throw std::invalid_argument(
        "factorial_moment_tail: need 0 < delta <= p <= 1");
  const double md = static_cast<double>(m);
  const double t = md * (1.0 - p + delta);
  const double mu = md * (1.0 - p);
  double ns = std::floor((t - mu) / p);
  if (ns > md) return 0.0;  // a numerator factor has gone negative or zero
  // keep t - n* >= 1 so the last denominator factor is positive
  ns = std::min(ns, std::floor(t - 1.0 + 1e-12));
  if (ns < 0.0) return 1.0;
  if (ns >= md) return 0.0;
  const double log_num = (ns + 1.0) * std::log(1.0 - p) +
                         std::lgamma(md + 1.0) - std::lgamma(md - ns);
  const double log_den = std::lgamma(t + 1.0) - std::lgamma(t - ns);
  const double v = std::exp(log_num - log_den);
  return std::clamp(v, 0.0, 1.0);
}

/// Klar tail bound (n+1)p / (n+1-(m+1)(1-p)) * f_n with
/// f_n = C(m,n)(1-p)^n p^{m-n} and n = ceil(m(1-p+delta)). Rounding n up
/// enlarges the tail set being bounded, so the bound stays conservative.
/// Returns nullopt when the denominator is nonpositive (bound undefined);
/// callers treat that as the vacuous bound 1.
inline std::optional<double> klar_tail(std::uint64_t m, double p,
                                       double delta) {
  if (m < 1) throw std::invalid_argument("klar_tail: m < 1");
  if (!(delta >= 0.0 && delta <= p && p <= 1.0))
    throw std::invalid_argument("klar_tail: need 0 <= delta <= p <= 1");
  const double md = static_cast<double>(m);
  const double n = std::ceil(md * (1.0 - p + delta) - 1e-12);
  const double den = n + 1.0 - (md + 1.0) * (1.0 - p);
  if (den <= 0.0) return std::nullopt;
  if (p <= 0.0) return std::nullopt;
  if (n > md) return 0.0;
  // log2 f_n with the log-gamma continuous extension of C(m, n)
  double log2_fn = (std::lgamma(md + 1.0) - std::lgamma(n + 1.0) -
                    std::lgamma(md - n + 1.0)) / std::numbers::ln2;
  if (n > 0.0) {
    if (p >= 1.0) return 0.0;  // (1-p)^n = 0
    log2_fn += n * std::log2(1.0 - p);
  }
  if (md - n > 0.0) log2_fn += (md - n) * std::log2(p);
  const double log2u = std::log2((n + 1.0) * p) - std::log2(den) + log2_fn;
  return std::clamp(std::exp2(log2u), 0.0, 1.0);
}

/// Exact lower-tail probability sum_{k<=floor(m(p-delta))} C(m,k) p^k
/// (1-p)^{m-k}, summed stably in log space with compensated summation.
inline double exact_tail(std::uint64_t m, double p, double delta) {
  if (m < 1 || m > kExactTailMaxSamples)
    throw std::invalid_argument("exact_tail: m outside [1, 100000]");
  if (!(delta >= 0.0 && delta <= p && p <= 1.0))
    throw std::invalid_argument("exact_tail: need 0 <= delta <= p <= 1");
  const double md = static_cast<double>(m);
  const std::int64_t kmax =
      static_cast<std::int64_t>(std::floor(md * (p - delta) + 1e-9));
  if (kmax < 0) return 0.0;
  if (p >= 1.0) return kmax >= static_cast<std::int64_t>(m) ? 1.0 : 0.0;
  if (p <= 0.0) return 1.0;
  const double l2p = std::log2(p), l2q = std::log2(1.0 - p);
  // log2 of each term; shift by the maximum before exponentiating
  std::vector<double> lt(static_cast<std::size_t>(kmax) + 1);
  double lmax = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k <= kmax; ++k) {
    const double l = log2_binomial(m, static_cast<std::uint64_t>(k)) +
                     static_cast<double>(k) * l2p +
                     (md - static_cast<double>(k)) * l2q;
    lt[static_cast<std::size_t>(k)] = l;
    lmax = std::max(lmax, l);
  }
  if (std::isinf(lmax)) return 0.0;
  double sum = 0.0, comp = 0.0;  // Kahan
  for (double l : lt) {
    const double term = std::exp2(l - lmax);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return std::clamp(std::exp2(lmax) * sum, 0.0, 1.0);
}

namespace detail {

/// u(m, C, C - observed) as used by the inversion, mapping inapplicable or
/// degenerate evaluations to the vacuous value 1.
inline double tail_bound_value(TailBoundKind kind, std::uint64_t m, double c,
                               double observed) {
  const double delta = c - observed;
  if (delta <= 0.0) return 1.0;
  switch (kind) {
    case TailBoundKind::chernoff:
      return chernoff_tail(m, c, delta);
    case TailBoundKind::factorial_moment:
      return factorial_moment_tail(m, c, delta);
    case TailBoundKind::klar:
      return klar_tail(m, c, delta).value_or(1.0);
    case TailBoundKind::exact:
      return exact_tail(m, c, delta);
  }
  return 1.0;
}

}  // namespace detail

/// Inverts a tail bound into the smallest C in [observed, 1] with
/// u(m, C, C - observed) <= eps, by bisection; u is monotone nonincreasing
/// in C on that interval. Returns the vacuous C = 1 when even that end
/// point fails the level.
inline OneSidedInterval invert_bound(TailBoundKind kind, std::uint64_t m,
                                     double observed, double eps) {
  if (m < 1) throw std::invalid_argument("invert_bound: m < 1");
  if (!(observed >= 0.0 && observed <= 1.0))
    throw std::invalid_argument("invert_bound: observed outside [0,1]");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("invert_bound: eps outside (0,1)");
  if (kind == TailBoundKind::exact && m > kExactTailMaxSamples)
    throw std::invalid_argument("invert_bound: m over exact-tail guard");

  double upper = 1.0;
  if (observed >= 1.0) {
    upper = 1.0;
  } else if (detail::tail_bound_value(kind, m, 1.0, observed) > eps) {
    upper = 1.0;  // vacuous but conservative
  } else {
    double lo = observed, hi = 1.0;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      if (detail::tail_bound_value(kind, m, mid, observed) <= eps)
        hi = mid;
      else
        lo = mid;
    }
    upper = hi;
  }
  return OneSidedInterval{upper, 1.0 - eps, kind, m, observed};
}

}  // namespace finitekey
