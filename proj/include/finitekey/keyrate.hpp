#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "finitekey/distribution.hpp"

namespace finitekey {

/// Protocol parameters entering the secure key-length lower bound:
/// l = floor(N (ambiguity - delta_bar) - leak_ec - 2 log2(1/eps_pa)).
struct KeyRateParams {
  std::uint64_t n_raw;
  double eps_pe;
  double eps_pa;
  double delta_bar;
  double leak_ec;

  static KeyRateParams validated(std::uint64_t n_raw, double eps_pe,
                                 double eps_pa, double delta_bar,
                                 double leak_ec) {
    if (n_raw < 1) throw std::invalid_argument("keyrate: n_raw < 1");
    if (!(eps_pe > 0.0 && eps_pe < 1.0))
      throw std::invalid_argument("keyrate: eps_pe outside (0,1)");
    if (!(eps_pa > 0.0 && eps_pa <= 1.0))
      throw std::invalid_argument("keyrate: eps_pa outside (0,1]");
    if (!(delta_bar >= 0.0))
      throw std::invalid_argument("keyrate: delta_bar < 0");
    if (!(leak_ec >= 0.0)) throw std::invalid_argument("keyrate: leak_ec < 0");
    return KeyRateParams{n_raw, eps_pe, eps_pa, delta_bar, leak_ec};
  }
};

/// Secure key length in bits; zero means abort, no secure key.
inline std::uint64_t key_length(const KeyRateParams& params,
                                double min_ambiguity) {
  if (!(min_ambiguity >= 0.0 && min_ambiguity <= 1.0))
    throw std::invalid_argument("key_length: ambiguity outside [0,1]");
  const double n = static_cast<double>(params.n_raw);
  const double l = n * (min_ambiguity - params.delta_bar) - params.leak_ec -
                   2.0 * std::log2(1.0 / params.eps_pa);
  if (l <= 0.0) return 0;
  return static_cast<std::uint64_t>(std::floor(l));
}

/// Standard one-parameter reconciliation-leak model
/// efficiency * n * h(qber); a convenience default only, any explicit
/// leak_ec overrides it.
inline double leak_model(std::uint64_t n_raw, double qber, double efficiency) {
  if (!(qber >= 0.0 && qber <= 0.5))
    throw std::invalid_argument("leak_model: qber outside [0, 0.5]");
  if (!(efficiency >= 1.0))
    throw std::invalid_argument("leak_model: efficiency < 1");
  return efficiency * static_cast<double>(n_raw) * binary_entropy(qber);
}

/// Convenience default for the correction term, 7 sqrt(log2(2/eps_bar)/N).
/// Sourced from the finite-key literature this formula family comes from,
/// not derived here; offered only behind an explicit CLI flag.
inline double delta_bar_default(std::uint64_t n_raw, double eps_bar) {
  if (n_raw < 1) throw std::invalid_argument("delta_bar_default: n_raw < 1");
  if (!(eps_bar > 0.0 && eps_bar < 1.0))
    throw std::invalid_argument("delta_bar_default: eps_bar outside (0,1)");
  return 7.0 * std::sqrt(std::log2(2.0 / eps_bar) / static_cast<double>(n_raw));
}

}  // namespace finitekey
