#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "finitekey/distribution.hpp"
#include "finitekey/sym4.hpp"

namespace finitekey {

// Choi operator of a qubit channel: a 4x4 real symmetric PSD matrix with
// unit trace whose partial trace over Bob's (second) factor is I/2. Basis
// order is |00>, |01>, |10>, |11> with Alice first.
struct ChoiMatrix {
  Matrix4 entries{};

  static constexpr double kSymTol = 1e-10;
  static constexpr double kPsdTol = -1e-9;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kPartialTraceTol = 1e-9;

  static ChoiMatrix validated(const Matrix4& m) {
    if (!is_symmetric4(m, kSymTol))
      throw std::invalid_argument("choi: matrix not symmetric");
    if (std::abs(trace4(m) - 1.0) > kTraceTol)
      throw std::invalid_argument("choi: trace is not 1");
    // tr_B: 2x2 Alice marginal from summing Bob-diagonal entries
    const double a00 = m[0][0] + m[1][1];
    const double a11 = m[2][2] + m[3][3];
    const double a01 = m[0][2] + m[1][3];
    if (std::abs(a00 - 0.5) > kPartialTraceTol ||
        std::abs(a11 - 0.5) > kPartialTraceTol ||
        std::abs(a01) > kPartialTraceTol)
      throw std::invalid_argument("choi: Alice marginal is not I/2");
    const auto ev = eigenvalues_sym4(m, kSymTol);
    if (ev[3] < kPsdTol)
      throw std::invalid_argument("choi: matrix not positive semidefinite");
    return ChoiMatrix{m};
  }
};

/// Affine action of a qubit channel on Bloch vectors, component order
/// (theta_Z, theta_X, theta_Y): v -> linear v + translation.
struct BlochAffineMap {
  std::array<std::array<double, 3>, 3> linear{};
  std::array<double, 3> translation{};
};

/// Parametric channel family used throughout: amplitude damping or
/// depolarizing with parameter q, or an explicitly given Choi matrix.
struct ChannelSpec {
  enum class Kind { amplitude_damping, depolarizing, explicit_choi };
  Kind kind = Kind::depolarizing;
  double q = 0.0;
  ChoiMatrix choi{};  // used when kind == explicit_choi

  static ChannelSpec amplitude_damping(double q) {
    require_q(q);
    return ChannelSpec{Kind::amplitude_damping, q, {}};
  }
  static ChannelSpec depolarizing(double q) {
    require_q(q);
    return ChannelSpec{Kind::depolarizing, q, {}};
  }
  static ChannelSpec explicit_channel(const ChoiMatrix& c) {
    return ChannelSpec{Kind::explicit_choi, 0.0, c};
  }

 private:
  static void require_q(double q) {
    if (!(q >= 0.0 && q <= 1.0))
      throw std::invalid_argument("channel: q outside [0,1]");
  }
};

/// Choi matrix (id (x) E)(|psi><psi|) of the channel with the given Bloch
/// action, for the Bell state |psi> = (|00> + |11>)/sqrt(2). Only maps
/// whose Choi operator is real are representable here; the Y sector may
/// couple only through its own diagonal entry M_YY.
inline ChoiMatrix choi_from_bloch(const BlochAffineMap& map) {
  const auto& M = map.linear;
  const auto& t = map.translation;
  constexpr int Z = 0, X = 1, Y = 2;
  const double real_violation =
      std::abs(t[Y]) + std::abs(M[Y][Z]) + std::abs(M[Z][Y]) +
      std::abs(M[X][Y]) + std::abs(M[Y][X]);
  if (real_violation > 1e-12)
    throw std::invalid_argument(
        "choi_from_bloch: map does not induce a real Choi matrix");

  Matrix4 r{};
  // Alice block (0,0): E(|0><0|) / 2
  r[0][0] = 0.25 * (1.0 + M[Z][Z] + t[Z]);
  r[0][1] = r[1][0] = 0.25 * (M[X][Z] + t[X]);
  r[1][1] = 0.25 * (1.0 - M[Z][Z] - t[Z]);
  // Alice block (1,1): E(|1><1|) / 2
  r[2][2] = 0.25 * (1.0 - M[Z][Z] + t[Z]);
  r[2][3] = r[3][2] = 0.25 * (-M[X][Z] + t[X]);
  r[3][3] = 0.25 * (1.0 + M[Z][Z] - t[Z]);
  // Alice block (0,1): E(|0><1|) / 2, transposed into (1,0)
  r[0][2] = r[2][0] = 0.25 * M[Z][X];
  r[0][3] = r[3][0] = 0.25 * (M[X][X] + M[Y][Y]);
  r[1][2] = r[2][1] = 0.25 * (M[X][X] - M[Y][Y]);
  r[1][3] = r[3][1] = -0.25 * M[Z][X];
  try {
    return ChoiMatrix::validated(r);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("choi_from_bloch: map is not completely positive");
  }
}

inline ChoiMatrix choi_of(const ChannelSpec& spec) {
  switch (spec.kind) {
    case ChannelSpec::Kind::amplitude_damping: {
      BlochAffineMap map{};
      const double s = std::sqrt(1.0 - spec.q);
      map.linear[0][0] = 1.0 - spec.q;
      map.linear[1][1] = s;
      map.linear[2][2] = s;
      map.translation[0] = spec.q;
      return choi_from_bloch(map);
    }
    case ChannelSpec::Kind::depolarizing: {
      BlochAffineMap map{};
      for (int i = 0; i < 3; ++i) map.linear[i][i] = 1.0 - spec.q;
      return choi_from_bloch(map);
    }
    case ChannelSpec::Kind::explicit_choi:
      return ChoiMatrix::validated(spec.choi.entries);
  }
  throw std::invalid_argument("choi_of: unknown channel kind");
}

namespace detail {

/// Measurement vectors: index 0 is the z basis, 1 the x basis; all real.
inline const std::array<std::array<std::array<double, 2>, 2>, 2>&
measurement_bases() {
  static const std::array<std::array<std::array<double, 2>, 2>, 2> b = {{
      {{{1.0, 0.0}, {0.0, 1.0}}},                      // z: |0>, |1>
      {{{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2},
        {std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2}}},  // x
  }};
  return b;
}

inline double quad_form4(const Matrix4& m, const std::array<double, 4>& v) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int j = 0; j < 4; ++j) row += m[i][j] * v[j];
    s += v[i] * row;
  }
  return s;
}

/// Joint-outcome index for (Alice basis, Bob basis, Alice bit, Bob bit),
/// bases z=0, x=1: ((bA*2 + bB)*2 + a)*2 + b.
inline constexpr std::size_t accurate_outcome_index(int bA, int bB, int a,
                                                    int b) {
  return static_cast<std::size_t>(((bA * 2 + bB) * 2 + a) * 2 + b);
}

inline std::array<double, 4> accurate_outcome_vector(int bA, int bB, int a,
                                                     int b) {
  const auto& bas = measurement_bases();
  const auto& va = bas[static_cast<std::size_t>(bA)][static_cast<std::size_t>(a)];
  const auto& vb = bas[static_cast<std::size_t>(bB)][static_cast<std::size_t>(b)];
  return {va[0] * vb[0], va[0] * vb[1], va[1] * vb[0], va[1] * vb[1]};
}

/// The 16-outcome statistic as a raw vector, without distribution
/// validation; usable on non-PSD iterates inside the optimizer.
inline std::array<double, 16> accurate_statistics_raw(const Matrix4& rho) {
  std::array<double, 16> lam{};
  for (int bA = 0; bA < 2; ++bA)
    for (int bB = 0; bB < 2; ++bB)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          lam[accurate_outcome_index(bA, bB, a, b)] =
              0.25 * quad_form4(rho, accurate_outcome_vector(bA, bB, a, b));
  return lam;
}

/// Pinch in Alice's z basis: zero the off-diagonal 2x2 Alice blocks.
inline Matrix4 pinch_alice_z(const Matrix4& rho) {
  Matrix4 p = rho;
  for (int i = 0; i < 2; ++i)
    for (int j = 2; j < 4; ++j) p[i][j] = p[j][i] = 0.0;
  return p;
}

inline double entropy_of_spectrum(const std::array<double, 4>& ev) {
  double s = 0.0;
  for (double v : ev)
    if (v > 0.0) s -= v * std::log2(v);
  return s;
}

}  // namespace detail

/// Conditional von Neumann entropy S(X|E) = S(rho_XB) - S(rho_AB), where
/// rho_XB is rho_AB pinched in Alice's z basis. Eigenvalues within the PSD
/// tolerance below zero are clamped before the entropy evaluation.
inline double cond_entropy_x_given_e(const ChoiMatrix& rho) {
  const auto ev_ab = eigenvalues_sym4(rho.entries);
  const auto ev_xb = eigenvalues_sym4(detail::pinch_alice_z(rho.entries));
  return detail::entropy_of_spectrum(ev_xb) -
         detail::entropy_of_spectrum(ev_ab);
}

/// Phase error statistic (error, no-error): the x-basis disagreement
/// probability of the Choi state, as seen by conventional estimation.
inline EmpiricalDistribution stats_conventional(const ChoiMatrix& rho) {
  const auto v01 = detail::accurate_outcome_vector(1, 1, 0, 1);
  const auto v10 = detail::accurate_outcome_vector(1, 1, 1, 0);
  double p_ph = detail::quad_form4(rho.entries, v01) +
                detail::quad_form4(rho.entries, v10);
  p_ph = std::clamp(p_ph, 0.0, 1.0);
  return EmpiricalDistribution{{p_ph, 1.0 - p_ph}, 0};
}

/// Full 16-outcome statistic over (Alice basis, Bob basis, Alice bit, Bob
/// bit) with uniform basis and bit priors; this is the joint distribution
/// the accurate estimation method observes.
inline EmpiricalDistribution stats_accurate(const ChoiMatrix& rho) {
  const auto lam = detail::accurate_statistics_raw(rho.entries);
  std::vector<double> probs(lam.begin(), lam.end());
  for (double& p : probs) p = std::max(p, 0.0);
  double sum = 0.0;
  for (double p : probs) sum += p;
  for (double& p : probs) p /= sum;
  return EmpiricalDistribution{std::move(probs), 0};
}

namespace detail {

/// splitmix64 mixing step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Draws m i.i.d. samples from dist with a seeded deterministic generator
/// and returns the empirical type. Identical (dist, m, seed) inputs yield
/// identical output on every platform.
inline EmpiricalDistribution sample_statistics(
    const EmpiricalDistribution& dist, std::uint64_t m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample_statistics: m < 1");
  std::vector<double> cdf(dist.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    acc += dist.probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  std::mt19937_64 rng(detail::splitmix64(seed));
  std::vector<std::uint64_t> counts(dist.probs.size(), 0);
  for (std::uint64_t s = 0; s < m; ++s) {
    // 53-bit uniform in [0,1)
    const double u =
        static_cast<double>(rng() >> 11) * 0x1.0p-53;
    std::size_t idx = 0;
    while (idx + 1 < cdf.size() && u >= cdf[idx]) ++idx;
    ++counts[idx];
  }
  std::vector<double> freqs(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    freqs[i] = static_cast<double>(counts[i]) / static_cast<double>(m);
  return EmpiricalDistribution{std::move(freqs), m};
}

/// Plain-text Choi serialization: 16 whitespace-separated decimal entries,
/// row-major.
inline std::string to_text(const ChoiMatrix& rho) {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j) os << ' ';
      os << rho.entries[i][j];
    }
    os << '\n';
  }
  return os.str();
}

inline ChoiMatrix choi_from_text(std::istream& in) {
  Matrix4 m{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (!(in >> m[i][j]))
        throw std::invalid_argument("choi_from_text: expected 16 numeric entries");
  return ChoiMatrix::validated(m);
}

}  // namespace finitekey
