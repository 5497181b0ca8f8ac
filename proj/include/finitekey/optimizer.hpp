#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "finitekey/choi.hpp"
#include "finitekey/distribution.hpp"
#include "finitekey/sym4.hpp"

namespace finitekey {

/// Affine coordinates for real Choi matrices. The image of coords -> matrix
/// is exactly the affine space {A symmetric : tr A = 1, tr_B A = I/2}; the
/// origin maps to the maximally mixed Choi I/4. Positive semidefiniteness
/// is not encoded here; the optimizer enforces it with a barrier.
///
/// The basis directions are the Pauli products
///   I(x)sx, I(x)sz, sx(x)sx, sx(x)sz, sz(x)sx, sz(x)sz, sy(x)sy,
/// each divided by 2 so they are orthonormal under the Frobenius inner
/// product. The first six are determined by the 16-outcome statistic; the
/// sy(x)sy direction is the one the z/x measurements cannot see.
struct ChoiParameterization {
  static constexpr int kDim = 7;
  static constexpr const char* kBasisNames = "IX,IZ,XX,XZ,ZX,ZZ,YY";

  using Coords = std::array<double, kDim>;

  static const std::array<Matrix4, kDim>& basis() {
    static const std::array<Matrix4, kDim> b = make_basis();
    return b;
  }

  static Matrix4 matrix_at(const Coords& c) {
    Matrix4 m = identity4(0.25);
    const auto& b = basis();
    for (int k = 0; k < kDim; ++k)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] += c[k] * b[k][i][j];
    return m;
  }

  /// Orthonormal projection of a symmetric matrix onto the coordinates.
  static Coords coords_of(const Matrix4& m) {
    Coords c{};
    const auto& b = basis();
    for (int k = 0; k < kDim; ++k) {
      double dot = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) dot += m[i][j] * b[k][i][j];
      c[k] = dot;
    }
    return c;
  }

 private:
  static std::array<Matrix4, kDim> make_basis() {
    using M2 = std::array<std::array<double, 2>, 2>;
    const M2 id = {{{1, 0}, {0, 1}}};
    const M2 sx = {{{0, 1}, {1, 0}}};
    const M2 sz = {{{1, 0}, {0, -1}}};
    auto kron = [](const M2& a, const M2& b) {
      Matrix4 m{};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
              m[2 * i + k][2 * j + l] = 0.5 * a[i][j] * b[k][l];
      return m;
    };
    Matrix4 syy{};  // sy (x) sy is real: -1 on the corner antidiagonal, +1 inside
    syy[0][3] = syy[3][0] = -0.5;
    syy[1][2] = syy[2][1] = 0.5;
    return {kron(id, sx), kron(id, sz), kron(sx, sx), kron(sx, sz),
            kron(sz, sx), kron(sz, sz), syy};
  }
};

enum class OptimizerStatus { converged, infeasible, max_iterations };

inline const char* to_string(OptimizerStatus s) {
  switch (s) {
    case OptimizerStatus::converged: return "converged";
    case OptimizerStatus::infeasible: return "infeasible";
    case OptimizerStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

struct OptimizationResult {
  ChoiMatrix minimizer;
  double value = 0.0;
  int iterations = 0;
  OptimizerStatus status = OptimizerStatus::infeasible;
};

namespace detail {

using Coords = ChoiParameterization::Coords;
using Grad7 = std::array<double, 7>;
using Hess7 = std::array<std::array<double, 7>, 7>;

/// The 16-outcome statistic as an affine function of the coordinates:
/// lambda_i(c) = base_i + sum_k weight[i][k] c_k.
struct AffineStats {
  std::array<double, 16> base{};
  std::array<std::array<double, 7>, 16> weight{};

  static const AffineStats& instance() {
    static const AffineStats s = make();
    return s;
  }

  std::array<double, 16> at(const Coords& c) const {
    std::array<double, 16> lam = base;
    for (int i = 0; i < 16; ++i)
      for (int k = 0; k < 7; ++k) lam[i] += weight[i][k] * c[k];
    return lam;
  }

 private:
  static AffineStats make() {
    AffineStats s;
    const auto& basis = ChoiParameterization::basis();
    for (int bA = 0; bA < 2; ++bA)
      for (int bB = 0; bB < 2; ++bB)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const auto idx = accurate_outcome_index(bA, bB, a, b);
            const auto v = accurate_outcome_vector(bA, bB, a, b);
            s.base[idx] = 0.0625;  // the statistic of I/4 is uniform
            for (int k = 0; k < 7; ++k)
              s.weight[idx][k] = 0.25 * quad_form4(basis[k], v);
          }
    return s;
  }
};

/// Cholesky solve of (H + ridge I) s = -g, inflating the ridge until the
/// factorization succeeds.
inline Coords solve_newton_step(const Grad7& g, const Hess7& h) {
  double ridge = 0.0;
  for (int attempt = 0; attempt < 60; ++attempt) {
    Hess7 a = h;
    for (int i = 0; i < 7; ++i) a[i][i] += ridge;
    Hess7 chol{};
    bool ok = true;
    for (int i = 0; i < 7 && ok; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = a[i][j];
        for (int k = 0; k < j; ++k) sum -= chol[i][k] * chol[j][k];
        if (i == j) {
          if (sum <= 0.0) { ok = false; break; }
          chol[i][i] = std::sqrt(sum);
        } else {
          chol[i][j] = sum / chol[j][j];
        }
      }
    }
    if (ok) {
      Grad7 y{};
      for (int i = 0; i < 7; ++i) {
        double sum = -g[i];
        for (int k = 0; k < i; ++k) sum -= chol[i][k] * y[k];
        y[i] = sum / chol[i][i];
      }
      Coords s{};
      for (int i = 6; i >= 0; --i) {
        double sum = y[i];
        for (int k = i + 1; k < 7; ++k) sum -= chol[k][i] * s[k];
        s[i] = sum / chol[i][i];
      }
      return s;
    }
    ridge = (ridge == 0.0) ? 1e-12 : ridge * 10.0;
  }
  Coords s{};
  for (int i = 0; i < 7; ++i) s[i] = -g[i];
  return s;
}

/// Gaussian-elimination inverse of a strictly positive definite 4x4.
inline Matrix4 invert4(const Matrix4& in) {
  Matrix4 a = in;
  Matrix4 inv = identity4();
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300)
      throw std::runtime_error("invert4: singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (int j = 0; j < 4; ++j) { a[col][j] /= d; inv[col][j] /= d; }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < 4; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

struct BarrierTerms {
  double logdet;
  Grad7 grad;      // gradient of log det rho(c)
  Hess7 hess_neg;  // Hessian of -log det rho(c), positive semidefinite
};

/// Analytic derivatives of log det rho(c); nullopt off the PSD interior.
inline std::optional<BarrierTerms> barrier_terms(const Coords& c) {
  const Matrix4 rho = ChoiParameterization::matrix_at(c);
  const auto ev = eigenvalues_sym4(rho, 1e-8);
  if (ev[3] <= 0.0) return std::nullopt;
  BarrierTerms bt{};
  for (double v : ev) bt.logdet += std::log(v);
  const Matrix4 rinv = invert4(rho);
  const auto& basis = ChoiParameterization::basis();
  std::array<Matrix4, 7> rb{};
  for (int k = 0; k < 7; ++k) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int l = 0; l < 4; ++l) s += rinv[i][l] * basis[k][l][j];
        rb[k][i][j] = s;
      }
    double tr = 0.0;
    for (int i = 0; i < 4; ++i) tr += rb[k][i][i];
    bt.grad[k] = tr;
  }
  for (int j = 0; j < 7; ++j)
    for (int k = j; k < 7; ++k) {
      double tr = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int l = 0; l < 4; ++l) tr += rb[j][i][l] * rb[k][l][i];
      bt.hess_neg[j][k] = bt.hess_neg[k][j] = tr;
    }
  return bt;
}

struct DivergenceTerms {
  double value;  // D(lambda_m || lambda(c)) in bits
  Grad7 grad{};
  Hess7 hess{};
};

/// Analytic derivatives of the divergence from the fixed statistic to the
/// affine channel statistic. Cells where lambda_m is zero contribute
/// nothing; nullopt when a supported cell has nonpositive predicted
/// probability (the point is outside the region's domain).
inline std::optional<DivergenceTerms> divergence_terms(
    const std::array<double, 16>& lambda_m, const Coords& c) {
  const auto& aff = AffineStats::instance();
  const auto lam = aff.at(c);
  DivergenceTerms dt{};
  dt.value = 0.0;
  constexpr double inv_ln2 = std::numbers::log2e;
  for (int i = 0; i < 16; ++i) {
    const double li = lambda_m[i];
    if (li <= 0.0) continue;
    const double qi = lam[i];
    if (qi <= 0.0) return std::nullopt;
    dt.value += li * std::log2(li / qi);
    const double w1 = li / qi * inv_ln2;
    const double w2 = li / (qi * qi) * inv_ln2;
    const auto& wi = aff.weight[i];
    for (int k = 0; k < 7; ++k) {
      dt.grad[k] -= w1 * wi[k];
      for (int l = k; l < 7; ++l) dt.hess[k][l] += w2 * wi[k] * wi[l];
    }
  }
  for (int k = 0; k < 7; ++k)
    for (int l = 0; l < k; ++l) dt.hess[k][l] = dt.hess[l][k];
  return dt;
}

/// Objective S(X|E) on coordinates, with eigenvalue clamping; finite and
/// continuous also slightly outside the PSD cone, which keeps central
/// finite differences well defined near the boundary.
inline double objective_entropy(const Coords& c) {
  const Matrix4 rho = ChoiParameterization::matrix_at(c);
  const auto ev_ab = eigenvalues_sym4(rho, 1e-6);
  const auto ev_xb = eigenvalues_sym4(pinch_alice_z(rho), 1e-6);
  return entropy_of_spectrum(ev_xb) - entropy_of_spectrum(ev_ab);
}

inline Grad7 fd_gradient(const Coords& c, double h = 1e-6) {
  Grad7 g{};
  for (int k = 0; k < 7; ++k) {
    Coords cp = c, cm = c;
    cp[k] += h;
    cm[k] -= h;
    g[k] = (objective_entropy(cp) - objective_entropy(cm)) / (2.0 * h);
  }
  return g;
}

inline Hess7 fd_hessian(const Coords& c, double h = 1e-4) {
  Hess7 hess{};
  const double f0 = objective_entropy(c);
  for (int j = 0; j < 7; ++j) {
    Coords cp = c, cm = c;
    cp[j] += h;
    cm[j] -= h;
    hess[j][j] = (objective_entropy(cp) - 2.0 * f0 + objective_entropy(cm)) / (h * h);
  }
  for (int j = 0; j < 7; ++j)
    for (int k = j + 1; k < 7; ++k) {
      Coords cpp = c, cpm = c, cmp = c, cmm = c;
      cpp[j] += h; cpp[k] += h;
      cpm[j] += h; cpm[k] -= h;
      cmp[j] -= h; cmp[k] += h;
      cmm[j] -= h; cmm[k] -= h;
      hess[j][k] = hess[k][j] =
          (objective_entropy(cpp) - objective_entropy(cpm) -
           objective_entropy(cmp) + objective_entropy(cmm)) / (4.0 * h * h);
    }
  return hess;
}

inline std::array<double, 16> stats_array(const EmpiricalDistribution& d) {
  if (d.alphabet_size() != 16)
    throw std::invalid_argument("optimizer: statistic must have 16 outcomes");
  std::array<double, 16> a{};
  for (int i = 0; i < 16; ++i) a[i] = d.probs[i];
  return a;
}

/// Strict-feasibility margin under the radius. Relative for tiny radii so
/// that shrinking the region toward a point stays solvable.
inline double phase1_margin(double xi_prime) {
  return std::min(1e-9, 0.5 * xi_prime);
}

/// Phase I in coordinates: minimize D(lambda_m || lambda(c)) with a
/// log-det barrier, stopping at the first strictly feasible iterate.
inline std::optional<Coords> phase1_coords(
    const std::array<double, 16>& lambda_m, double xi_prime,
    int* iterations_out = nullptr) {
  Coords c{};  // the maximally mixed Choi
  const double margin = phase1_margin(xi_prime);
  int iterations = 0;
  for (double mu = 1.0; mu >= 1e-13; mu /= 10.0) {
    for (int inner = 0; inner < 80; ++inner) {
      ++iterations;
      const auto dt = divergence_terms(lambda_m, c);
      const auto bt = barrier_terms(c);
      if (!dt || !bt)
        throw std::runtime_error(
            "optimizer: objective broke down at an interior point");
      if (dt->value < xi_prime - margin) {
        if (iterations_out) *iterations_out += iterations;
        return c;
      }
      Grad7 g{};
      Hess7 h{};
      for (int k = 0; k < 7; ++k) {
        g[k] = dt->grad[k] - mu * bt->grad[k];
        for (int l = 0; l < 7; ++l)
          h[k][l] = dt->hess[k][l] + mu * bt->hess_neg[k][l];
      }
      const Coords step = solve_newton_step(g, h);
      const double f0 = dt->value - mu * bt->logdet;
      double alpha = 1.0;
      bool moved = false;
      double max_step = 0.0;
      while (alpha > 1e-14) {
        Coords cn = c;
        for (int k = 0; k < 7; ++k) cn[k] += alpha * step[k];
        const auto btn = barrier_terms(cn);
        if (btn) {
          const auto dtn = divergence_terms(lambda_m, cn);
          if (dtn && std::isfinite(dtn->value)) {
            const double fn = dtn->value - mu * btn->logdet;
            if (fn < f0 - 1e-15) {
              c = cn;
              moved = true;
              for (int k = 0; k < 7; ++k)
                max_step = std::max(max_step, std::abs(alpha * step[k]));
              break;
            }
          }
        }
        alpha *= 0.5;
      }
      if (!moved || max_step < 1e-11) break;
    }
  }
  if (iterations_out) *iterations_out += iterations;
  return std::nullopt;
}

}  // namespace detail

/// Phase I: search for a strictly feasible real Choi matrix, one with
/// D(lambda_m || lambda(rho)) < xi_prime. Returns nullopt when the
/// divergence minimum over all channels is not below the radius.
inline std::optional<ChoiMatrix> phase1_feasible(
    const EmpiricalDistribution& lambda_m, double xi_prime) {
  if (!(xi_prime > 0.0))
    throw std::invalid_argument("phase1_feasible: xi_prime <= 0");
  const auto lm = detail::stats_array(lambda_m);
  const auto c = detail::phase1_coords(lm, xi_prime);
  if (!c) return std::nullopt;
  return ChoiMatrix::validated(ChoiParameterization::matrix_at(*c));
}

/// Minimizes S(X|E) over the relative-entropy confidence region of real
/// Choi matrices (accurate channel estimation): phase-I feasibility search
/// followed by barrier minimization in the 7-coordinate parameterization.
/// Entropy derivatives are taken by central finite differences; the
/// barrier terms use analytic derivatives. A strictly feasible start may
/// be supplied to skip phase I.
inline OptimizationResult min_ambiguity_accurate(
    const EmpiricalDistribution& lambda_m, double xi_prime,
    std::optional<ChoiMatrix> start = std::nullopt) {
  if (!(xi_prime > 0.0))
    throw std::invalid_argument("min_ambiguity_accurate: xi_prime <= 0");
  const auto lm = detail::stats_array(lambda_m);

  OptimizationResult res;
  detail::Coords c{};
  if (start) {
    c = ChoiParameterization::coords_of(start->entries);
    const auto dt = detail::divergence_terms(lm, c);
    const auto bt = detail::barrier_terms(c);
    if (!dt || !bt || !(dt->value < xi_prime))
      throw std::invalid_argument(
          "min_ambiguity_accurate: start point is not strictly feasible");
  } else {
    const auto feas = detail::phase1_coords(lm, xi_prime, &res.iterations);
    if (!feas) {
      res.status = OptimizerStatus::infeasible;
      res.minimizer = ChoiMatrix::validated(identity4(0.25));
      res.value = 0.0;
      return res;
    }
    c = *feas;
  }

  constexpr int kMaxIterations = 500;
  bool hit_cap = false;
  for (double mu = 1.0; mu >= 1e-9; mu /= 10.0) {
    for (int inner = 0; inner < 60; ++inner) {
      if (res.iterations >= kMaxIterations) { hit_cap = true; break; }
      ++res.iterations;
      const auto dt = detail::divergence_terms(lm, c);
      const auto bt = detail::barrier_terms(c);
      if (!dt || !bt || !(dt->value < xi_prime))
        throw std::runtime_error("optimizer: iterate left the feasible interior");
      const double slack = xi_prime - dt->value;
      const auto gS = detail::fd_gradient(c);
      const auto hS = detail::fd_hessian(c);
      detail::Grad7 g{};
      detail::Hess7 h{};
      for (int k = 0; k < 7; ++k) {
        g[k] = gS[k] - mu * bt->grad[k] + mu / slack * dt->grad[k];
        for (int l = 0; l < 7; ++l)
          h[k][l] = hS[k][l] + mu * bt->hess_neg[k][l] +
                    mu / slack * dt->hess[k][l] +
                    mu / (slack * slack) * dt->grad[k] * dt->grad[l];
      }
      const auto step = detail::solve_newton_step(g, h);
      auto barrier_value = [&](const detail::Coords& cc) {
        const auto btn = detail::barrier_terms(cc);
        if (!btn) return std::numeric_limits<double>::infinity();
        const auto dtn = detail::divergence_terms(lm, cc);
        if (!dtn || !(dtn->value < xi_prime))
          return std::numeric_limits<double>::infinity();
        return detail::objective_entropy(cc) - mu * btn->logdet -
               mu * std::log(xi_prime - dtn->value);
      };
      const double f0 = detail::objective_entropy(c) - mu * bt->logdet -
                        mu * std::log(slack);
      double alpha = 1.0;
      bool moved = false;
      double max_step = 0.0;
      while (alpha > 1e-14) {
        detail::Coords cn = c;
        for (int k = 0; k < 7; ++k) cn[k] += alpha * step[k];
        if (barrier_value(cn) < f0 - 1e-15) {
          c = cn;
          moved = true;
          for (int k = 0; k < 7; ++k)
            max_step = std::max(max_step, std::abs(alpha * step[k]));
          break;
        }
        alpha *= 0.5;
      }
      if (!moved || max_step < 1e-8) break;
    }
    if (hit_cap) break;
  }

  res.minimizer = ChoiMatrix::validated(ChoiParameterization::matrix_at(c));
  res.value = detail::objective_entropy(c);
  res.status =
      hit_cap ? OptimizerStatus::max_iterations : OptimizerStatus::converged;
  return res;
}

/// Structured text record: key=value lines with the value, status,
/// iteration count, the coordinate basis, and the 16 minimizer entries
/// row-major.
inline std::string to_kv_text(const OptimizationResult& res) {
  std::ostringstream os;
  os.precision(12);
  os << "value=" << res.value << '\n';
  os << "status=" << to_string(res.status) << '\n';
  os << "iterations=" << res.iterations << '\n';
  os << "basis=" << ChoiParameterization::kBasisNames << '\n';
  os << "minimizer=";
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i || j) os << ' ';
      os << res.minimizer.entries[i][j];
    }
  os << '\n';
  return os.str();
}

}  // namespace finitekey
