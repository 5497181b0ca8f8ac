#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace finitekey {

using Matrix4 = std::array<std::array<double, 4>, 4>;

inline Matrix4 zero4() { return Matrix4{}; }

inline Matrix4 identity4(double scale = 1.0) {
  Matrix4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = scale;
  return m;
}

inline bool is_symmetric4(const Matrix4& a, double tol) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(a[i][j] - a[j][i]) > tol) return false;
  return true;
}

inline double trace4(const Matrix4& a) {
  return a[0][0] + a[1][1] + a[2][2] + a[3][3];
}

/// Eigenvalues of a 4x4 real symmetric matrix in descending order, by
/// cyclic Jacobi rotations.
inline std::array<double, 4> eigenvalues_sym4(const Matrix4& input,
                                              double sym_tol = 1e-10) {
  if (!is_symmetric4(input, sym_tol))
    throw std::invalid_argument("eigenvalues_sym4: matrix not symmetric");
  Matrix4 a = input;
  // symmetrize exactly so rotations keep both triangles in sync
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) a[i][j] = a[j][i] = 0.5 * (a[i][j] + a[j][i]);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-28) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const double apq = a[p][q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t =
            (theta >= 0 ? 1.0 : -1.0) /
            (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a[p][p], aqq = a[q][q];
        a[p][p] = app - t * apq;
        a[q][q] = aqq + t * apq;
        a[p][q] = a[q][p] = 0.0;
        for (int r = 0; r < 4; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r][p], arq = a[r][q];
          a[r][p] = a[p][r] = arp - s * (arq + tau * arp);
          a[r][q] = a[q][r] = arq + s * (arp - tau * arq);
        }
      }
    }
  }
  std::array<double, 4> ev{a[0][0], a[1][1], a[2][2], a[3][3]};
  std::sort(ev.begin(), ev.end(), [](double x, double y) { return x > y; });
  return ev;
}

}  // namespace finitekey
