#include "icann/tensor3.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace icann {

namespace {

using Vec3 = std::array<double, 3>;

constexpr double kPi = 3.14159265358979323846;
// Relative eigenvalue gap below which two eigenvalues are treated as equal.
constexpr double kTieTolerance = 1e-12;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

Vec3 normalized(const Vec3& a) { return scaled(a, 1.0 / std::sqrt(dot(a, a))); }

Vec3 axis(int i) {
  Vec3 e{0.0, 0.0, 0.0};
  e[i] = 1.0;
  return e;
}

// Null vector of the symmetric (nearly) rank-2 matrix B - lambda I.
Vec3 null_vector(const Sym3& b, double lambda) {
  Vec3 r[3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = b(i, j) - (i == j ? lambda : 0.0);
  const Vec3 c[3] = {cross(r[0], r[1]), cross(r[0], r[2]), cross(r[1], r[2])};
  int best = 0;
  double best_n = dot(c[0], c[0]);
  for (int k = 1; k < 3; ++k) {
    const double n = dot(c[k], c[k]);
    if (n > best_n) {
      best = k;
      best_n = n;
    }
  }
  return normalized(c[best]);
}

// Completes {v} to an orthonormal basis by Gram-Schmidt over (ex, ey, ez).
std::pair<Vec3, Vec3> complete_basis(const Vec3& v) {
  Vec3 out[2];
  int found = 0;
  for (int s = 0; s < 3 && found < 2; ++s) {
    Vec3 e = axis(s);
    e = {e[0] - dot(e, v) * v[0], e[1] - dot(e, v) * v[1], e[2] - dot(e, v) * v[2]};
    for (int k = 0; k < found; ++k) {
      const double p = dot(e, out[k]);
      e = {e[0] - p * out[k][0], e[1] - p * out[k][1], e[2] - p * out[k][2]};
    }
    if (dot(e, e) > 1e-3) out[found++] = normalized(e);
  }
  return {out[0], out[1]};
}

double rayleigh(const Sym3& a, const Vec3& v) {
  Vec3 av{};
  for (int i = 0; i < 3; ++i) av[i] = a(i, 0) * v[0] + a(i, 1) * v[1] + a(i, 2) * v[2];
  return dot(v, av);
}

SpectralDecomp diagonal_decomposition(const Sym3& a) {
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
  SpectralDecomp sd;
  for (int c = 0; c < 3; ++c) {
    sd.values[c] = a(order[c], order[c]);
    sd.vectors[c] = axis(order[c]);
  }
  return sd;
}

}  // namespace

Sym3 SpectralDecomp::reconstruct() const { return spectral_compose(*this, values); }

SpectralDecomp spectral_decomposition(const Sym3& a) {
  for (int k = 0; k < 6; ++k)
    if (!std::isfinite(a[k])) throw NumericalError("spectral decomposition of non-finite tensor");
  if (a.off_diagonal_zero()) return diagonal_decomposition(a);

  double scale = 0.0;
  for (int k = 0; k < 6; ++k) scale = std::max(scale, std::fabs(a[k]));
  const Sym3 b = a / scale;

  const double q = trace(b) / 3.0;
  const Sym3 shifted = b - q * Sym3::identity();
  const double p = std::sqrt(contract(shifted, shifted) / 6.0);
  SpectralDecomp sd;
  if (p == 0.0) {
    // Cannot happen with non-zero off-diagonal entries, kept for completeness.
    return diagonal_decomposition(a);
  }
  const double r = std::clamp(det(shifted / p) / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double l1 = q + 2.0 * p * std::cos(phi);
  const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
  const double l2 = 3.0 * q - l1 - l3;

  const double tie = kTieTolerance * norm(b);
  Vec3 v1, v2, v3;
  if (l1 - l3 < tie) {
    v1 = axis(0);
    v2 = axis(1);
    v3 = axis(2);
  } else {
    // The most separated eigenvalue is well conditioned even when the other
    // two nearly coincide; its null vector is accurate. The remaining pair is
    // resolved by a Jacobi rotation of the 2x2 block on the complement, which
    // stays accurate down to exact degeneracy.
    const bool top_first = (l1 - l2) >= (l2 - l3);
    const Vec3 va = null_vector(b, top_first ? l1 : l3);
    const auto [u, w] = complete_basis(va);
    const double m11 = rayleigh(b, u);
    const double m22 = rayleigh(b, w);
    double m12 = 0.0;
    for (int i = 0; i < 3; ++i) m12 += u[i] * (b(i, 0) * w[0] + b(i, 1) * w[1] + b(i, 2) * w[2]);
    Vec3 vb = u, vc = w;
    if (std::fabs(m11 - m22) >= tie || std::fabs(m12) >= tie) {
      const double theta = 0.5 * std::atan2(2.0 * m12, m11 - m22);
      const double c = std::cos(theta), s = std::sin(theta);
      vb = {c * u[0] + s * w[0], c * u[1] + s * w[1], c * u[2] + s * w[2]};
      vc = {c * w[0] - s * u[0], c * w[1] - s * u[1], c * w[2] - s * u[2]};
    }
    v1 = va;
    v2 = vb;
    v3 = vc;
  }

  // Rayleigh quotients on the unscaled tensor sharpen the eigenvalues.
  std::array<Vec3, 3> vecs{v1, v2, v3};
  std::array<double, 3> vals{rayleigh(a, v1), rayleigh(a, v2), rayleigh(a, v3)};
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return vals[i] > vals[j]; });
  for (int c = 0; c < 3; ++c) {
    sd.values[c] = vals[order[c]];
    sd.vectors[c] = vecs[order[c]];
  }
  return sd;
}

Sym3 spectral_compose(const SpectralDecomp& sd, const std::array<double, 3>& f) {
  Sym3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += f[c] * sd.vectors[c][i] * sd.vectors[c][j];
      r(i, j) = s;
    }
  return r;
}

Sym3 spectral_directional(const SpectralDecomp& sd, const std::array<std::array<double, 3>, 3>& divided,
                          const Sym3& direction) {
  // Rotate into the eigenbasis: D~_ab = v_a . dA . v_b
  double rot[3][3];
  for (int a = 0; a < 3; ++a) {
    Vec3 dv{};
    for (int i = 0; i < 3; ++i)
      dv[i] = direction(i, 0) * sd.vectors[a][0] + direction(i, 1) * sd.vectors[a][1] +
              direction(i, 2) * sd.vectors[a][2];
    for (int b = 0; b < 3; ++b) rot[b][a] = dot(sd.vectors[b], dv);
  }
  Sym3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += sd.vectors[a][i] * divided[a][b] * rot[a][b] * sd.vectors[b][j];
      r(i, j) = s;
    }
  return r;
}

namespace detail {

double sqrt_divided(double a, double b) { return 1.0 / (std::sqrt(a) + std::sqrt(b)); }

double exp_divided(double a, double b) {
  const double d = a - b;
  if (d == 0.0) return std::exp(a);
  return std::exp(b) * std::expm1(d) / d;
}

}  // namespace detail

std::string to_string(const Sym3& a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "[%.6g %.6g %.6g | %.6g %.6g %.6g]", a.xx(), a.yy(), a.zz(), a.xy(), a.xz(),
                a.yz());
  return buf;
}

}  // namespace icann
