#pragma once

// Symmetric 3x3 tensors, invariants and isotropic spectral functions.
//
// Everything is templated on the scalar type so the same code runs in double
// precision and with forward-mode dual numbers (ad::Dual<N>).

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "icann/dual.hpp"
#include "icann/errors.hpp"

namespace icann {

using ad::is_exact_zero;
using ad::value_of;

/// Symmetric second-order tensor stored as (a11, a22, a33, a12, a13, a23).
template <class T>
class SymTensor3 {
public:
  SymTensor3() = default;
  SymTensor3(T a11, T a22, T a33, T a12, T a13, T a23) : c_{a11, a22, a33, a12, a13, a23} {}

  static SymTensor3 zero() { return SymTensor3(); }
  static SymTensor3 identity() { return SymTensor3(T(1.0), T(1.0), T(1.0), T(0.0), T(0.0), T(0.0)); }
  static SymTensor3 diag(T a, T b, T c) { return SymTensor3(a, b, c, T(0.0), T(0.0), T(0.0)); }

  const T& xx() const { return c_[0]; }
  const T& yy() const { return c_[1]; }
  const T& zz() const { return c_[2]; }
  const T& xy() const { return c_[3]; }
  const T& xz() const { return c_[4]; }
  const T& yz() const { return c_[5]; }

  /// Canonical component k in storage order.
  const T& operator[](int k) const { return c_[k]; }
  T& operator[](int k) { return c_[k]; }

  /// Full-index access, (i, j) in 0..2.
  const T& operator()(int i, int j) const { return c_[index(i, j)]; }
  T& operator()(int i, int j) { return c_[index(i, j)]; }

  static constexpr int index(int i, int j) {
    if (i == j) return i;
    const int s = i + j;  // (0,1)->1, (0,2)->2, (1,2)->3
    return s + 2;
  }

  SymTensor3& operator+=(const SymTensor3& o) {
    for (int k = 0; k < 6; ++k) c_[k] += o.c_[k];
    return *this;
  }
  SymTensor3& operator-=(const SymTensor3& o) {
    for (int k = 0; k < 6; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  template <class S>
  SymTensor3& operator*=(const S& s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  template <class S>
  SymTensor3& operator/=(const S& s) {
    for (auto& x : c_) x /= s;
    return *this;
  }

  bool off_diagonal_zero() const {
    return is_exact_zero(c_[3]) && is_exact_zero(c_[4]) && is_exact_zero(c_[5]);
  }

  const std::array<T, 6>& components() const { return c_; }

private:
  std::array<T, 6> c_{};
};

template <class T>
SymTensor3<T> operator+(SymTensor3<T> a, const SymTensor3<T>& b) {
  return a += b;
}
template <class T>
SymTensor3<T> operator-(SymTensor3<T> a, const SymTensor3<T>& b) {
  return a -= b;
}
template <class T>
SymTensor3<T> operator-(SymTensor3<T> a) {
  for (int k = 0; k < 6; ++k) a[k] = -a[k];
  return a;
}
template <class T, class S>
SymTensor3<T> operator*(SymTensor3<T> a, const S& s) {
  return a *= s;
}
template <class T, class S>
SymTensor3<T> operator*(const S& s, SymTensor3<T> a) {
  return a *= s;
}
template <class T, class S>
SymTensor3<T> operator/(SymTensor3<T> a, const S& s) {
  return a /= s;
}

using Sym3 = SymTensor3<double>;

// ---------------------------------------------------------------------------
// Elementary algebra

template <class T>
T trace(const SymTensor3<T>& a) {
  return a.xx() + a.yy() + a.zz();
}

template <class T>
T det(const SymTensor3<T>& a) {
  return a.xx() * (a.yy() * a.zz() - a.yz() * a.yz()) - a.xy() * (a.xy() * a.zz() - a.yz() * a.xz()) +
         a.xz() * (a.xy() * a.yz() - a.yy() * a.xz());
}

template <class T>
SymTensor3<T> dev(const SymTensor3<T>& a) {
  const T m = trace(a) / 3.0;
  return SymTensor3<T>(a.xx() - m, a.yy() - m, a.zz() - m, a.xy(), a.xz(), a.yz());
}

/// Double contraction A:B.
template <class T>
T contract(const SymTensor3<T>& a, const SymTensor3<T>& b) {
  return a.xx() * b.xx() + a.yy() * b.yy() + a.zz() * b.zz() +
         2.0 * (a.xy() * b.xy() + a.xz() * b.xz() + a.yz() * b.yz());
}

template <class T>
T norm(const SymTensor3<T>& a) {
  using std::sqrt;
  return sqrt(contract(a, a));
}

/// Inverse via the adjugate. Throws SingularTensor when det(A) vanishes.
template <class T>
SymTensor3<T> inv(const SymTensor3<T>& a) {
  const T d = det(a);
  const double dv = value_of(d);
  if (!(std::isfinite(dv)) || dv == 0.0) throw SingularTensor("inverse of singular tensor");
  const T i11 = a.yy() * a.zz() - a.yz() * a.yz();
  const T i22 = a.xx() * a.zz() - a.xz() * a.xz();
  const T i33 = a.xx() * a.yy() - a.xy() * a.xy();
  const T i12 = a.xz() * a.yz() - a.xy() * a.zz();
  const T i13 = a.xy() * a.yz() - a.xz() * a.yy();
  const T i23 = a.xy() * a.xz() - a.xx() * a.yz();
  return SymTensor3<T>(i11 / d, i22 / d, i33 / d, i12 / d, i13 / d, i23 / d);
}

template <class T>
SymTensor3<T> spd_inv(const SymTensor3<T>& a) {
  return inv(a);
}

/// A*A.
template <class T>
SymTensor3<T> square(const SymTensor3<T>& a) {
  SymTensor3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) r(i, j) = a(i, 0) * a(0, j) + a(i, 1) * a(1, j) + a(i, 2) * a(2, j);
  return r;
}

/// sym(A*B). Exact product when A and B commute (coaxial tensors).
template <class T>
SymTensor3<T> commuting_product(const SymTensor3<T>& a, const SymTensor3<T>& b) {
  SymTensor3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const T ab = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
      if (i == j) {
        r(i, j) = ab;
      } else {
        const T ba = b(i, 0) * a(0, j) + b(i, 1) * a(1, j) + b(i, 2) * a(2, j);
        r(i, j) = 0.5 * (ab + ba);
      }
    }
  return r;
}

/// S*X*S for symmetric S and X.
template <class T>
SymTensor3<T> congruence(const SymTensor3<T>& s, const SymTensor3<T>& x) {
  T sx[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sx[i][j] = s(i, 0) * x(0, j) + s(i, 1) * x(1, j) + s(i, 2) * x(2, j);
  SymTensor3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) r(i, j) = sx[i][0] * s(0, j) + sx[i][1] * s(1, j) + sx[i][2] * s(2, j);
  return r;
}

// ---------------------------------------------------------------------------
// Invariants

template <class T>
struct Invariants {
  T I1, I2, I3, J2;
};

template <class T>
Invariants<T> invariants(const SymTensor3<T>& a) {
  const T i1 = trace(a);
  const T i2 = a.xx() * a.yy() + a.yy() * a.zz() + a.xx() * a.zz() - a.xy() * a.xy() - a.xz() * a.xz() -
               a.yz() * a.yz();
  const SymTensor3<T> d = dev(a);
  return {i1, i2, det(a), 0.5 * contract(d, d)};
}

template <class T>
struct IsochoricInvariants {
  T I1_bar, I2_bar, I3;
};

template <class T>
IsochoricInvariants<T> isochoric_invariants(const SymTensor3<T>& a) {
  using std::cbrt;
  const Invariants<T> inv3 = invariants(a);
  if (!(value_of(inv3.I3) > 0.0)) throw NonPositiveDeterminant("isochoric invariants need det > 0");
  const T j13 = cbrt(inv3.I3);
  return {inv3.I1 / j13, inv3.I2 / (j13 * j13), inv3.I3};
}

/// Leading-minor test on the value part.
template <class T>
bool is_spd(const SymTensor3<T>& a) {
  const double a11 = value_of(a.xx()), a22 = value_of(a.yy()), a12 = value_of(a.xy());
  const double m2 = a11 * a22 - a12 * a12;
  const double m3 = value_of(det(a));
  return a11 > 0.0 && m2 > 0.0 && m3 > 0.0 && std::isfinite(m3);
}

template <class T>
Sym3 values(const SymTensor3<T>& a) {
  Sym3 r;
  for (int k = 0; k < 6; ++k) r[k] = value_of(a[k]);
  return r;
}

template <int N>
Sym3 tangent(const SymTensor3<ad::Dual<N>>& a, int slot) {
  Sym3 r;
  for (int k = 0; k < 6; ++k) r[k] = a[k].d[slot];
  return r;
}

// ---------------------------------------------------------------------------
// Spectral decomposition (double precision)

/// Column-major orthonormal eigenvector matrix: vectors[c] is eigenvector c.
struct SpectralDecomp {
  std::array<double, 3> values{};                 // descending
  std::array<std::array<double, 3>, 3> vectors{};  // vectors[c][row]

  Sym3 reconstruct() const;
};

/// Closed-form symmetric 3x3 eigensolver; deterministic on repeated eigenvalues.
SpectralDecomp spectral_decomposition(const Sym3& a);

/// Q diag(f) Q^T.
Sym3 spectral_compose(const SpectralDecomp& sd, const std::array<double, 3>& f);

/// Derivative of an isotropic spectral function in direction dA
/// (Daleckii-Krein): Q (F o (Q^T dA Q)) Q^T with F the divided-difference matrix.
Sym3 spectral_directional(const SpectralDecomp& sd, const std::array<std::array<double, 3>, 3>& divided,
                          const Sym3& direction);

namespace detail {

struct ScalarFn {
  double (*f)(double);
  double (*df)(double);
  // (f(a) - f(b)) / (a - b), evaluated stably; must reduce to df for a == b.
  double (*divided)(double, double);
};

template <class T>
SymTensor3<T> apply_spectral(const SymTensor3<T>& a, const ScalarFn& fn) {
  const SpectralDecomp sd = spectral_decomposition(values(a));
  std::array<double, 3> fv{};
  for (int i = 0; i < 3; ++i) fv[i] = fn.f(sd.values[i]);
  const Sym3 fa = spectral_compose(sd, fv);
  if constexpr (!ad::is_dual_v<T>) {
    return fa;
  } else {
    constexpr int N = ad::tangent_size<T>::value;
    std::array<std::array<double, 3>, 3> dd{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dd[i][j] = fn.divided(sd.values[i], sd.values[j]);
    SymTensor3<T> r;
    for (int k = 0; k < 6; ++k) r[k] = T(fa[k]);
    for (int s = 0; s < N; ++s) {
      const Sym3 da = tangent(a, s);
      bool zero = true;
      for (int k = 0; k < 6; ++k) zero = zero && da[k] == 0.0;
      if (zero) continue;
      const Sym3 df = spectral_directional(sd, dd, da);
      for (int k = 0; k < 6; ++k) r[k].d[s] = df[k];
    }
    return r;
  }
}

double sqrt_divided(double a, double b);
double exp_divided(double a, double b);

}  // namespace detail

/// Principal square root of an SPD tensor.
template <class T>
SymTensor3<T> spd_sqrt(const SymTensor3<T>& a) {
  if (!is_spd(a)) throw NotPositiveDefinite("spd_sqrt of a tensor that is not positive definite");
  static const detail::ScalarFn fn{[](double x) { return std::sqrt(x); },
                                   [](double x) { return 0.5 / std::sqrt(x); }, &detail::sqrt_divided};
  return detail::apply_spectral(a, fn);
}

/// Tensor exponential of a symmetric tensor.
template <class T>
SymTensor3<T> sym_exp(const SymTensor3<T>& a) {
  static const detail::ScalarFn fn{[](double x) { return std::exp(x); },
                                   [](double x) { return std::exp(x); }, &detail::exp_divided};
  return detail::apply_spectral(a, fn);
}

std::string to_string(const Sym3& a);

}  // namespace icann
