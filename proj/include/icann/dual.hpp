#pragma once

// Forward-mode dual numbers with a fixed number of tangent directions.
//
// Generic numeric code is written against a scalar type T and calls math
// functions unqualified (after `using std::exp;` etc.) so that both double and
// Dual<N> resolve through ADL.

#include <array>
#include <cmath>
#include <type_traits>

namespace icann::ad {

template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit promotion of constants
  Dual(double value, const std::array<double, N>& tangent) : v(value), d(tangent) {}

  static Dual variable(double value, int slot) {
    Dual x(value);
    x.d[slot] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    const double q = v * inv;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
  Dual& operator+=(double o) {
    v += o;
    return *this;
  }
  Dual& operator-=(double o) {
    v -= o;
    return *this;
  }
  Dual& operator*=(double o) {
    v *= o;
    for (auto& x : d) x *= o;
    return *this;
  }
  Dual& operator/=(double o) {
    v /= o;
    for (auto& x : d) x /= o;
    return *this;
  }
};

template <int N>
Dual<N> operator-(Dual<N> a) {
  a.v = -a.v;
  for (auto& x : a.d) x = -x;
  return a;
}

template <int N> Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <int N> Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <int N> Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <int N> Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <int N> Dual<N> operator+(Dual<N> a, double b) { return a += b; }
template <int N> Dual<N> operator-(Dual<N> a, double b) { return a -= b; }
template <int N> Dual<N> operator*(Dual<N> a, double b) { return a *= b; }
template <int N> Dual<N> operator/(Dual<N> a, double b) { return a /= b; }
template <int N> Dual<N> operator+(double a, Dual<N> b) { return b += a; }
template <int N> Dual<N> operator*(double a, Dual<N> b) { return b *= a; }
template <int N>
Dual<N> operator-(double a, const Dual<N>& b) {
  return -b + a;
}
template <int N>
Dual<N> operator/(double a, const Dual<N>& b) {
  Dual<N> r(a / b.v);
  const double s = -r.v / b.v;
  for (int i = 0; i < N; ++i) r.d[i] = s * b.d[i];
  return r;
}

template <int N> bool operator<(const Dual<N>& a, const Dual<N>& b) { return a.v < b.v; }
template <int N> bool operator>(const Dual<N>& a, const Dual<N>& b) { return a.v > b.v; }
template <int N> bool operator<=(const Dual<N>& a, const Dual<N>& b) { return a.v <= b.v; }
template <int N> bool operator>=(const Dual<N>& a, const Dual<N>& b) { return a.v >= b.v; }
template <int N> bool operator<(const Dual<N>& a, double b) { return a.v < b; }
template <int N> bool operator>(const Dual<N>& a, double b) { return a.v > b; }
template <int N> bool operator<=(const Dual<N>& a, double b) { return a.v <= b; }
template <int N> bool operator>=(const Dual<N>& a, double b) { return a.v >= b; }

// Chain rule helper: f(a) with derivative df.
template <int N>
Dual<N> chain(const Dual<N>& a, double f, double df) {
  Dual<N> r(f);
  for (int i = 0; i < N; ++i) r.d[i] = df * a.d[i];
  return r;
}

template <int N>
Dual<N> exp(const Dual<N>& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e);
}
template <int N>
Dual<N> expm1(const Dual<N>& a) {
  return chain(a, std::expm1(a.v), std::exp(a.v));
}
template <int N>
Dual<N> log(const Dual<N>& a) {
  return chain(a, std::log(a.v), 1.0 / a.v);
}
template <int N>
Dual<N> log1p(const Dual<N>& a) {
  return chain(a, std::log1p(a.v), 1.0 / (1.0 + a.v));
}
template <int N>
Dual<N> sqrt(const Dual<N>& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s);
}
template <int N>
Dual<N> cbrt(const Dual<N>& a) {
  const double c = std::cbrt(a.v);
  return chain(a, c, c / (3.0 * a.v));
}
template <int N>
Dual<N> pow(const Dual<N>& a, double p) {
  const double f = std::pow(a.v, p);
  return chain(a, f, p * std::pow(a.v, p - 1.0));
}
template <int N>
Dual<N> pow(const Dual<N>& a, const Dual<N>& p) {
  // a^p = exp(p ln a); requires a > 0.
  const double la = std::log(a.v);
  const double f = std::pow(a.v, p.v);
  Dual<N> r(f);
  for (int i = 0; i < N; ++i) r.d[i] = f * (p.d[i] * la + p.v * a.d[i] / a.v);
  return r;
}
template <int N>
Dual<N> cosh(const Dual<N>& a) {
  return chain(a, std::cosh(a.v), std::sinh(a.v));
}
template <int N>
Dual<N> sinh(const Dual<N>& a) {
  return chain(a, std::sinh(a.v), std::cosh(a.v));
}
template <int N>
Dual<N> tanh(const Dual<N>& a) {
  const double t = std::tanh(a.v);
  return chain(a, t, 1.0 - t * t);
}
template <int N>
Dual<N> abs(const Dual<N>& a) {
  // Subgradient 0 at the kink.
  const double s = a.v > 0.0 ? 1.0 : (a.v < 0.0 ? -1.0 : 0.0);
  return chain(a, std::fabs(a.v), s);
}
template <int N>
Dual<N> fabs(const Dual<N>& a) {
  return abs(a);
}

// ---------------------------------------------------------------------------
// Scalar traits shared by generic code.

template <class T>
struct is_dual : std::false_type {};
template <int N>
struct is_dual<Dual<N>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

template <class T>
struct tangent_size : std::integral_constant<int, 0> {};
template <int N>
struct tangent_size<Dual<N>> : std::integral_constant<int, N> {};

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) {
  return x.v;
}

/// True when the value and every tangent component vanish.
inline bool is_exact_zero(double x) { return x == 0.0; }
template <int N>
bool is_exact_zero(const Dual<N>& x) {
  if (x.v != 0.0) return false;
  for (double t : x.d)
    if (t != 0.0) return false;
  return true;
}

}  // namespace icann::ad
