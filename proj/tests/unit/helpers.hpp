#pragma once

#include <cmath>
#include <random>

#include "icann/tensor3.hpp"

namespace testutil {

using icann::Sym3;

inline double max_abs_diff(const Sym3& a, const Sym3& b) {
  double m = 0.0;
  for (int k = 0; k < 6; ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return m;
}

inline Sym3 random_sym(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Sym3(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
}

struct Rotation {
  double q[3][3];
};

inline Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  const double s = std::sqrt(w * w + x * x + y * y + z * z);
  w /= s, x /= s, y /= s, z /= s;
  Rotation r{{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
               {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
               {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
  return r;
}

// Q^T A Q
inline Sym3 rotate(const Rotation& r, const Sym3& a) {
  Sym3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += r.q[k][i] * a(k, l) * r.q[l][j];
      out(i, j) = s;
    }
  return out;
}

// Random SPD tensor with eigenvalues in [lo, hi] and a random eigenbasis.
inline Sym3 random_spd(std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return rotate(random_rotation(rng), Sym3::diag(u(rng), u(rng), u(rng)));
}

}  // namespace testutil
