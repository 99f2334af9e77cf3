#include <random>

#include "doctest.h"
#include "icann/tensor3.hpp"
#include "unit/helpers.hpp"

using icann::Sym3;
using namespace testutil;

TEST_CASE("invariants of simple tensors") {
  auto i = icann::invariants(Sym3::identity());
  CHECK(i.I1 == 3.0);
  CHECK(i.I2 == 3.0);
  CHECK(i.I3 == 1.0);
  CHECK(i.J2 == 0.0);

  auto d = icann::invariants(Sym3::diag(4, 1, 1));
  CHECK(d.I1 == doctest::Approx(6.0));
  CHECK(d.I2 == doctest::Approx(9.0));
  CHECK(d.I3 == doctest::Approx(4.0));
  CHECK(d.J2 == doctest::Approx(3.0));

  auto z = icann::invariants(Sym3::zero());
  CHECK(z.I1 == 0.0);
  CHECK(z.I2 == 0.0);
  CHECK(z.I3 == 0.0);
  CHECK(z.J2 == 0.0);
}

TEST_CASE("isochoric invariants") {
  auto id = icann::isochoric_invariants(Sym3::identity());
  CHECK(id.I1_bar == doctest::Approx(3.0));
  CHECK(id.I2_bar == doctest::Approx(3.0));

  auto u = icann::isochoric_invariants(Sym3::diag(1.21, 1 / 1.1, 1 / 1.1));
  CHECK(u.I1_bar == doctest::Approx(3.028182).epsilon(1e-6));
  CHECK(u.I3 == doctest::Approx(1.0));

  std::mt19937_64 rng(7);
  const Sym3 a = random_spd(rng);
  auto p = icann::isochoric_invariants(a);
  auto q = icann::isochoric_invariants(3.7 * a);
  CHECK(p.I1_bar == doctest::Approx(q.I1_bar).epsilon(1e-13));
  CHECK(p.I2_bar == doctest::Approx(q.I2_bar).epsilon(1e-13));

  CHECK_THROWS_AS(icann::isochoric_invariants(Sym3::diag(1, 1, -1)), icann::NonPositiveDeterminant);
  CHECK_THROWS_AS(icann::isochoric_invariants(Sym3::zero()), icann::NonPositiveDeterminant);
}

TEST_CASE("dev, inverse, trace, det") {
  CHECK(max_abs_diff(icann::dev(Sym3::identity()), Sym3::zero()) == 0.0);
  CHECK(max_abs_diff(icann::dev(Sym3::diag(4, 1, 1)), Sym3::diag(2, -1, -1)) < 1e-15);
  CHECK(max_abs_diff(icann::spd_inv(Sym3::diag(2, 1, 1)), Sym3::diag(0.5, 1, 1)) == 0.0);
  CHECK_THROWS_AS(icann::spd_inv(Sym3::diag(1, 0, 1)), icann::SingularTensor);

  std::mt19937_64 rng(11);
  for (int n = 0; n < 200; ++n) {
    const Sym3 a = random_spd(rng);
    const Sym3 ai = icann::inv(a);
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += a(i, k) * ai(k, j);
        err = std::max(err, std::fabs(s - (i == j ? 1.0 : 0.0)));
      }
    CHECK(err < 1e-12);
  }
}

TEST_CASE("invariants are characteristic polynomial coefficients") {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 200; ++n) {
    const Sym3 a = random_spd(rng, 0.1, 5.0);
    const auto sd = icann::spectral_decomposition(a);
    const double l1 = sd.values[0], l2 = sd.values[1], l3 = sd.values[2];
    const auto inv3 = icann::invariants(a);
    CHECK(inv3.I1 == doctest::Approx(l1 + l2 + l3).epsilon(1e-10));
    CHECK(inv3.I2 == doctest::Approx(l1 * l2 + l2 * l3 + l1 * l3).epsilon(1e-10));
    CHECK(inv3.I3 == doctest::Approx(l1 * l2 * l3).epsilon(1e-10));
  }
}

TEST_CASE("spectral decomposition reconstructs and is orthogonal") {
  std::mt19937_64 rng(5);
  std::vector<Sym3> cases;
  for (int n = 0; n < 300; ++n) cases.push_back(random_sym(rng, 3.0));
  // Degenerate spectra.
  cases.push_back(Sym3::identity());
  cases.push_back(rotate(random_rotation(rng), Sym3::diag(2, 2, 1)));
  cases.push_back(rotate(random_rotation(rng), Sym3::diag(2, 1, 1)));
  cases.push_back(rotate(random_rotation(rng), Sym3::diag(5, 5, 5)));
  cases.push_back(rotate(random_rotation(rng), Sym3::diag(1 + 1e-14, 1, 0.3)));
  cases.push_back(Sym3(1, 1, 1, 1e-300, 0, 0));
  for (double gap : {1e-4, 1e-6, 1e-8, 1e-10}) {
    cases.push_back(rotate(random_rotation(rng), Sym3::diag(1.3, 0.9 + gap, 0.9)));
    cases.push_back(rotate(random_rotation(rng), Sym3::diag(0.9 + gap, 0.9, 0.2)));
  }

  for (const Sym3& a : cases) {
    const auto sd = icann::spectral_decomposition(a);
    CHECK(sd.values[0] >= sd.values[1]);
    CHECK(sd.values[1] >= sd.values[2]);
    const double scale = std::max(icann::norm(a), 1e-300);
    CHECK(icann::norm(sd.reconstruct() - a) <= 1e-12 * scale * 10.0);
    double orth = 0.0;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += sd.vectors[p][i] * sd.vectors[q][i];
        orth = std::max(orth, std::fabs(s - (p == q ? 1.0 : 0.0)));
      }
    CHECK(orth < 1e-12);
  }
}

TEST_CASE("spectral decomposition is deterministic") {
  std::mt19937_64 rng(9);
  for (int n = 0; n < 50; ++n) {
    const Sym3 a = random_sym(rng);
    const auto s1 = icann::spectral_decomposition(a);
    const auto s2 = icann::spectral_decomposition(a);
    CHECK(s1.values == s2.values);
    CHECK(s1.vectors == s2.vectors);
  }
  // Ties resolve to the coordinate axes.
  const auto id = icann::spectral_decomposition(Sym3::identity());
  CHECK(id.vectors[0] == std::array<double, 3>{1, 0, 0});
  CHECK(id.vectors[2] == std::array<double, 3>{0, 0, 1});
}

TEST_CASE("square root and exponential") {
  CHECK(max_abs_diff(icann::spd_sqrt(Sym3::diag(4, 1, 1)), Sym3::diag(2, 1, 1)) == 0.0);
  CHECK(max_abs_diff(icann::sym_exp(Sym3::zero()), Sym3::identity()) == 0.0);
  CHECK_THROWS_AS(icann::spd_sqrt(Sym3::diag(1, -1, 1)), icann::NotPositiveDefinite);

  std::mt19937_64 rng(13);
  for (int n = 0; n < 200; ++n) {
    const Sym3 a = random_spd(rng, 0.2, 4.0);
    const Sym3 r = icann::spd_sqrt(a);
    CHECK(max_abs_diff(icann::square(r), a) < 1e-10);
    CHECK(max_abs_diff(icann::spd_sqrt(icann::square(a)), a) < 1e-9);

    const Sym3 d = random_sym(rng);
    CHECK(icann::det(icann::sym_exp(d)) == doctest::Approx(std::exp(icann::trace(d))).epsilon(1e-12));
    const Sym3 dd = icann::dev(d);
    CHECK(icann::det(icann::sym_exp(dd)) == doctest::Approx(1.0).epsilon(1e-13));

    const Rotation q = random_rotation(rng);
    CHECK(max_abs_diff(icann::sym_exp(rotate(q, d)), rotate(q, icann::sym_exp(d))) < 1e-10);
  }
}

TEST_CASE("dual-number tangents of spectral functions match finite differences") {
  using D = icann::ad::Dual<2>;
  std::mt19937_64 rng(17);
  for (int n = 0; n < 50; ++n) {
    // Includes coaxial (diagonal, repeated) cases, which are the common ones.
    const Sym3 a = n % 5 == 0 ? Sym3::diag(1.3, 0.9, 0.9) : random_spd(rng);
    const Sym3 da = random_sym(rng);
    const Sym3 db = n % 5 == 0 ? Sym3::diag(0.3, -0.1, -0.2) : random_sym(rng);
    icann::SymTensor3<D> x;
    for (int k = 0; k < 6; ++k) {
      x[k] = D(a[k]);
      x[k].d[0] = da[k];
      x[k].d[1] = db[k];
    }
    const double h = 1e-6;
    const auto rs = icann::spd_sqrt(x);
    const auto re = icann::sym_exp(x);
    const Sym3 fd_s = (icann::spd_sqrt(Sym3(a + h * da)) - icann::spd_sqrt(Sym3(a - h * da))) / (2 * h);
    const Sym3 fd_e = (icann::sym_exp(Sym3(a + h * db)) - icann::sym_exp(Sym3(a - h * db))) / (2 * h);
    CHECK(max_abs_diff(icann::tangent(rs, 0), fd_s) < 1e-7);
    CHECK(max_abs_diff(icann::tangent(re, 1), fd_e) < 1e-7);
  }
}
