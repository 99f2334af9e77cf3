#include <random>

#include "doctest.h"
#include "icann/netfuncs.hpp"
#include "unit/helpers.hpp"

using icann::EnergyWeights;
using icann::PotentialWeights;
using icann::Sym3;
using namespace testutil;

namespace {

EnergyWeights<double> random_energy(std::mt19937_64& rng, bool full) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EnergyWeights<double> w;
  w.full_form = full;
  for (int k = 0; k < 2 * w.rows(); ++k) w.w2[k] = u(rng);
  for (int k = 0; k < w.rows(); ++k) w.w1[k] = u(rng);
  w.w3_1 = 3.0 * u(rng);
  w.w3_2 = u(rng);
  return w;
}

PotentialWeights<double> random_potential(std::mt19937_64& rng, bool full) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PotentialWeights<double> w;
  w.full_form = full;
  for (int k = 0; k < w.w2_count(); ++k) w.w2[k] = u(rng);
  for (int k = 0; k < w.w1_count(); ++k) w.w1[k] = 0.2 * u(rng);  // keeps sampled activations below the clamp
  return w;
}

Sym3 fd_energy_grad(const EnergyWeights<double>& w, const Sym3& a, double h) {
  Sym3 g;
  for (int k = 0; k < 6; ++k) {
    Sym3 p = a, m = a;
    p[k] += h;
    m[k] -= h;
    const double d = (icann::energy_eval(w, p) - icann::energy_eval(w, m)) / (2 * h);
    // Off-diagonal storage slots appear twice in the full tensor.
    g[k] = k < 3 ? d : 0.5 * d;
  }
  return g;
}

Sym3 fd_potential_flow(const PotentialWeights<double>& w, const Sym3& a, double h) {
  Sym3 g;
  for (int k = 0; k < 6; ++k) {
    Sym3 p = a, m = a;
    p[k] += h;
    m[k] -= h;
    const double d = (icann::potential_eval(w, p) - icann::potential_eval(w, m)) / (2 * h);
    g[k] = k < 3 ? d : 0.5 * d;
  }
  return g;
}

double rel_err(const Sym3& a, const Sym3& b) {
  return icann::norm(a - b) / std::max(icann::norm(b), 1e-300);
}

const Sym3 kUniaxial11 = Sym3::diag(1.21, 1 / 1.1, 1 / 1.1);

}  // namespace

TEST_CASE("energy evaluation examples") {
  EnergyWeights<double> nh;
  nh.full_form = true;
  nh.w2[0] = 6.25;
  CHECK(icann::energy_eval(nh, Sym3::identity()) == 0.0);
  CHECK(icann::energy_eval(nh, kUniaxial11) == doctest::Approx(0.176136).epsilon(1e-5));
  CHECK(icann::energy_eval(EnergyWeights<double>{}, kUniaxial11) == 0.0);

  const Sym3 g = icann::energy_grad(nh, kUniaxial11);
  const Sym3 m = 2.0 * icann::commuting_product(kUniaxial11, g);
  CHECK(m.xx() == doctest::Approx(2.5076).epsilon(1e-4));
  CHECK(m.yy() == doctest::Approx(-1.2538).epsilon(1e-4));
  CHECK(m.zz() == doctest::Approx(-1.2538).epsilon(1e-4));
  CHECK(max_abs_diff(icann::energy_grad(nh, Sym3::identity()), Sym3::zero()) < 1e-15);
  CHECK_THROWS_AS(icann::energy_eval(nh, Sym3::diag(1, 1, -1)), icann::NonPositiveDeterminant);
}

TEST_CASE("energy normalization for random weights") {
  std::mt19937_64 rng(21);
  for (int n = 0; n < 1000; ++n) {
    const auto w = random_energy(rng, n % 2 == 0);
    CHECK(std::fabs(icann::energy_eval(w, Sym3::identity())) <= 1e-12);
    CHECK(icann::norm(icann::energy_grad(w, Sym3::identity())) <= 1e-12);
  }
}

TEST_CASE("energy gradient matches finite differences") {
  std::mt19937_64 rng(22);
  for (int n = 0; n < 200; ++n) {
    const auto w = random_energy(rng, n % 2 == 0);
    const Sym3 a = random_spd(rng, 0.6, 1.6);
    CHECK(rel_err(icann::energy_grad(w, a), fd_energy_grad(w, a, 1e-6)) < 1e-7);
  }
}

TEST_CASE("energy is isotropic and grows along isochoric stretch") {
  std::mt19937_64 rng(23);
  for (int n = 0; n < 200; ++n) {
    const auto w = random_energy(rng, n % 2 == 0);
    const Sym3 a = random_spd(rng, 0.6, 1.6);
    const double e = icann::energy_eval(w, a);
    CHECK(icann::energy_eval(w, rotate(random_rotation(rng), a)) == doctest::Approx(e).epsilon(1e-10));
  }
  for (int n = 0; n < 100; ++n) {
    const auto w = random_energy(rng, n % 2 == 0);
    double prev = -1.0;
    for (int s = 0; s <= 20; ++s) {
      const double lam = 1.0 + 0.03 * s;  // I1~ increases with lam at I3 = 1
      const double e = icann::energy_eval(w, Sym3::diag(lam * lam, 1 / lam, 1 / lam));
      CHECK(e >= prev);
      prev = e;
    }
  }
}

TEST_CASE("potential evaluation examples") {
  PotentialWeights<double> vm;
  vm.w2[4] = 0.25;
  CHECK(icann::potential_eval(vm, Sym3::zero()) == 0.0);
  CHECK(icann::potential_eval(vm, Sym3::diag(2, 0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(max_abs_diff(icann::potential_flow(vm, Sym3::diag(2, 0, 0)), Sym3::diag(1, -0.5, -0.5)) < 1e-15);
  CHECK(max_abs_diff(icann::potential_flow(vm, Sym3::zero()), Sym3::zero()) == 0.0);

  CHECK(icann::yield_value(vm, Sym3::zero()) == -1.0);
  CHECK(icann::yield_value(vm, Sym3::diag(2, 0, 0)) == doctest::Approx(0.0).scale(1.0));
  CHECK(icann::yield_value(vm, Sym3::diag(1, 0, 0)) == doctest::Approx(-0.75));

  std::mt19937_64 rng(24);
  for (int n = 0; n < 200; ++n) {
    auto w = random_potential(rng, n % 2 == 0);
    CHECK(icann::potential_eval(w, Sym3::zero()) == 0.0);
    CHECK(max_abs_diff(icann::potential_flow(w, Sym3::zero()), Sym3::zero()) == 0.0);
    // Deviatoric flow when the I1 channels are off.
    const int per_row = w.full_form ? 3 : 2;
    for (int k = 0; k < 2 * per_row; ++k) w.w2[k] = 0.0;
    const Sym3 flow = icann::potential_flow(w, random_sym(rng, 1.0));
    CHECK(std::fabs(icann::trace(flow)) <= 1e-13 * icann::norm(flow));
  }
}

TEST_CASE("potential is even, isotropic and midpoint convex") {
  std::mt19937_64 rng(25);
  for (int n = 0; n < 500; ++n) {
    const auto w = random_potential(rng, n % 2 == 0);
    const Sym3 a = random_sym(rng, 1.0);
    const Sym3 b = random_sym(rng, 1.0);
    CHECK(icann::potential_eval(w, a) == icann::potential_eval(w, -a));
    CHECK(icann::potential_eval(w, rotate(random_rotation(rng), a)) ==
          doctest::Approx(icann::potential_eval(w, a)).epsilon(1e-10));
    const double mid = icann::potential_eval(w, 0.5 * (a + b));
    CHECK(mid <= 0.5 * (icann::potential_eval(w, a) + icann::potential_eval(w, b)) + 1e-10);
  }
}

TEST_CASE("potential flow matches finite differences away from kinks") {
  std::mt19937_64 rng(26);
  int checked = 0;
  for (int n = 0; n < 400; ++n) {
    const auto w = random_potential(rng, n % 2 == 0);
    const Sym3 a = random_sym(rng, 1.0);
    if (std::fabs(icann::trace(a)) < 1e-3) continue;
    const double h = 1e-6 * std::max(1.0, icann::norm(a));
    CHECK(rel_err(icann::potential_flow(w, a), fd_potential_flow(w, a, h)) < 1e-6);
    ++checked;
  }
  CHECK(checked > 300);
}

TEST_CASE("activation guards") {
  PotentialWeights<double> w;
  w.w2[5] = 1.0;
  w.w1[2] = 1.0;
  // Beyond the clamp the term saturates and the derivative vanishes.
  const Sym3 big = Sym3::diag(60, 0, 0);  // J2~ = 3600
  CHECK_THROWS_AS(icann::potential_eval(w, big), icann::ArgumentOverflow);
  const Sym3 mid = Sym3::diag(7.5, 0, 0);  // J2~ = 56.25
  CHECK(std::isfinite(icann::potential_eval(w, mid)));
  CHECK(max_abs_diff(icann::potential_flow(w, mid), Sym3::zero()) == 0.0);

  EnergyWeights<double> e;
  e.w2[1] = 1.0;
  e.w1[0] = 1e5;
  CHECK_THROWS_AS(icann::energy_eval(e, kUniaxial11), icann::ArgumentOverflow);
}

TEST_CASE("weights serialize losslessly with canonical names") {
  std::mt19937_64 rng(27);
  icann::WeightSet<double> ws;
  ws.psi_e = random_energy(rng, true);
  ws.psi_p = random_energy(rng, false);
  ws.psi_pe = random_energy(rng, false);
  ws.g1 = random_potential(rng, false);
  ws.g2 = random_potential(rng, true);

  const auto j = icann::weights_to_json(ws);
  CHECK(j.contains("psi_e.w2.8"));
  CHECK(j.contains("psi_e.w1.8"));
  CHECK(j.contains("psi_p.w1.2"));
  CHECK(j.contains("g1.w1.3"));
  CHECK(j.contains("g2.w1.8"));
  CHECK(j.contains("g2.w2.12"));
  CHECK(j.size() == 14 + 8 + 8 + 9 + 20);

  const auto back = icann::weights_from_json(nlohmann::json::parse(j.dump()));
  CHECK(icann::flatten(back) == icann::flatten(ws));
  CHECK(back.g2.full_form);
  CHECK(!back.g1.full_form);

  auto bad = j;
  bad["g1.w9.1"] = 1.0;
  CHECK_THROWS_AS(icann::weights_from_json(bad), icann::ValidationError);
  bad = j;
  bad.erase("g1.w1.3");
  CHECK_THROWS_AS(icann::weights_from_json(bad), icann::ValidationError);
  bad = j;
  bad["g1.w1.3"] = -1.0;
  CHECK_THROWS_AS(icann::weights_from_json(bad), icann::ValidationError);
}

TEST_CASE("normalized weights describe the same response in scaled stresses") {
  std::mt19937_64 rng(28);
  for (int n = 0; n < 50; ++n) {
    icann::WeightSet<double> ws;
    ws.psi_e = random_energy(rng, true);
    ws.g1 = random_potential(rng, n % 2 == 0);
    const double s = 0.5 + 4.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto ns = icann::to_normalized(ws, s);
    const Sym3 a = random_spd(rng, 0.7, 1.4);
    CHECK(icann::energy_eval(ns.psi_e, a) == doctest::Approx(icann::energy_eval(ws.psi_e, a) / s).epsilon(1e-12));
    const Sym3 t = random_sym(rng, 0.5);
    CHECK(icann::potential_eval(ns.g1, Sym3(t / s)) == doctest::Approx(icann::potential_eval(ws.g1, t)).epsilon(1e-11));
    const auto back = icann::from_normalized(ns, s);
    const auto f0 = icann::flatten(ws), f1 = icann::flatten(back);
    for (std::size_t k = 0; k < f0.size(); ++k) CHECK(f1[k] == doctest::Approx(f0[k]).epsilon(1e-14));
  }
}

TEST_CASE("dual tangents with respect to weights match finite differences") {
  using D = icann::ad::Dual<1>;
  std::mt19937_64 rng(29);
  for (int n = 0; n < 50; ++n) {
    const auto ew = random_energy(rng, true);
    const auto pw = random_potential(rng, n % 2 == 0);
    const Sym3 a = random_spd(rng, 0.7, 1.4);
    const Sym3 t = random_sym(rng, 1.0);
    for (int k = 0; k < 8; ++k) {
      EnergyWeights<D> ed;
      ed.full_form = true;
      for (int i = 0; i < 8; ++i) ed.w2[i] = D(ew.w2[i]);
      for (int i = 0; i < 4; ++i) ed.w1[i] = D(ew.w1[i]);
      ed.w3_1 = D(ew.w3_1);
      ed.w3_2 = D(ew.w3_2);
      if (k < 4)
        ed.w1[k].d[0] = 1.0;
      else
        ed.w2[k].d[0] = 1.0;
      icann::SymTensor3<D> ad;
      for (int i = 0; i < 6; ++i) ad[i] = D(a[i]);
      const auto g = icann::energy_grad(ed, ad);
      auto wp = ew, wm = ew;
      const double h = 1e-6;
      (k < 4 ? wp.w1[k] : wp.w2[k]) += h;
      (k < 4 ? wm.w1[k] : wm.w2[k]) -= h;
      const Sym3 fd = (icann::energy_grad(wp, a) - icann::energy_grad(wm, a)) / (2 * h);
      const double noise = 1e-7 * icann::norm(icann::energy_grad(ew, a));
      CHECK(icann::norm(icann::tangent(g, 0) - fd) <= 1e-6 * icann::norm(fd) + noise);
    }
    for (int k = 0; k < pw.w1_count(); ++k) {
      PotentialWeights<D> pd;
      pd.full_form = pw.full_form;
      for (int i = 0; i < 12; ++i) pd.w2[i] = D(pw.w2[i]);
      for (int i = 0; i < 8; ++i) pd.w1[i] = D(pw.w1[i]);
      pd.w1[k].d[0] = 1.0;
      icann::SymTensor3<D> td;
      for (int i = 0; i < 6; ++i) td[i] = D(t[i]);
      const auto f = icann::potential_flow(pd, td);
      auto wp = pw, wm = pw;
      const double h = 1e-7;
      wp.w1[k] += h;
      wm.w1[k] -= h;
      const Sym3 fd = (icann::potential_flow(wp, t) - icann::potential_flow(wm, t)) / (2 * h);
      // FD noise scales with the flow itself, not with its weight derivative.
      const double noise = 1e-7 * icann::norm(icann::potential_flow(pw, t));
      CHECK(icann::norm(icann::tangent(f, 0) - fd) <= 1e-6 * icann::norm(fd) + noise);
    }
  }
}
