#include <cmath>
#include <random>

#include "doctest.h"
#include "icann/integrator.hpp"
#include "icann/models.hpp"
#include "icann/refmodels.hpp"
#include "unit/helpers.hpp"

using namespace icann;
using namespace testutil;

namespace {

// Von Mises perfect plasticity in network form: mu = 12.5, yield stress 2.
WeightSet<double> perfect_plasticity() {
  WeightSet<double> w;
  w.psi_e.w2[0] = 6.25;
  w.g1.w2[4] = 0.25;
  return w;
}

WeightSet<double> hardening_weights() { return vm_af_equivalent_weights(VmAfParams{}); }

void check_kkt(const StepResult<double>& r, double tol = 1e-8) {
  if (r.dlambda == 0.0)
    CHECK(r.phi_final <= tol);
  else {
    CHECK(r.dlambda > 0.0);
    CHECK(std::fabs(r.phi_final) <= tol);
  }
}

}  // namespace

TEST_CASE("flow directions") {
  const NetworkModel<double> m(perfect_plasticity());
  StressSet<double> virgin;
  auto [dp, dpi] = flow_directions(m, virgin);
  CHECK(norm(dp) == 0.0);
  CHECK(norm(dpi) == 0.0);

  StressSet<double> s;
  s.Gamma = Sym3::diag(2.0, 0.0, 0.0);
  std::tie(dp, dpi) = flow_directions(m, s);
  CHECK(max_abs_diff(dp, Sym3::diag(1.0, -0.5, -0.5)) < 1e-14);

  std::mt19937_64 rng(1);
  for (int n = 0; n < 100; ++n) {
    s.Gamma = random_sym(rng, 2.0);
    std::tie(dp, dpi) = flow_directions(m, s);
    CHECK(std::fabs(trace(dp)) <= 1e-13 * norm(dp));
  }
}

TEST_CASE("exponential update") {
  const Sym3 d = Sym3::diag(1.0, -0.5, -0.5);
  std::mt19937_64 rng(2);
  const Sym3 u = random_spd(rng, 0.8, 1.2);
  CHECK(max_abs_diff(exp_update(u, 0.0, d), u) == 0.0);
  CHECK(max_abs_diff(exp_update_squared(u, 0.0, d), square(u)) < 1e-15);

  const Sym3 c = exp_update_squared(Sym3::identity(), 0.05, d);
  CHECK(max_abs_diff(c, Sym3::diag(std::exp(0.1), std::exp(-0.05), std::exp(-0.05))) < 1e-15);

  for (int n = 0; n < 100; ++n) {
    const Sym3 a = random_spd(rng, 0.7, 1.4);
    const Sym3 dir = dev(random_sym(rng));
    const double dl = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    CHECK(det(exp_update_squared(a, dl, dir)) == doctest::Approx(det(square(a))).epsilon(1e-13));
  }
}

TEST_CASE("elastic step leaves the state unchanged") {
  const NetworkModel<double> m(perfect_plasticity());
  const MaterialState<double> s0;
  const auto r = step(m, s0, driving_tensor(PathKind::UT, 1.0), driving_tensor(PathKind::UT, 1.01), 1.0);
  CHECK(r.dlambda == 0.0);
  CHECK(r.phi_trial < 0.0);
  CHECK(max_abs_diff(r.state.Up, s0.Up) == 0.0);
  CHECK(max_abs_diff(r.state.Upi, s0.Upi) == 0.0);
}

TEST_CASE("zero deformation path") {
  const NetworkModel<double> m(hardening_weights());
  LoadPath p = make_custom_path(std::vector<double>(20, 1.0));
  for (const auto& r : simulate_path(m, p.history())) {
    CHECK(r.dlambda == 0.0);
    CHECK(norm(r.sigma) < 1e-14);
  }
}

TEST_CASE("perfect plasticity plateaus at the yield stress") {
  const NetworkModel<double> m(perfect_plasticity());
  const LoadPath p = make_path(PathKind::UT, 1.15, 400);
  const auto res = simulate_path(m, p.history());
  std::size_t onset = 0;
  while (onset < res.size() && res[onset].dlambda == 0.0) ++onset;
  REQUIRE(onset < res.size());
  // The last elastic state lies just below the yield stress.
  CHECK(res[onset - 1].sigma.xx() < 2.0);
  CHECK(res[onset - 1].sigma.xx() > 1.95);
  for (std::size_t i = onset; i < res.size(); ++i) CHECK(res[i].sigma.xx() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("KKT, dissipation and incompressibility on a long cyclic path") {
  const NetworkModel<double> m(hardening_weights());
  const LoadPath p = make_path(PathKind::Cyclic, 1.25, 300, 2);
  REQUIRE(p.C.size() >= 1001);
  const auto res = simulate_path(m, p.history());
  int plastic = 0;
  for (const auto& r : res) {
    check_kkt(r);
    CHECK(r.dissipation.total >= -1e-10);
    CHECK(det(square(r.state.Up)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(det(square(r.state.Upi)) == doctest::Approx(1.0).epsilon(1e-8));
    plastic += r.dlambda > 0.0;
  }
  CHECK(plastic > 100);
}

TEST_CASE("unloading after a plastic step is elastic") {
  const NetworkModel<double> m(hardening_weights());
  const LoadPath p = make_path(PathKind::UTUnl, 1.3, 100);
  const auto res = simulate_path(m, p.history());
  std::size_t peak = 0;
  for (std::size_t i = 1; i < p.stretch.size(); ++i)
    if (p.stretch[i] > p.stretch[peak]) peak = i;
  REQUIRE(res[peak - 1].dlambda > 0.0);
  CHECK(res[peak].dlambda == 0.0);
}

TEST_CASE("rate independence under time scaling") {
  const NetworkModel<double> m(hardening_weights());
  LoadPath p = make_path(PathKind::UT, 1.3, 100);
  auto a = simulate_path(m, p.history());
  for (double& t : p.time) t *= 7.5;
  auto b = simulate_path(m, p.history());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].sigma.xx() == doctest::Approx(b[i].sigma.xx()).epsilon(1e-12));
}

TEST_CASE("first-order convergence under step halving") {
  const NetworkModel<double> m(hardening_weights());
  std::vector<double> finals;
  for (int n : {50, 100, 200, 400}) finals.push_back(simulate_path(m, make_path(PathKind::UT, 1.3, n).history()).back().sigma.xx());
  for (std::size_t k = 0; k + 2 < finals.size(); ++k) {
    const double ratio = (finals[k] - finals[k + 1]) / (finals[k + 1] - finals[k + 2]);
    MESSAGE("halving ratio " << ratio);
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
  }
}

TEST_CASE("determinism") {
  const NetworkModel<double> m(hardening_weights());
  const LoadPath p = make_path(PathKind::Cyclic, 1.25, 100);
  const auto a = simulate_path(m, p.history());
  const auto b = simulate_path(m, p.history());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 6; ++k) CHECK(a[i].sigma[k] == b[i].sigma[k]);
    CHECK(a[i].dlambda == b[i].dlambda);
  }
}

TEST_CASE("degenerate flow at a virgin state is repaired from the trial stresses") {
  const NetworkModel<double> m(perfect_plasticity());
  // One large increment: flow at t_n is zero, the trial state is plastic.
  const auto r = step(m, MaterialState<double>{}, Sym3::identity(), driving_tensor(PathKind::UT, 1.2), 1.0);
  CHECK(r.flow_at_trial);
  check_kkt(r);
  CHECK(r.dlambda > 0.0);
}

TEST_CASE("dual tangents of a path match finite differences") {
  using D = ad::Dual<2>;
  WeightSet<double> w = hardening_weights();
  const LoadPath p = make_path(PathKind::UT, 1.2, 40);
  WeightSet<D> wd = promote<D>(w);
  wd.g1.w2[4].d[0] = 1.0;
  wd.psi_pe.w2[0].d[1] = 1.0;
  const NetworkModel<D> md(wd);
  const NetworkModel<double> mv(w);
  const auto rd = simulate_path(md, mv, p.history());
  const double h = 1e-6;
  for (int which = 0; which < 2; ++which) {
    WeightSet<double> a = w, b = w;
    double& pa = which == 0 ? a.g1.w2[4] : a.psi_pe.w2[0];
    double& pb = which == 0 ? b.g1.w2[4] : b.psi_pe.w2[0];
    pa += h;
    pb -= h;
    const double ga = simulate_path(NetworkModel<double>(a), p.history()).back().sigma.xx();
    const double gb = simulate_path(NetworkModel<double>(b), p.history()).back().sigma.xx();
    const double ref = (ga - gb) / (2 * h);
    CHECK(rd.back().sigma.xx().d[which] == doctest::Approx(ref).epsilon(1e-5));
  }
}
