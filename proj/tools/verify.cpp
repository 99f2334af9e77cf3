#include <cmath>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "icann/models.hpp"

namespace icann::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

double max_abs_diff(const Sym3& a, const Sym3& b) {
  double m = 0.0;
  for (int k = 0; k < 6; ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return m;
}

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> u{0.0, 1.0};

  explicit Sampler(std::uint64_t seed) : rng(seed) {}

  double operator()(double lo, double hi) { return lo + (hi - lo) * u(rng); }

  Sym3 sym(double scale) {
    Sym3 a;
    for (int k = 0; k < 6; ++k) a[k] = (*this)(-scale, scale);
    return a;
  }

  // Eigenbasis of a random symmetric tensor with prescribed eigenvalues.
  Sym3 with_eigenvalues(double a, double b, double c) {
    SpectralDecomp sd = spectral_decomposition(sym(1.0));
    return spectral_compose(sd, {a, b, c});
  }

  Sym3 spd(double lo, double hi) { return with_eigenvalues((*this)(lo, hi), (*this)(lo, hi), (*this)(lo, hi)); }

  EnergyWeights<double> energy(bool full) {
    EnergyWeights<double> w;
    w.full_form = full;
    for (int k = 0; k < 2 * w.rows(); ++k) w.w2[k] = (*this)(0.0, 1.0);
    for (int k = 0; k < w.rows(); ++k) w.w1[k] = (*this)(0.0, 0.5);
    w.w3_1 = (*this)(0.0, 1.0);
    w.w3_2 = (*this)(0.0, 1.0);
    return w;
  }

  PotentialWeights<double> potential(bool full) {
    PotentialWeights<double> w;
    w.full_form = full;
    for (int k = 0; k < w.w2_count(); ++k) w.w2[k] = (*this)(0.0, 1.0);
    for (int k = 0; k < w.w1_count(); ++k) w.w1[k] = (*this)(0.0, 0.5);
    return w;
  }
};

PropertyResult spectral_reconstruction(Sampler& s, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    // Every third sample has a repeated eigenvalue.
    const double a = s(0.1, 3.0), b = i % 3 == 0 ? a : s(0.1, 3.0), c = s(0.1, 3.0);
    const Sym3 m = s.with_eigenvalues(a, b, c);
    const SpectralDecomp sd = spectral_decomposition(m);
    worst = std::max(worst, max_abs_diff(sd.reconstruct(), m) / std::max(1.0, norm(m)));
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) {
        double dot = 0.0;
        for (int r = 0; r < 3; ++r) dot += sd.vectors[p][r] * sd.vectors[q][r];
        worst = std::max(worst, std::fabs(dot - (p == q ? 1.0 : 0.0)));
      }
  }
  return {"spectral decomposition reconstructs and is orthonormal", worst <= 1e-12, "max error " + fmt(worst)};
}

PropertyResult energy_normalization(Sampler& s, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto w = s.energy(i % 2 == 0);
    worst = std::max(worst, std::fabs(energy_eval(w, Sym3::identity())));
    worst = std::max(worst, norm(energy_grad(w, Sym3::identity())));
  }
  return {"energies and their gradients vanish at the identity", worst <= 1e-12, "max " + fmt(worst)};
}

PropertyResult potential_evenness(Sampler& s, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto w = s.potential(i % 2 == 0);
    const Sym3 a = s.sym(2.0);
    const double g = potential_eval(w, a);
    worst = std::max(worst, std::fabs(g - potential_eval(w, -a)) / std::max(1.0, std::fabs(g)));
    worst = std::max(worst, std::fabs(potential_eval(w, Sym3::zero())));
  }
  return {"potentials are even and vanish at zero stress", worst <= 1e-12, "max " + fmt(worst)};
}

PropertyResult energy_gradient_fd(Sampler& s, int n) {
  double worst = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < n; ++i) {
    const auto w = s.energy(i % 2 == 0);
    const Sym3 a = s.spd(0.7, 1.4);
    const Sym3 g = energy_grad(w, a);
    for (int k = 0; k < 6; ++k) {
      Sym3 ap = a, am = a;
      ap[k] += h;
      am[k] -= h;
      // Off-diagonal slots represent two symmetric entries.
      const double fd = (energy_eval(w, ap) - energy_eval(w, am)) / (2.0 * h) / (k < 3 ? 1.0 : 2.0);
      worst = std::max(worst, std::fabs(fd - g[k]) / std::max(1e-3, std::fabs(g[k])));
    }
  }
  return {"energy gradients match finite differences", worst <= 1e-6, "max relative " + fmt(worst)};
}

std::vector<LoadPath> test_paths(const json& cfg) {
  std::vector<LoadPath> out;
  for (PathKind k : {PathKind::UT, PathKind::UC, PathKind::EB, PathKind::UTUnl, PathKind::Cyclic})
    out.push_back(make_path(path_spec(cfg, k)));
  return out;
}

PropertyResult kkt_and_dissipation(const json& cfg, const std::vector<LoadPath>& paths) {
  const NetworkModel<double> net(vm_af_equivalent_weights(vm_af_params(cfg)));
  const StepOptions opt = step_options(cfg);
  int violations = 0, steps = 0;
  double min_d = 0.0;
  for (const auto& p : paths)
    for (const auto& r : simulate_path(net, p.history(), opt)) {
      ++steps;
      const bool ok = (r.dlambda == 0.0 && r.phi_final <= 1e-8) || (r.dlambda > 0.0 && std::fabs(r.phi_final) <= 1e-8);
      if (!ok) ++violations;
      min_d = std::min(min_d, r.dissipation.total);
    }
  return {"return mapping satisfies KKT and dissipates", violations == 0 && min_d >= -1e-10,
          std::to_string(steps) + " steps, " + std::to_string(violations) + " violations, min dissipation " + fmt(min_d)};
}

PropertyResult plastic_incompressibility(const json& cfg, const std::vector<LoadPath>& paths) {
  const NetworkModel<double> net(vm_af_equivalent_weights(vm_af_params(cfg)));
  double worst = 0.0;
  for (const auto& p : paths)
    for (const auto& r : simulate_path(net, p.history(), step_options(cfg))) {
      worst = std::max(worst, std::fabs(det(square(r.state.Up)) - 1.0));
      worst = std::max(worst, std::fabs(det(square(r.state.Upi)) - 1.0));
    }
  return {"plastic stretches stay isochoric", worst <= 1e-8, "max |det - 1| " + fmt(worst)};
}

PropertyResult generator_consistency(const json& cfg, const std::vector<LoadPath>& paths) {
  const VmAfParams p = vm_af_params(cfg);
  const NetworkModel<double> net(vm_af_equivalent_weights(p));
  double worst = 0.0;
  for (const auto& path : paths) {
    const Dataset ds = generate_vm_af(p, path, step_options(cfg));
    const Dataset pred = generate_dataset(net, path, step_options(cfg));
    double sq = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) sq += std::pow(ds.sigma11[i] - pred.sigma11[i], 2);
    worst = std::max(worst, std::sqrt(sq / double(ds.size())) / max_abs_stress(ds));
  }
  return {"network equivalent reproduces the generator", worst <= 0.01, "max relative RMS " + fmt(worst)};
}

PropertyResult surface_symmetry(Sampler& s, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto w = s.potential(i % 2 == 0);
    const auto pts = trace_yield_surface(w, StressPlane::P12, 24);
    for (int k = 0; k < 12; ++k) worst = std::max(worst, max_abs_diff(pts[k], -pts[k + 12]));
  }
  return {"traced yield surfaces are point symmetric", worst <= 1e-10, "max deviation " + fmt(worst)};
}

PropertyResult clip_exactness() {
  const double c = 0.01;
  bool ok = true;
  for (double target : {0.0, c / 2, c, 2 * c}) {
    std::vector<double> g{0.6 * target, 0.8 * target};
    const double n = std::sqrt(g[0] * g[0] + g[1] * g[1]);
    const auto clipped = clip_gradient(g, c);
    const double f = n == 0.0 ? 1.0 : std::min(1.0, c / n);
    for (int k = 0; k < 2; ++k) ok = ok && clipped[k] == g[k] * f;
  }
  return {"gradient clipping follows G min(1, c/|G|)", ok, ok ? "bit exact" : "mismatch"};
}

PropertyResult adam_projection(Sampler& s, int n) {
  AdamState st;
  std::vector<double> w(16), g(16);
  for (auto& x : w) x = s(0.0, 0.01);
  bool ok = true;
  for (int i = 0; i < n; ++i) {
    for (auto& x : g) x = s(-1.0, 1.0);
    adam_step(st, w, g, 0.01);
    for (double x : w) ok = ok && x >= 0.0;
  }
  return {"optimizer keeps weights non-negative", ok, std::to_string(n) + " steps"};
}

}  // namespace

std::vector<PropertyResult> run_properties(const json& cfg) {
  const int n = cfg.at("verify").at("samples").get<int>();
  if (n < 1) throw ConfigError("verify.samples must be positive");
  Sampler s(cfg.at("seed").get<std::uint64_t>());
  const auto paths = test_paths(cfg);

  std::vector<PropertyResult> out;
  auto guarded = [&](const std::string& name, auto&& f) {
    try {
      out.push_back(f());
    } catch (const NumericalError& e) {
      out.push_back({name, false, std::string("numerical failure: ") + e.what()});
    }
  };
  guarded("spectral", [&] { return spectral_reconstruction(s, n); });
  guarded("energy normalization", [&] { return energy_normalization(s, n); });
  guarded("potential evenness", [&] { return potential_evenness(s, n); });
  guarded("energy gradient", [&] { return energy_gradient_fd(s, std::max(1, n / 4)); });
  guarded("kkt", [&] { return kkt_and_dissipation(cfg, paths); });
  guarded("incompressibility", [&] { return plastic_incompressibility(cfg, paths); });
  guarded("generator", [&] { return generator_consistency(cfg, paths); });
  guarded("symmetry", [&] { return surface_symmetry(s, std::max(1, n / 20)); });
  guarded("clip", [&] { return clip_exactness(); });
  guarded("adam", [&] { return adam_projection(s, n); });
  return out;
}

}  // namespace icann::cli
