#include "icann/refmodels.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace icann {

namespace {

constexpr double kPi = 3.14159265358979323846;

// d(I1 / I3^(1/3)) / dA
Sym3 d_isochoric_trace(const Sym3& a) {
  const double i3 = det(a);
  if (!(i3 > 0.0)) throw NonPositiveDeterminant("reference model: det <= 0");
  Sym3 g = (-trace(a) / 3.0) * inv(a);
  g[0] += 1.0;
  g[1] += 1.0;
  g[2] += 1.0;
  return g / std::cbrt(i3);
}

Sym3 neo_hooke_grad(double mu, double bulk, const Sym3& a) {
  const double i3 = det(a);
  return 0.5 * mu * d_isochoric_trace(a) + (0.25 * bulk * (i3 - 1.0)) * inv(a);
}

double three_j2(const Sym3& a) {
  const Sym3 d = dev(a);
  return 1.5 * contract(d, d);
}

}  // namespace

std::string path_kind_name(PathKind k) {
  switch (k) {
    case PathKind::UT: return "UT";
    case PathKind::UC: return "UC";
    case PathKind::EB: return "EB";
    case PathKind::UTUnl: return "UT-unl";
    case PathKind::Cyclic: return "Cyc";
    case PathKind::Custom: return "custom";
  }
  return "?";
}

PathKind path_kind_from_name(const std::string& name) {
  if (name == "UT") return PathKind::UT;
  if (name == "UC") return PathKind::UC;
  if (name == "EB") return PathKind::EB;
  if (name == "UT-unl" || name == "UTunl" || name == "UT_unl") return PathKind::UTUnl;
  if (name == "Cyc" || name == "cyclic" || name == "Cyclic") return PathKind::Cyclic;
  throw InvalidPath("unknown load case '" + name + "' (expected UT, UC, EB, UT-unl, Cyc)");
}

PathSpec default_path(PathKind kind) {
  PathSpec s;
  s.kind = kind;
  switch (kind) {
    case PathKind::UC: s.amplitude = 0.8; break;
    case PathKind::Cyclic:
      s.amplitude = 1.25;
      s.amplitude_compression = 0.85;
      break;
    default: s.amplitude = 1.3; break;
  }
  return s;
}

Sym3 driving_tensor(PathKind kind, double stretch) {
  if (!(stretch > 0.0) || !std::isfinite(stretch)) throw InvalidPath("axial stretch must be positive");
  if (kind == PathKind::EB) {
    const double l2 = stretch * stretch;
    return Sym3::diag(l2, l2, 1.0 / (l2 * l2));
  }
  const double lat = 1.0 / stretch;
  return Sym3::diag(stretch * stretch, lat, lat);
}

LoadPath make_path(const PathSpec& spec) {
  if (spec.steps_per_ramp < 10) throw InvalidPath("a ramp needs at least 10 steps");
  if (!(spec.amplitude > 0.0) || !(spec.dt > 0.0)) throw InvalidPath("amplitude and time step must be positive");
  std::vector<double> targets;
  switch (spec.kind) {
    case PathKind::UT:
    case PathKind::UC:
    case PathKind::EB: targets = {spec.amplitude}; break;
    case PathKind::UTUnl: targets = {spec.amplitude, 1.0}; break;
    case PathKind::Cyclic:
      if (spec.n_cycles < 1) throw InvalidPath("cyclic path needs at least one cycle");
      if (!(spec.amplitude_compression > 0.0)) throw InvalidPath("compression amplitude must be positive");
      for (int c = 0; c < spec.n_cycles; ++c) {
        targets.push_back(spec.amplitude);
        targets.push_back(spec.amplitude_compression);
      }
      break;
    case PathKind::Custom: throw InvalidPath("custom paths are built from explicit stretches");
  }
  LoadPath p;
  p.kind = spec.kind;
  double from = 1.0;
  p.stretch.push_back(1.0);
  for (double to : targets) {
    for (int i = 1; i <= spec.steps_per_ramp; ++i) {
      // Endpoint assigned exactly.
      const double s = i == spec.steps_per_ramp ? to : from + (to - from) * (double(i) / spec.steps_per_ramp);
      p.stretch.push_back(s);
    }
    from = to;
  }
  for (std::size_t i = 0; i < p.stretch.size(); ++i) {
    p.time.push_back(spec.dt * double(i));
    p.C.push_back(driving_tensor(spec.kind, p.stretch[i]));
  }
  return p;
}

LoadPath make_path(PathKind kind, double amplitude, int n_steps, int n_cycles, double dt) {
  PathSpec s = default_path(kind);
  s.amplitude = amplitude;
  s.steps_per_ramp = n_steps;
  s.n_cycles = n_cycles;
  s.dt = dt;
  return make_path(s);
}

LoadPath make_custom_path(const std::vector<double>& stretches, double dt, PathKind lateral) {
  if (stretches.size() < 2) throw InvalidPath("custom path needs at least two records");
  LoadPath p;
  p.kind = PathKind::Custom;
  p.stretch = stretches;
  for (std::size_t i = 0; i < stretches.size(); ++i) {
    p.time.push_back(dt * double(i));
    p.C.push_back(driving_tensor(lateral, stretches[i]));
  }
  return p;
}

// ---------------------------------------------------------------------------

Sym3 VonMisesAfModel::dpsi_e(const Sym3& ce) const { return neo_hooke_grad(p_.mu, p_.K, ce); }

Sym3 VonMisesAfModel::dpsi_p(const Sym3& cp) const {
  if (p_.c == 0.0 || p_.hardening_on != HardeningMeasure::PlasticStretch) return Sym3::zero();
  return 0.5 * p_.c * d_isochoric_trace(cp);
}

Sym3 VonMisesAfModel::dpsi_pe(const Sym3& bpe) const {
  if (p_.c == 0.0 || p_.hardening_on != HardeningMeasure::ElasticHardeningStretch) return Sym3::zero();
  return 0.5 * p_.c * d_isochoric_trace(bpe);
}

double VonMisesAfModel::yield(const StressSet<double>& s) const {
  return three_j2(s.Gamma) - p_.sigma_y0 * p_.sigma_y0;
}

Sym3 VonMisesAfModel::flow_p(const StressSet<double>& s) const { return 3.0 * dev(s.Gamma); }

Sym3 VonMisesAfModel::flow_pi(const StressSet<double>& s) const {
  if (p_.b == 0.0) return Sym3::zero();
  return p_.b * dev(p_.recovery_driver == HardeningDriver::Theta ? s.Theta : s.Gamma);
}

Sym3 TschoeglModel::dpsi_e(const Sym3& ce) const { return neo_hooke_grad(p_.mu, p_.K, ce); }

double TschoeglModel::yield(const StressSet<double>& s) const {
  return three_j2(s.Gamma) + (p_.sigma_c - p_.sigma_t) * trace(s.Gamma) - p_.sigma_c * p_.sigma_t;
}

Sym3 TschoeglModel::flow_p(const StressSet<double>& s) const {
  Sym3 f = 3.0 * dev(s.Gamma);
  const double v = p_.sigma_c - p_.sigma_t;
  f[0] += v;
  f[1] += v;
  f[2] += v;
  return f;
}

WeightSet<double> vm_af_equivalent_weights(const VmAfParams& p) {
  WeightSet<double> ws;
  ws.psi_e.w2[0] = 0.5 * p.mu;
  ws.psi_e.w3_1 = 1.0;
  ws.psi_e.w3_2 = 0.25 * p.K;
  ws.g1.w2[4] = 1.0 / (p.sigma_y0 * p.sigma_y0);
  if (p.hardening_on == HardeningMeasure::PlasticStretch)
    ws.psi_p.w2[0] = 0.5 * p.c;
  else
    ws.psi_pe.w2[0] = 0.5 * p.c;
  // Same ratio of hardening to plastic flow as the quadratic forms:
  // b dev(Theta) / 3 dev(Gamma) with the yield scaled by 1/sigma_y0^2.
  ws.g2.w2[4] = p.b / (3.0 * p.sigma_y0 * p.sigma_y0);
  return ws;
}

// ---------------------------------------------------------------------------

double max_abs_stress(const Dataset& ds) {
  double m = 0.0;
  for (double s : ds.sigma11) m = std::max(m, std::fabs(s));
  return m > 0.0 ? m : 1.0;
}

void Dataset::validate() const {
  if (time.size() != C.size() || time.size() != sigma11.size())
    throw ValidationError("dataset columns differ in length");
  if (time.size() < 2) throw ValidationError("dataset needs at least two records");
  for (std::size_t i = 1; i < time.size(); ++i)
    if (!(time[i] > time[i - 1]))
      throw ValidationError("time is not strictly increasing at record " + std::to_string(i + 1));
  for (const Sym3& c : C)
    if (!is_spd(c)) throw ValidationError("deformation record is not positive definite");
  if (!(normalization > 0.0)) throw ValidationError("normalization factor must be positive");
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset generate_vm_af(const VmAfParams& params, const LoadPath& path, const StepOptions& opt) {
  for (double v : {params.mu, params.K, params.sigma_y0})
    if (!(v > 0.0)) throw ValidationError("generator moduli and yield stress must be positive");
  if (params.c < 0.0 || params.b < 0.0) throw ValidationError("hardening parameters must be non-negative");
  Dataset ds = generate_dataset(VonMisesAfModel(params), path, opt);
  ds.name = path_kind_name(path.kind);
  ds.provenance = {{"generator", "vm_af"},
                   {"mu", fmt(params.mu)},
                   {"K", fmt(params.K)},
                   {"sigma_y0", fmt(params.sigma_y0)},
                   {"c", fmt(params.c)},
                   {"b", fmt(params.b)},
                   {"hardening_on", params.hardening_on == HardeningMeasure::PlasticStretch ? "Cp" : "Bpe"},
                   {"recovery_driver", params.recovery_driver == HardeningDriver::Theta ? "Theta" : "Gamma"},
                   {"case", path_kind_name(path.kind)}};
  return ds;
}

Dataset generate_tschoegl(const TschoeglParams& params, const LoadPath& path, const StepOptions& opt) {
  for (double v : {params.mu, params.K, params.sigma_t, params.sigma_c})
    if (!(v > 0.0)) throw ValidationError("generator parameters must be positive");
  Dataset ds = generate_dataset(TschoeglModel(params), path, opt);
  ds.name = path_kind_name(path.kind);
  ds.provenance = {{"generator", "tschoegl"},     {"mu", fmt(params.mu)},
                   {"K", fmt(params.K)},          {"sigma_t", fmt(params.sigma_t)},
                   {"sigma_c", fmt(params.sigma_c)}, {"case", path_kind_name(path.kind)}};
  return ds;
}

// ---------------------------------------------------------------------------

StressPlane stress_plane_from_name(const std::string& name) {
  if (name == "12" || name == "s11-s22") return StressPlane::P12;
  if (name == "13" || name == "s11-s33") return StressPlane::P13;
  if (name == "23" || name == "s22-s33") return StressPlane::P23;
  throw ConfigError("unknown stress plane '" + name + "' (expected 12, 13 or 23)");
}

double ray_crossing(const PotentialWeights<double>& w, const Sym3& direction, const TraceOptions& opt) {
  auto g = [&](double s) {
    try {
      return potential_eval(w, s * direction);
    } catch (const ArgumentOverflow&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < 1.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > opt.cap) throw UnboundedSurface("potential stays below 1 along a ray up to the cap");
  }
  double best = hi, best_err = std::fabs(g(hi) - 1.0);
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double v = g(mid);
    const double err = std::fabs(v - 1.0);
    if (err < best_err) {
      best = mid;
      best_err = err;
    }
    if (err <= opt.tol) return mid;
    if (v < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return best;
}

std::vector<Sym3> trace_yield_surface(const PotentialWeights<double>& w, StressPlane plane, int n_rays,
                                      const TraceOptions& opt) {
  if (n_rays < 2) throw ConfigError("need at least two rays");
  const int ia = plane == StressPlane::P23 ? 1 : 0;
  const int ib = plane == StressPlane::P12 ? 1 : 2;
  auto direction = [&](int k) {
    const double th = 2.0 * kPi * double(k) / double(n_rays);
    Sym3 d;
    d[ia] = std::cos(th);
    d[ib] = std::sin(th);
    return d;
  };
  // For even counts the second half of the directions are exact negations of
  // the first half; every crossing is still bisected on its own.
  std::vector<Sym3> pts(n_rays);
  const int half = n_rays / 2;
  for (int k = 0; k < n_rays; ++k) {
    const Sym3 d = n_rays % 2 == 0 && k >= half ? -direction(k - half) : direction(k);
    pts[k] = ray_crossing(w, d, opt) * d;
  }
  return pts;
}

std::vector<Sym3> trace_yield_surface_3d(const PotentialWeights<double>& w, int n_polar, int n_azimuth,
                                         const TraceOptions& opt) {
  if (n_polar < 2 || n_azimuth < 3) throw ConfigError("3D trace needs n_polar >= 2 and n_azimuth >= 3");
  std::vector<Sym3> dirs;
  const int upper = (n_polar + 1) / 2;
  for (int i = 0; i < upper; ++i) {
    const double th = kPi * (double(i) + 0.5) / double(n_polar);
    for (int j = 0; j < n_azimuth; ++j) {
      const double ph = 2.0 * kPi * double(j) / double(n_azimuth);
      dirs.push_back(Sym3::diag(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)));
    }
  }
  const std::size_t n = dirs.size();
  for (std::size_t k = 0; k < n; ++k) dirs.push_back(-dirs[k]);
  std::vector<Sym3> pts;
  pts.reserve(dirs.size());
  for (const Sym3& d : dirs) pts.push_back(ray_crossing(w, d, opt) * d);
  return pts;
}

}  // namespace icann
