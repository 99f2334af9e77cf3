#pragma once

// Invariant-based feed-forward networks for free energies and plastic
// potentials, with exact first derivatives in their tensor argument.
//
// Energy network (reduced form, rows y in {x1, x2}):
//   psi = sum_r w2[2r] y_r + w2[2r+1] (exp(w1[r] y_r) - 1) + W3
// with x1 = I1~ - 3, x2 = I2~^(3/2) - 3 sqrt(3) and the Ogden volumetric term
//   W3 = w3_2 (I3^w3_1 - 1 - w3_1 ln I3).
// The full form uses the rows {x1, x1^2, x2, x2^2}.
//
// Potential network (reduced form, rows y in {I1, I1^2, J2~}, J2~ = 3 J2):
//   g = sum_r w2[2r] |y_r| + w2[2r+1] ln cosh(w1[r] y_r)
// The full form uses rows {I1, I1^2, J2~, J2~^2}, each with
//   w2[3r] |y| + w2[3r+1] ln cosh(w1[2r] y) + w2[3r+2] (cosh(w1[2r+1] y) - 1).

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "icann/tensor3.hpp"

namespace icann {

template <class T>
struct EnergyWeights {
  bool full_form = false;
  std::array<T, 8> w2{};
  std::array<T, 4> w1{};
  T w3_1{};  // volumetric exponent
  T w3_2{};  // volumetric scale

  int rows() const { return full_form ? 4 : 2; }
};

template <class T>
struct PotentialWeights {
  bool full_form = false;
  std::array<T, 12> w2{};
  std::array<T, 8> w1{};

  int rows() const { return full_form ? 4 : 3; }
  int w2_count() const { return full_form ? 12 : 6; }
  int w1_count() const { return full_form ? 8 : 3; }
};

enum class Group { PsiE = 0, PsiP = 1, PsiPe = 2, G1 = 3, G2 = 4 };
inline constexpr std::array<Group, 5> kAllGroups{Group::PsiE, Group::PsiP, Group::PsiPe, Group::G1, Group::G2};

std::string group_name(Group g);
Group group_from_name(const std::string& name);
inline bool is_energy_group(Group g) { return g == Group::PsiE || g == Group::PsiP || g == Group::PsiPe; }

/// All trainable networks of the model. g1 doubles as the yield potential.
template <class T>
struct WeightSet {
  EnergyWeights<T> psi_e{true};
  EnergyWeights<T> psi_p{};
  EnergyWeights<T> psi_pe{};
  PotentialWeights<T> g1{};
  PotentialWeights<T> g2{};
};

// ---------------------------------------------------------------------------
// Activation guards

inline constexpr double kActivationClamp = 50.0;
inline constexpr double kActivationLimit = 500.0;

namespace detail {

template <class T>
T clamp_activation(const T& x) {
  const double v = value_of(x);
  if (!(std::fabs(v) <= kActivationLimit))
    throw ArgumentOverflow("activation argument " + std::to_string(v) + " outside [-500, 500]");
  if (v > kActivationClamp) return T(kActivationClamp);
  if (v < -kActivationClamp) return T(-kActivationClamp);
  return x;
}

template <class T>
bool clamped(const T& x) {
  return std::fabs(value_of(x)) > kActivationClamp;
}

template <class T>
T sign(const T& x) {
  const double v = value_of(x);
  return T(v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
}

// ln cosh x without overflow.
template <class T>
T log_cosh(const T& x) {
  using std::abs;
  using std::exp;
  using std::log1p;
  const T ax = abs(x);
  return ax + log1p(exp(-2.0 * ax)) - 0.69314718055994530942;
}

// cosh x - 1 without cancellation.
template <class T>
T cosh_m1(const T& x) {
  using std::sinh;
  const T s = sinh(0.5 * x);
  return 2.0 * s * s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Energies

template <class T>
struct EnergyPartials {
  T psi;
  T d_x1;  // d psi / d x1
  T d_x2;  // d psi / d x2
  T d_I3;  // d psi / d I3
};

template <class T>
EnergyPartials<T> energy_partials(const EnergyWeights<T>& w, const T& x1, const T& x2, const T& i3) {
  using std::expm1;
  using std::exp;
  using std::log;
  using std::pow;
  EnergyPartials<T> out{T(0.0), T(0.0), T(0.0), T(0.0)};
  const int rows = w.rows();
  for (int r = 0; r < rows; ++r) {
    // full: rows x1, x1^2, x2, x2^2; reduced: x1, x2
    const bool on_x1 = w.full_form ? (r < 2) : (r == 0);
    const bool squared = w.full_form && (r % 2 == 1);
    const T& base = on_x1 ? x1 : x2;
    const T y = squared ? base * base : base;
    const T dy = squared ? 2.0 * base : T(1.0);
    const T& lin = w.w2[2 * r];
    const T& scale = w.w2[2 * r + 1];
    const T& inner = w.w1[r];
    T dpsi_dy = lin;
    out.psi += lin * y;
    if (!is_exact_zero(scale)) {
      const T arg = detail::clamp_activation(inner * y);
      out.psi += scale * expm1(arg);
      if (!detail::clamped(inner * y)) dpsi_dy += scale * inner * exp(arg);
    }
    if (on_x1)
      out.d_x1 += dpsi_dy * dy;
    else
      out.d_x2 += dpsi_dy * dy;
  }
  if (!is_exact_zero(w.w3_2)) {
    const T p = pow(i3, w.w3_1);
    out.psi += w.w3_2 * (p - 1.0 - w.w3_1 * log(i3));
    out.d_I3 += w.w3_2 * w.w3_1 * (p - 1.0) / i3;
  }
  return out;
}

template <class T>
bool is_active(const EnergyWeights<T>& w) {
  for (int k = 0; k < 2 * w.rows(); ++k)
    if (!is_exact_zero(w.w2[k])) return true;
  return !is_exact_zero(w.w3_2);
}

/// Free energy of one network evaluated at the SPD strain measure A.
template <class T>
T energy_eval(const EnergyWeights<T>& w, const SymTensor3<T>& a) {
  using std::pow;
  using std::sqrt;
  const IsochoricInvariants<T> iso = isochoric_invariants(a);
  const T x1 = iso.I1_bar - 3.0;
  const T x2 = pow(iso.I2_bar, 1.5) - 3.0 * std::sqrt(3.0);
  return energy_partials(w, x1, x2, iso.I3).psi;
}

/// d psi / dA.
template <class T>
SymTensor3<T> energy_grad(const EnergyWeights<T>& w, const SymTensor3<T>& a) {
  using std::cbrt;
  using std::pow;
  using std::sqrt;
  if (!is_active(w)) {
    if (!(value_of(det(a)) > 0.0)) throw NonPositiveDeterminant("energy gradient needs det > 0");
    return SymTensor3<T>::zero();
  }
  const Invariants<T> inv3 = invariants(a);
  if (!(value_of(inv3.I3) > 0.0)) throw NonPositiveDeterminant("energy gradient needs det > 0");
  const T j13 = cbrt(inv3.I3);
  const T j23 = j13 * j13;
  const T i1b = inv3.I1 / j13;
  const T i2b = inv3.I2 / j23;
  const T x1 = i1b - 3.0;
  const T x2 = pow(i2b, 1.5) - 3.0 * std::sqrt(3.0);
  const EnergyPartials<T> d = energy_partials(w, x1, x2, inv3.I3);

  // dI1~/dA = I3^-1/3 (I - I1/3 A^-1)
  // dI2~/dA = I3^-2/3 (I1 I - A - 2 I2/3 A^-1)
  // d(I2~^3/2)/dA = 3/2 sqrt(I2~) dI2~/dA
  // dI3/dA = I3 A^-1
  // The bracketed tensors are formed first so that they vanish exactly at A = I.
  const SymTensor3<T> ai = inv(a);
  SymTensor3<T> t1 = (-inv3.I1 / 3.0) * ai;
  SymTensor3<T> t2 = (-2.0 * inv3.I2 / 3.0) * ai - a;
  for (int k = 0; k < 3; ++k) {
    t1[k] += 1.0;
    t2[k] += inv3.I1;
  }
  const T c1 = d.d_x1 / j13;
  const T c2 = d.d_x2 * 1.5 * sqrt(i2b) / j23;
  SymTensor3<T> g = c1 * t1 + c2 * t2;
  if (!is_exact_zero(d.d_I3)) g += (d.d_I3 * inv3.I3) * ai;
  return g;
}

// ---------------------------------------------------------------------------
// Potentials

template <class T>
struct PotentialPartials {
  T g;
  T d_I1;
  T d_J2s;  // d g / d J2~
};

template <class T>
PotentialPartials<T> potential_partials(const PotentialWeights<T>& w, const T& i1, const T& j2s) {
  using std::abs;
  using std::sinh;
  using std::tanh;
  PotentialPartials<T> out{T(0.0), T(0.0), T(0.0)};
  const int rows = w.rows();
  for (int r = 0; r < rows; ++r) {
    // reduced rows: I1, I1^2, J2~; full rows: I1, I1^2, J2~, J2~^2
    const bool on_i1 = r < 2;
    const bool squared = (r % 2 == 1);
    const T& base = on_i1 ? i1 : j2s;
    const T y = squared ? base * base : base;
    const T dy = squared ? 2.0 * base : T(1.0);
    T dg_dy(0.0);
    if (w.full_form) {
      const T& wa = w.w2[3 * r];
      const T& wl = w.w2[3 * r + 1];
      const T& wc = w.w2[3 * r + 2];
      if (!is_exact_zero(wa)) {
        out.g += wa * abs(y);
        dg_dy += wa * detail::sign(y);
      }
      if (!is_exact_zero(wl)) {
        const T z = w.w1[2 * r] * y;
        out.g += wl * detail::log_cosh(detail::clamp_activation(z));
        if (!detail::clamped(z)) dg_dy += wl * w.w1[2 * r] * tanh(z);
      }
      if (!is_exact_zero(wc)) {
        const T z = w.w1[2 * r + 1] * y;
        out.g += wc * detail::cosh_m1(detail::clamp_activation(z));
        if (!detail::clamped(z)) dg_dy += wc * w.w1[2 * r + 1] * sinh(z);
      }
    } else {
      const T& wa = w.w2[2 * r];
      const T& wl = w.w2[2 * r + 1];
      if (!is_exact_zero(wa)) {
        out.g += wa * abs(y);
        dg_dy += wa * detail::sign(y);
      }
      if (!is_exact_zero(wl)) {
        const T z = w.w1[r] * y;
        out.g += wl * detail::log_cosh(detail::clamp_activation(z));
        if (!detail::clamped(z)) dg_dy += wl * w.w1[r] * tanh(z);
      }
    }
    if (on_i1)
      out.d_I1 += dg_dy * dy;
    else
      out.d_J2s += dg_dy * dy;
  }
  return out;
}

template <class T>
bool is_active(const PotentialWeights<T>& w) {
  for (int k = 0; k < w.w2_count(); ++k)
    if (!is_exact_zero(w.w2[k])) return true;
  return false;
}

/// Potential value g(A); dimensionless when weights absorb the yield normalization.
template <class T>
T potential_eval(const PotentialWeights<T>& w, const SymTensor3<T>& a) {
  const SymTensor3<T> d = dev(a);
  const T j2s = 1.5 * contract(d, d);  // 3 J2
  return potential_partials(w, trace(a), j2s).g;
}

/// dg/dA = dg/dI1 I + dg/dJ2~ 3 dev(A).
template <class T>
SymTensor3<T> potential_flow(const PotentialWeights<T>& w, const SymTensor3<T>& a) {
  if (!is_active(w)) return SymTensor3<T>::zero();
  const SymTensor3<T> d = dev(a);
  const T j2s = 1.5 * contract(d, d);
  T i1 = trace(a);
  // A trace at roundoff level relative to A sits on the |I1| kink (it is
  // exactly zero analytically for isochoric hardening energies).
  if (std::fabs(value_of(i1)) <= 1e-12 * norm(values(a))) {
    if constexpr (ad::is_dual_v<T>)
      i1.v = 0.0;
    else
      i1 = 0.0;
  }
  const PotentialPartials<T> p = potential_partials(w, i1, j2s);
  SymTensor3<T> flow = (3.0 * p.d_J2s) * d;
  flow[0] += p.d_I1;
  flow[1] += p.d_I1;
  flow[2] += p.d_I1;
  return flow;
}

/// Normalized yield function: g_Phi(Gamma) - 1.
template <class T>
T yield_value(const PotentialWeights<T>& w, const SymTensor3<T>& gamma) {
  return potential_eval(w, gamma) - 1.0;
}

// ---------------------------------------------------------------------------
// Flat parameter layout

struct ParamInfo {
  std::string name;    // canonical name, e.g. "psi_e.w2.1"
  Group group;
  bool output_layer;   // second-layer (scaling) weight; subject to regularization
  int stress_power;    // normalized = physical * s^stress_power
};

namespace detail {

template <class T, class F>
void visit_energy(EnergyWeights<T>& w, Group g, F&& f) {
  const std::string pre = group_name(g) + ".";
  for (int k = 0; k < 2 * w.rows(); ++k) f(ParamInfo{pre + "w2." + std::to_string(k + 1), g, true, -1}, w.w2[k]);
  for (int r = 0; r < w.rows(); ++r) {
    const int label = w.full_form ? 2 * r + 2 : r + 1;
    f(ParamInfo{pre + "w1." + std::to_string(label), g, false, 0}, w.w1[r]);
  }
  f(ParamInfo{pre + "w3.1", g, false, 0}, w.w3_1);
  f(ParamInfo{pre + "w3.2", g, true, -1}, w.w3_2);
}

template <class T, class F>
void visit_potential(PotentialWeights<T>& w, Group g, F&& f) {
  const std::string pre = group_name(g) + ".";
  // Stress power of each row input: I1 -> 1, I1^2 -> 2, J2~ -> 2, J2~^2 -> 4.
  constexpr int row_power[4] = {1, 2, 2, 4};
  const int per_row = w.full_form ? 3 : 2;
  for (int k = 0; k < w.w2_count(); ++k) {
    const int r = k / per_row;
    const bool abs_term = (k % per_row) == 0;
    f(ParamInfo{pre + "w2." + std::to_string(k + 1), g, true, abs_term ? row_power[r] : 0}, w.w2[k]);
  }
  const int w1_per_row = w.full_form ? 2 : 1;
  for (int k = 0; k < w.w1_count(); ++k)
    f(ParamInfo{pre + "w1." + std::to_string(k + 1), g, false, row_power[k / w1_per_row]}, w.w1[k]);
}

}  // namespace detail

/// Calls f(const ParamInfo&, T&) for every weight in canonical order.
template <class T, class F>
void for_each_weight(WeightSet<T>& ws, F&& f) {
  detail::visit_energy(ws.psi_e, Group::PsiE, f);
  detail::visit_energy(ws.psi_p, Group::PsiP, f);
  detail::visit_energy(ws.psi_pe, Group::PsiPe, f);
  detail::visit_potential(ws.g1, Group::G1, f);
  detail::visit_potential(ws.g2, Group::G2, f);
}

template <class T, class F>
void for_each_weight(const WeightSet<T>& ws, F&& f) {
  auto& mutable_ws = const_cast<WeightSet<T>&>(ws);
  for_each_weight(mutable_ws, [&](const ParamInfo& info, T& w) { f(info, static_cast<const T&>(w)); });
}

std::vector<ParamInfo> parameter_layout(const WeightSet<double>& ws);
std::vector<double> flatten(const WeightSet<double>& ws);
void unflatten(WeightSet<double>& ws, const std::vector<double>& flat);

/// Express weights in units where stresses are divided by `scale`.
WeightSet<double> to_normalized(const WeightSet<double>& ws, double scale);
WeightSet<double> from_normalized(const WeightSet<double>& ws, double scale);

/// Flat JSON object of canonical names. Network forms are inferred on load.
nlohmann::json weights_to_json(const WeightSet<double>& ws);
WeightSet<double> weights_from_json(const nlohmann::json& j);
void save_weights(const WeightSet<double>& ws, const std::string& path);
WeightSet<double> load_weights(const std::string& path);

/// Promote double weights to another scalar type (tangents zero).
template <class T>
WeightSet<T> promote(const WeightSet<double>& ws) {
  WeightSet<T> out;
  out.psi_e.full_form = ws.psi_e.full_form;
  out.psi_p.full_form = ws.psi_p.full_form;
  out.psi_pe.full_form = ws.psi_pe.full_form;
  out.g1.full_form = ws.g1.full_form;
  out.g2.full_form = ws.g2.full_form;
  std::vector<double> flat = flatten(ws);
  std::size_t i = 0;
  for_each_weight(out, [&](const ParamInfo&, T& w) { w = T(flat[i++]); });
  return out;
}

template <class T>
WeightSet<double> values(const WeightSet<T>& ws) {
  WeightSet<double> out;
  out.psi_e.full_form = ws.psi_e.full_form;
  out.psi_p.full_form = ws.psi_p.full_form;
  out.psi_pe.full_form = ws.psi_pe.full_form;
  out.g1.full_form = ws.g1.full_form;
  out.g2.full_form = ws.g2.full_form;
  std::vector<double> flat;
  for_each_weight(ws, [&](const ParamInfo&, const T& w) { flat.push_back(value_of(w)); });
  unflatten(out, flat);
  return out;
}

}  // namespace icann
