#pragma once

// Co-rotated kinematics and the stress-like state relations.
//
// A material model M supplies
//   dpsi_e(Ce_bar), dpsi_p(Cp), dpsi_pe(Bpe_bar)   energy derivatives
//   yield(StressSet), flow_p(StressSet), flow_pi(StressSet)
// for a scalar type M::Scalar. Networks and the analytic reference models
// share this interface, so the same integrator drives both.

#include "icann/tensor3.hpp"

namespace icann {

enum class BoundaryCondition {
  None,        // no constraint, p = 0
  StressFree33 // coaxial loading with S33 = 0 enforced through the pressure
};

template <class T>
struct KinematicSet {
  SymTensor3<T> C, Up, Upi;
  SymTensor3<T> Up_inv;
  SymTensor3<T> Ce_bar;   // Up^-1 C Up^-1
  SymTensor3<T> Cp;       // Up^2
  SymTensor3<T> Bpe_bar;  // Up Upi^-2 Up
};

template <class T>
struct StressSet {
  SymTensor3<T> S;      // second Piola-Kirchhoff
  SymTensor3<T> Sigma;  // Mandel
  SymTensor3<T> Chi;    // linear backstress
  SymTensor3<T> Xi;     // nonlinear backstress
  SymTensor3<T> Gamma;  // relative stress
  SymTensor3<T> Theta;  // hardening Mandel stress
  T p{};                // hydrostatic pressure
};

struct DissipationRecord {
  double total = 0.0;
  double relative_part = 0.0;   // lambda Gamma : Dp
  double hardening_part = 0.0;  // lambda Theta : Dpi
};

template <class T>
KinematicSet<T> corotated_kinematics(const SymTensor3<T>& c, const SymTensor3<T>& up, const SymTensor3<T>& upi) {
  if (!is_spd(c)) throw NotPositiveDefinite("right Cauchy-Green tensor is not positive definite");
  if (!is_spd(up) || !is_spd(upi)) throw NotPositiveDefinite("plastic stretch is not positive definite");
  KinematicSet<T> k;
  k.C = c;
  k.Up = up;
  k.Upi = upi;
  k.Up_inv = inv(up);
  k.Ce_bar = congruence(k.Up_inv, c);
  k.Cp = square(up);
  k.Bpe_bar = congruence(up, inv(square(upi)));
  return k;
}

/// Pressure making S33 vanish: p = -S33 / (2 det(C) (C^-1)_33).
template <class T>
T solve_pressure(const SymTensor3<T>& s_nopress, const SymTensor3<T>& c) {
  const SymTensor3<T> ci = inv(c);
  const T denom = 2.0 * det(c) * ci.zz();
  if (value_of(denom) == 0.0) throw SingularTensor("pressure solve: (C^-1)_33 vanishes");
  return -s_nopress.zz() / denom;
}

template <class Model>
StressSet<typename Model::Scalar> compute_stresses(const Model& model, const KinematicSet<typename Model::Scalar>& k,
                                                   BoundaryCondition bc) {
  using T = typename Model::Scalar;
  StressSet<T> s;
  const SymTensor3<T> de = model.dpsi_e(k.Ce_bar);
  s.S = congruence(k.Up_inv, de) * 2.0;
  // Isotropic energies give coaxial derivatives, so Ce_bar dpsi is symmetric.
  s.Sigma = commuting_product(k.Ce_bar, de) * 2.0;
  s.p = T(0.0);
  if (bc == BoundaryCondition::StressFree33) {
    s.p = solve_pressure(s.S, k.C);
    const T dc = det(k.C);
    s.S += (2.0 * s.p * dc) * inv(k.C);
    const T sph = 2.0 * s.p * dc;
    s.Sigma[0] += sph;
    s.Sigma[1] += sph;
    s.Sigma[2] += sph;
  }
  s.Chi = commuting_product(model.dpsi_p(k.Cp), k.Cp) * 2.0;
  const SymTensor3<T> dpe = model.dpsi_pe(k.Bpe_bar);
  s.Xi = commuting_product(dpe, k.Bpe_bar) * 2.0;
  s.Theta = congruence(inv(k.Upi), congruence(k.Up, dpe)) * 2.0;
  s.Gamma = s.Sigma - s.Chi - s.Xi;
  return s;
}

/// D_red = lambda (Gamma : Dp_dir + Theta : Dpi_dir).
inline DissipationRecord reduced_dissipation(const Sym3& gamma, const Sym3& dp_dir, const Sym3& theta,
                                             const Sym3& dpi_dir, double lambda) {
  DissipationRecord d;
  if (lambda == 0.0) return d;
  d.relative_part = lambda * contract(gamma, dp_dir);
  d.hardening_part = lambda * contract(theta, dpi_dir);
  d.total = d.relative_part + d.hardening_part;
  return d;
}

/// Cauchy stress for coaxial loading: F = C^1/2, sigma = F S F / det F.
template <class T>
SymTensor3<T> cauchy_stress(const SymTensor3<T>& c, const SymTensor3<T>& s) {
  const SymTensor3<T> f = spd_sqrt(c);
  return congruence(f, s) / det(f);
}

}  // namespace icann
