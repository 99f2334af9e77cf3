#pragma once

#include "icann/constitutive.hpp"
#include "icann/netfuncs.hpp"

namespace icann {

/// Network-based material: energies psi_e, psi_p, psi_pe; yield and flow
/// from g1 (associative), hardening flow from g2 driven by Theta.
template <class T>
class NetworkModel {
public:
  using Scalar = T;

  explicit NetworkModel(WeightSet<T> ws) : ws_(std::move(ws)) {}

  const WeightSet<T>& weights() const { return ws_; }

  SymTensor3<T> dpsi_e(const SymTensor3<T>& ce) const { return energy_grad(ws_.psi_e, ce); }
  SymTensor3<T> dpsi_p(const SymTensor3<T>& cp) const { return energy_grad(ws_.psi_p, cp); }
  SymTensor3<T> dpsi_pe(const SymTensor3<T>& bpe) const { return energy_grad(ws_.psi_pe, bpe); }

  T yield(const StressSet<T>& s) const { return yield_value(ws_.g1, s.Gamma); }
  SymTensor3<T> flow_p(const StressSet<T>& s) const { return potential_flow(ws_.g1, s.Gamma); }
  SymTensor3<T> flow_pi(const StressSet<T>& s) const { return potential_flow(ws_.g2, s.Theta); }

  /// Same model in double precision (tangents dropped).
  NetworkModel<double> value_model() const { return NetworkModel<double>(values(ws_)); }

private:
  WeightSet<T> ws_;
};

}  // namespace icann
