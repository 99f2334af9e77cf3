#pragma once

// Material-point time integration: flow directions from the converged stresses
// of the previous step, exponential update of the plastic stretches, elastic
// predictor and a scalar return mapping on the plastic increment.

#include <cmath>
#include <optional>
#include <vector>

#include "icann/constitutive.hpp"

namespace icann {

template <class T>
struct MaterialState {
  SymTensor3<T> Up = SymTensor3<T>::identity();
  SymTensor3<T> Upi = SymTensor3<T>::identity();
};

struct StepOptions {
  double tol_phi = 1e-8;
  int max_iters = 50;
  BoundaryCondition bc = BoundaryCondition::StressFree33;
  // One extra Newton step after convergence, kept when it lowers |Phi|.
  // Makes the converged increment a smoother function of the weights.
  bool polish = true;
  double degenerate_flow = 1e-12;
};

template <class T>
struct StepResult {
  MaterialState<T> state;
  StressSet<T> stresses;   // at the end of the step
  SymTensor3<T> sigma;     // Cauchy stress
  T dlambda{};
  double phi_trial = 0.0;
  double phi_final = 0.0;
  int newton_iters = 0;
  bool bisection = false;      // safeguarded bracketing was used
  bool flow_at_trial = false;  // degenerate flow at t_n, directions taken from the trial state
  DissipationRecord dissipation;           // flows evaluated at the final stresses
  DissipationRecord dissipation_explicit;  // flows actually applied over the step
};

/// Unit-multiplier flow directions (dg1/dGamma, dg2/dTheta) at given stresses.
template <class Model>
std::pair<SymTensor3<typename Model::Scalar>, SymTensor3<typename Model::Scalar>> flow_directions(
    const Model& model, const StressSet<typename Model::Scalar>& s) {
  return {model.flow_p(s), model.flow_pi(s)};
}

/// New stretch sqrt(U exp(2 dlambda D) U). U is returned untouched when the
/// increment or the direction vanishes, which keeps elastic steps drift free.
template <class T>
SymTensor3<T> exp_update(const SymTensor3<T>& u, const T& dlambda, const SymTensor3<T>& dir) {
  bool zero_dir = true;
  for (int k = 0; k < 6; ++k) zero_dir = zero_dir && is_exact_zero(dir[k]);
  if (is_exact_zero(dlambda) || zero_dir) return u;
  const SymTensor3<T> c = congruence(u, sym_exp(dir * (2.0 * dlambda)));
  return spd_sqrt(c);
}

/// Squared stretch U exp(2 dlambda D) U.
template <class T>
SymTensor3<T> exp_update_squared(const SymTensor3<T>& u, const T& dlambda, const SymTensor3<T>& dir) {
  return congruence(u, sym_exp(dir * (2.0 * dlambda)));
}

namespace detail {

template <class Model>
struct Trial {
  using T = typename Model::Scalar;
  MaterialState<T> state;
  StressSet<T> stresses;
  T phi;
};

template <class Model>
Trial<Model> evaluate_increment(const Model& model, const MaterialState<typename Model::Scalar>& state_n,
                                const SymTensor3<typename Model::Scalar>& c_next,
                                const SymTensor3<typename Model::Scalar>& dp, const SymTensor3<typename Model::Scalar>& dpi,
                                const typename Model::Scalar& dlambda, BoundaryCondition bc) {
  Trial<Model> t;
  t.state.Up = exp_update(state_n.Up, dlambda, dp);
  t.state.Upi = exp_update(state_n.Upi, dlambda, dpi);
  t.stresses = compute_stresses(model, corotated_kinematics(c_next, t.state.Up, t.state.Upi), bc);
  t.phi = model.yield(t.stresses);
  return t;
}

struct ScalarSolve {
  double dlambda = 0.0;
  double residual = 0.0;
  int iters = 0;
  bool bisection = false;
};

// Solves r(dl) = 0 on dl >= 0 given r(0) > tol. r is decreasing along the
// explicit flow direction for convex potentials.
template <class F>
ScalarSolve solve_increment(F&& r, double r0, const StepOptions& opt) {
  ScalarSolve out;
  auto derivative = [&](double dl) {
    const double h = std::max(1e-8, 1e-6 * dl);
    return (r(dl + h) - r(dl - h)) / (2.0 * h);
  };

  double dl = 0.0, res = r0;
  int growing_alternations = 0;
  bool newton_ok = false;
  try {
    for (int it = 1; it <= opt.max_iters; ++it) {
      out.iters = it;
      const double dr = derivative(dl);
      if (!(dr < 0.0) || !std::isfinite(dr)) break;
      const double next = std::max(0.0, dl - res / dr);
      const double res_next = r(next);
      if (!std::isfinite(res_next)) break;
      if ((res_next > 0.0) != (res > 0.0) && std::fabs(res_next) > std::fabs(res))
        ++growing_alternations;
      else
        growing_alternations = 0;
      dl = next;
      res = res_next;
      if (std::fabs(res) <= opt.tol_phi) {
        newton_ok = true;
        break;
      }
      if (growing_alternations >= 5) break;
    }
  } catch (const NumericalError&) {
    newton_ok = false;
  }

  if (newton_ok) {
    if (opt.polish) {
      try {
        const double dr = derivative(dl);
        if (dr < 0.0 && std::isfinite(dr)) {
          const double next = std::max(0.0, dl - res / dr);
          const double res_next = r(next);
          if (std::fabs(res_next) < std::fabs(res)) {
            dl = next;
            res = res_next;
          }
        }
      } catch (const NumericalError&) {
      }
    }
    out.dlambda = dl;
    out.residual = res;
    return out;
  }

  // Bracketing fallback: grow the upper end geometrically, then bisect.
  out.bisection = true;
  double lo = 0.0;
  double hi = dl > 0.0 ? 2.0 * dl : 1e-6;
  double r_hi = 0.0;
  int grow = 0;
  for (;; ++grow) {
    if (grow > 200) throw NewtonDivergence("return mapping: no sign change of the yield residual");
    r_hi = r(hi);
    if (!std::isfinite(r_hi)) throw NewtonDivergence("return mapping: non-finite yield residual");
    if (r_hi < 0.0 || std::fabs(r_hi) <= opt.tol_phi) break;
    lo = hi;
    hi *= 2.0;
  }
  if (std::fabs(r_hi) <= opt.tol_phi) {
    out.dlambda = hi;
    out.residual = r_hi;
    return out;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rm = r(mid);
    ++out.iters;
    if (std::fabs(rm) <= opt.tol_phi) {
      out.dlambda = mid;
      out.residual = rm;
      return out;
    }
    if (rm > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-17 * hi) break;
  }
  throw NewtonDivergence("return mapping did not reach the yield tolerance");
}

template <class T>
double norm_value(const SymTensor3<T>& a) {
  return norm(values(a));
}

}  // namespace detail

/// One time step. `model` may use dual numbers; `vmodel` is the same model in
/// double precision and drives the scalar return mapping. With dual numbers the
/// increment's sensitivity follows from the implicit function theorem on Phi = 0.
template <class Model, class ValueModel>
StepResult<typename Model::Scalar> step(const Model& model, const ValueModel& vmodel,
                                        const MaterialState<typename Model::Scalar>& state_n,
                                        const StressSet<typename Model::Scalar>& stresses_n,
                                        const SymTensor3<typename Model::Scalar>& c_next, double dt,
                                        const StepOptions& opt) {
  using T = typename Model::Scalar;
  constexpr bool kDual = ad::is_dual_v<T>;

  auto [dp, dpi] = flow_directions(model, stresses_n);

  StepResult<T> res;
  detail::Trial<Model> trial = detail::evaluate_increment(model, state_n, c_next, dp, dpi, T(0.0), opt.bc);
  res.phi_trial = value_of(trial.phi);
  if (!(std::isfinite(res.phi_trial))) throw NumericalError("non-finite trial yield value");

  if (res.phi_trial <= opt.tol_phi) {
    res.state = trial.state;
    res.stresses = trial.stresses;
    res.dlambda = T(0.0);
    res.phi_final = res.phi_trial;
  } else {
    if (detail::norm_value(dp) < opt.degenerate_flow) {
      std::tie(dp, dpi) = flow_directions(model, trial.stresses);
      res.flow_at_trial = true;
      if (detail::norm_value(dp) < opt.degenerate_flow)
        throw DegenerateFlow("plastic trial state with vanishing flow direction");
    }
    // Scalar problem on value parts.
    const MaterialState<double> vstate{values(state_n.Up), values(state_n.Upi)};
    const Sym3 vc = values(c_next), vdp = values(dp), vdpi = values(dpi);
    auto residual = [&](double dl) {
      return detail::evaluate_increment(vmodel, vstate, vc, vdp, vdpi, dl, opt.bc).phi;
    };
    const detail::ScalarSolve sol = detail::solve_increment(residual, res.phi_trial, opt);
    res.newton_iters = sol.iters;
    res.bisection = sol.bisection;

    if constexpr (kDual) {
      // d(dl)/dw = -Phi_w / Phi_dl at the converged increment.
      const auto at_fixed = detail::evaluate_increment(model, state_n, c_next, dp, dpi, T(sol.dlambda), opt.bc);
      const double h = std::max(1e-8, 1e-6 * sol.dlambda);
      const double phi_dl = (residual(sol.dlambda + h) - residual(sol.dlambda - h)) / (2.0 * h);
      T dl(sol.dlambda);
      for (int i = 0; i < ad::tangent_size<T>::value; ++i) dl.d[i] = -at_fixed.phi.d[i] / phi_dl;
      const auto fin = detail::evaluate_increment(model, state_n, c_next, dp, dpi, dl, opt.bc);
      res.state = fin.state;
      res.stresses = fin.stresses;
      res.dlambda = dl;
      res.phi_final = value_of(fin.phi);
    } else {
      const auto fin = detail::evaluate_increment(model, state_n, c_next, dp, dpi, T(sol.dlambda), opt.bc);
      res.state = fin.state;
      res.stresses = fin.stresses;
      res.dlambda = T(sol.dlambda);
      res.phi_final = value_of(fin.phi);
    }
  }

  res.sigma = cauchy_stress(c_next, res.stresses.S);

  const double dl = value_of(res.dlambda);
  if (dl != 0.0) {
    const double lambda = dl / dt;
    StressSet<double> vs;
    vs.Gamma = values(res.stresses.Gamma);
    vs.Theta = values(res.stresses.Theta);
    vs.Sigma = values(res.stresses.Sigma);
    const auto [fp, fpi] = flow_directions(vmodel, vs);
    res.dissipation = reduced_dissipation(values(res.stresses.Gamma), fp, values(res.stresses.Theta), fpi, lambda);
    res.dissipation_explicit =
        reduced_dissipation(values(res.stresses.Gamma), values(dp), values(res.stresses.Theta), values(dpi), lambda);
  }
  return res;
}

/// Convenience overload for double-precision models starting from scratch.
template <class Model>
StepResult<double> step(const Model& model, const MaterialState<double>& state_n, const Sym3& c_n, const Sym3& c_next,
                        double dt, const StepOptions& opt = {}) {
  const StressSet<double> s_n = compute_stresses(model, corotated_kinematics(c_n, state_n.Up, state_n.Upi), opt.bc);
  return step(model, model, state_n, s_n, c_next, dt, opt);
}

/// Prescribed deformation history (coaxial, diagonal C).
struct DrivingHistory {
  std::vector<double> time;
  std::vector<Sym3> C;
};

/// Folds `step` over the history from a virgin state. The first record is the
/// initial configuration; the result has one entry per later record.
template <class Model, class ValueModel>
std::vector<StepResult<typename Model::Scalar>> simulate_path(const Model& model, const ValueModel& vmodel,
                                                              const DrivingHistory& path, const StepOptions& opt = {}) {
  using T = typename Model::Scalar;
  if (path.time.size() != path.C.size()) throw InvalidPath("time and deformation records differ in length");
  std::vector<StepResult<T>> out;
  if (path.C.empty()) return out;
  out.reserve(path.C.size() - 1);
  auto promote_tensor = [](const Sym3& a) {
    SymTensor3<T> r;
    for (int k = 0; k < 6; ++k) r[k] = T(a[k]);
    return r;
  };
  MaterialState<T> state;
  SymTensor3<T> c_prev = promote_tensor(path.C[0]);
  StressSet<T> s_prev = compute_stresses(model, corotated_kinematics(c_prev, state.Up, state.Upi), opt.bc);
  for (std::size_t i = 1; i < path.C.size(); ++i) {
    const double dt = path.time[i] - path.time[i - 1];
    if (!(dt > 0.0)) throw InvalidPath("time must increase strictly");
    const SymTensor3<T> c_next = promote_tensor(path.C[i]);
    StepResult<T> r = step(model, vmodel, state, s_prev, c_next, dt, opt);
    state = r.state;
    s_prev = r.stresses;
    out.push_back(std::move(r));
  }
  return out;
}

template <class Model>
std::vector<StepResult<double>> simulate_path(const Model& model, const DrivingHistory& path,
                                              const StepOptions& opt = {}) {
  return simulate_path(model, model, path, opt);
}

}  // namespace icann
