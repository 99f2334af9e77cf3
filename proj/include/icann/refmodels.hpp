#pragma once

// Load paths, analytic reference models used as data generators, datasets and
// yield-surface tracing.

#include <string>
#include <utility>
#include <vector>

#include "icann/integrator.hpp"
#include "icann/netfuncs.hpp"

namespace icann {

// ---------------------------------------------------------------------------
// Load paths

enum class PathKind { UT, UC, EB, UTUnl, Cyclic, Custom };

std::string path_kind_name(PathKind k);
PathKind path_kind_from_name(const std::string& name);

struct PathSpec {
  PathKind kind = PathKind::UT;
  double amplitude = 1.3;              // peak axial stretch (tension side for cyclic)
  double amplitude_compression = 0.85; // cyclic only
  int steps_per_ramp = 200;
  int n_cycles = 1;
  double dt = 1.0;
};

/// Default amplitudes: UT/EB/UT-unl 1.3, UC 0.8, cyclic 1.25 / 0.85.
PathSpec default_path(PathKind kind);

struct LoadPath {
  PathKind kind = PathKind::Custom;
  std::vector<double> time;
  std::vector<double> stretch;  // axial stretch
  std::vector<Sym3> C;
  DrivingHistory history() const { return {time, C}; }
};

/// Coaxial incompressible right Cauchy-Green tensor for an axial stretch.
Sym3 driving_tensor(PathKind kind, double stretch);

LoadPath make_path(const PathSpec& spec);
LoadPath make_path(PathKind kind, double amplitude, int n_steps, int n_cycles = 1, double dt = 1.0);
/// Path through explicit stretch values, uniaxial unless kind says otherwise.
LoadPath make_custom_path(const std::vector<double>& stretches, double dt = 1.0, PathKind lateral = PathKind::UT);

// ---------------------------------------------------------------------------
// Analytic reference models

enum class HardeningMeasure { ElasticHardeningStretch, PlasticStretch };  // Bpe_bar or Cp
enum class HardeningDriver { Theta, Gamma };

struct VmAfParams {
  double mu = 12.5;       // shear modulus
  double K = 25.0;        // bulk modulus
  double sigma_y0 = 2.0;  // initial yield stress
  double c = 8.5;         // hardening modulus
  double b = 3.0;         // dynamic recovery
  HardeningMeasure hardening_on = HardeningMeasure::ElasticHardeningStretch;
  HardeningDriver recovery_driver = HardeningDriver::Theta;
};

/// Neo-Hookean elasticity, quadratic von Mises yield and Armstrong-Frederick
/// type kinematic hardening.
class VonMisesAfModel {
public:
  using Scalar = double;
  explicit VonMisesAfModel(const VmAfParams& p) : p_(p) {}

  Sym3 dpsi_e(const Sym3& ce) const;
  Sym3 dpsi_p(const Sym3& cp) const;
  Sym3 dpsi_pe(const Sym3& bpe) const;
  double yield(const StressSet<double>& s) const;  // 3 J2(Gamma) - sigma_y0^2
  Sym3 flow_p(const StressSet<double>& s) const;   // 3 dev(Gamma)
  Sym3 flow_pi(const StressSet<double>& s) const;  // b dev(Theta) or b dev(Gamma)
  const VonMisesAfModel& value_model() const { return *this; }
  const VmAfParams& params() const { return p_; }

private:
  VmAfParams p_;
};

struct TschoeglParams {
  double mu = 12.5;      // MPa
  double K = 25.0;       // MPa
  double sigma_t = 2.0;  // tensile yield stress
  double sigma_c = 4.0;  // compressive yield stress
};

/// Compressible Neo-Hookean elasticity with the paraboloid yield
/// 3 J2 + (sigma_c - sigma_t) I1 - sigma_c sigma_t, perfectly plastic.
class TschoeglModel {
public:
  using Scalar = double;
  explicit TschoeglModel(const TschoeglParams& p) : p_(p) {}

  Sym3 dpsi_e(const Sym3& ce) const;
  Sym3 dpsi_p(const Sym3&) const { return Sym3::zero(); }
  Sym3 dpsi_pe(const Sym3&) const { return Sym3::zero(); }
  double yield(const StressSet<double>& s) const;
  Sym3 flow_p(const StressSet<double>& s) const;
  Sym3 flow_pi(const StressSet<double>&) const { return Sym3::zero(); }
  const TschoeglModel& value_model() const { return *this; }

private:
  TschoeglParams p_;
};

/// Network weights reproducing the von Mises / Armstrong-Frederick model.
WeightSet<double> vm_af_equivalent_weights(const VmAfParams& p);

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
  std::string name;
  std::vector<double> time;
  std::vector<Sym3> C;           // diagonal
  std::vector<double> sigma11;   // observed axial Cauchy stress
  double normalization = 1.0;    // max |sigma11|
  std::vector<std::pair<std::string, std::string>> provenance;

  std::size_t size() const { return time.size(); }
  DrivingHistory history() const { return {time, C}; }
  void validate() const;
};

/// Largest |sigma11| over the records, 1 when all vanish.
double max_abs_stress(const Dataset& ds);

/// Simulates the model along the path; the first record is the unloaded state.
template <class Model>
Dataset generate_dataset(const Model& model, const LoadPath& path, const StepOptions& opt = {}) {
  Dataset ds;
  ds.time = path.time;
  ds.C = path.C;
  ds.sigma11.assign(path.C.size(), 0.0);
  const auto res = simulate_path(model, model.value_model(), path.history(), opt);
  for (std::size_t i = 0; i < res.size(); ++i) ds.sigma11[i + 1] = value_of(res[i].sigma.xx());
  ds.normalization = max_abs_stress(ds);
  return ds;
}

Dataset generate_vm_af(const VmAfParams& params, const LoadPath& path, const StepOptions& opt = {});
Dataset generate_tschoegl(const TschoeglParams& params, const LoadPath& path, const StepOptions& opt = {});

void save_dataset(const Dataset& ds, const std::string& file);
Dataset load_dataset(const std::string& file);
Dataset parse_dataset(const std::string& text, const std::string& name = "");
std::string format_dataset(const Dataset& ds);

// ---------------------------------------------------------------------------
// Yield surfaces

enum class StressPlane { P12, P13, P23 };
StressPlane stress_plane_from_name(const std::string& name);

struct TraceOptions {
  double cap = 1e6;
  double tol = 1e-10;
};

/// Crossing g = 1 along a ray through the origin in diagonal stress space.
/// Throws UnboundedSurface if g stays below 1 up to the cap.
double ray_crossing(const PotentialWeights<double>& w, const Sym3& direction, const TraceOptions& opt = {});

/// n_rays crossings in a coordinate plane of diagonal stress space. For even
/// n_rays the second half of the ray directions are exact negations of the
/// first half.
std::vector<Sym3> trace_yield_surface(const PotentialWeights<double>& w, StressPlane plane, int n_rays,
                                      const TraceOptions& opt = {});

/// Crossings on a latitude-longitude grid of principal-stress directions
/// (upper hemisphere followed by the negated directions).
std::vector<Sym3> trace_yield_surface_3d(const PotentialWeights<double>& w, int n_polar, int n_azimuth,
                                         const TraceOptions& opt = {});

}  // namespace icann
