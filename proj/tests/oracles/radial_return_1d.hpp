#pragma once

// Small-strain one-dimensional elastoplasticity with linear kinematic
// hardening, integrated by radial return. Axial strain e = stretch - 1,
// Young's modulus E = 3 mu for an incompressible solid.

#include <cmath>
#include <vector>

namespace oracle {

struct RadialReturn1d {
  double E = 37.5;
  double sigma_y = 2.0;
  double H = 0.0;  // kinematic hardening modulus

  double eps_p = 0.0;
  double back = 0.0;

  double update(double eps) {
    const double trial = E * (eps - eps_p);
    const double xi = trial - back;
    const double f = std::fabs(xi) - sigma_y;
    if (f <= 0.0) return trial;
    const double s = xi > 0.0 ? 1.0 : -1.0;
    const double dgamma = f / (E + H);
    eps_p += dgamma * s;
    back += H * dgamma * s;
    return E * (eps - eps_p);
  }
};

inline std::vector<double> axial_stress(const std::vector<double>& stretch, double mu, double sigma_y,
                                        double H = 0.0) {
  RadialReturn1d m;
  m.E = 3.0 * mu;
  m.sigma_y = sigma_y;
  m.H = H;
  std::vector<double> out;
  out.reserve(stretch.size());
  for (double l : stretch) out.push_back(m.update(l - 1.0));
  return out;
}

}  // namespace oracle
