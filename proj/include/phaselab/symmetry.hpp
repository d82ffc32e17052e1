#pragma once

#include "phaselab/fem.hpp"
#include "phaselab/geometry.hpp"
#include "phaselab/mesh.hpp"
#include "phaselab/radial.hpp"

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <functional>
#include <stdexcept>
#include <vector>

namespace phaselab {

inline constexpr double kFluxSymmetryTol = 1e-2;
inline constexpr double kRadialityTol = 1e-3;
inline constexpr double kIdentityTol = 5e-3;
inline constexpr int kDefaultAngles = 256;
inline constexpr int kDefaultModes = 16;

struct FluxResidual {
  double mean = 0.0;       ///< candidate constant c
  double deviation = 0.0;  ///< weighted stddev / |mean|, or absolute when flagged
  bool absolute = false;   ///< |mean| < 1e-12
};

FluxResidual flux_residual(const FluxTrace& trace);

/// Angular Fourier coefficients of theta -> f(center + r (cos, sin)) at each radius.
/// a(i, 0) is the circle mean; a(i, k), b(i, k) for k >= 1 use the 2/m normalization.
struct ModeSpectrum {
  std::vector<double> radii;
  int samples = 0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  std::vector<double> mean_square;  ///< (1/m) sum_j f(r, theta_j)^2 per radius
  double energy_nonradial = 0.0;    ///< sum_r r * sum_{k>=1} (a_k^2 + b_k^2)
  double energy_total = 0.0;        ///< same including k = 0

  int k_max() const { return static_cast<int>(a.cols()) - 1; }
  /// Radius-weighted energy of mode k.
  double mode_energy(int k) const;
  double nonradial_ratio() const { return energy_total > 0.0 ? energy_nonradial / energy_total : 0.0; }
};

/// Spectrum of an arbitrary function of the plane; m = max(samples, 4 k_max).
template <typename F>
  requires std::invocable<F&, const Point&>
ModeSpectrum angular_spectrum(F&& f, const Point& center, const std::vector<double>& radii, int k_max,
                              int samples = kDefaultAngles) {
  constexpr double kPi = 3.14159265358979323846;
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const int m = std::max(samples, 4 * k_max);
  ModeSpectrum s;
  s.radii = radii;
  s.samples = m;
  s.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(radii.size()), k_max + 1);
  s.b = s.a;
  std::vector<double> vals(m);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    double sq = 0.0;
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * kPi * j / m;
      vals[j] = f(Point(center.x() + r * std::cos(th), center.y() + r * std::sin(th)));
      sq += vals[j] * vals[j];
    }
    s.mean_square.push_back(sq / m);
    for (int k = 0; k <= k_max; ++k) {
      double ca = 0.0, sb = 0.0;
      for (int j = 0; j < m; ++j) {
        // Reduce k*j mod m so the angle stays in [0, 2pi).
        const double th = 2.0 * kPi * static_cast<double>((static_cast<long>(k) * j) % m) / m;
        ca += vals[j] * std::cos(th);
        sb += vals[j] * std::sin(th);
      }
      const double norm = k == 0 ? 1.0 / m : 2.0 / m;
      s.a(static_cast<Eigen::Index>(i), k) = norm * ca;
      s.b(static_cast<Eigen::Index>(i), k) = k == 0 ? 0.0 : norm * sb;
    }
    for (int k = 0; k <= k_max; ++k) {
      const double e = r * (std::pow(s.a(static_cast<Eigen::Index>(i), k), 2) +
                            std::pow(s.b(static_cast<Eigen::Index>(i), k), 2));
      s.energy_total += e;
      if (k >= 1) s.energy_nonradial += e;
    }
  }
  return s;
}

/// Spectrum of a P1 field sampled by point location and barycentric
/// interpolation. Throws if a sampling circle leaves the mesh.
ModeSpectrum angular_spectrum(const Field& field, const Point& center, const std::vector<double>& radii,
                              int k_max = kDefaultModes, int samples = kDefaultAngles);

struct RadialityVerdict {
  bool radial = true;
  int dominant_mode = 0;  ///< argmax_{k>=1} mode energy, 0 when radial
  double ratio = 0.0;     ///< E_perp / E_total
  bool zero_field = false;
};

RadialityVerdict radiality_verdict(const ModeSpectrum& spectrum, double tol = kRadialityTol);

struct IdentityResidual {
  double value = 0.0;
  bool empty_core = false;
};

/// Normalized defect of sigma grad u = grad q on the core:
/// sum_core area |sigma_e grad u_e - grad q(centroid)|^2 / sum_core area |grad q|^2.
IdentityResidual transmission_identity_residual(const Field& u, const RadialProfiled& q,
                                                const PhaseConfig& config);

/// Flat CSV row and text block of the elliptic diagnostics.
struct DiagnosticsReport {
  FluxResidual flux;
  RadialityVerdict radiality;
  double nonradial_energy = 0.0;
  IdentityResidual identity;
  HypothesisFlags flags;
};

}  // namespace phaselab
