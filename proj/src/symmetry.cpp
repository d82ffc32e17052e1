#include "phaselab/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phaselab {

FluxResidual flux_residual(const FluxTrace& trace) {
  if (trace.flux.empty()) throw std::invalid_argument("empty flux trace");
  FluxResidual r;
  r.mean = trace.mean;
  if (std::abs(trace.mean) < 1e-12) {
    r.absolute = true;
    r.deviation = trace.stddev;
  } else {
    r.deviation = trace.stddev / std::abs(trace.mean);
  }
  return r;
}

double ModeSpectrum::mode_energy(int k) const {
  double e = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    e += radii[i] * (a(row, k) * a(row, k) + b(row, k) * b(row, k));
  }
  return e;
}

ModeSpectrum angular_spectrum(const Field& field, const Point& center, const std::vector<double>& radii,
                              int k_max, int samples) {
  const PointLocator locator(*field.mesh);
  const auto& tris = field.mesh->triangles;
  return angular_spectrum(
      [&](const Point& p) {
        const auto loc = locator.locate(p);
        if (!loc) throw std::domain_error("sampling circle leaves the mesh");
        const auto& tri = tris[loc->triangle];
        return loc->barycentric[0] * field.values[tri[0]] + loc->barycentric[1] * field.values[tri[1]] +
               loc->barycentric[2] * field.values[tri[2]];
      },
      center, radii, k_max, samples);
}

RadialityVerdict radiality_verdict(const ModeSpectrum& spectrum, double tol) {
  RadialityVerdict v;
  if (spectrum.energy_total == 0.0) {
    v.zero_field = true;
    return v;
  }
  v.ratio = spectrum.nonradial_ratio();
  v.radial = v.ratio < tol;
  if (!v.radial) {
    double best = -1.0;
    for (int k = 1; k <= spectrum.k_max(); ++k) {
      const double e = spectrum.mode_energy(k);
      if (e > best) {
        best = e;
        v.dominant_mode = k;
      }
    }
  }
  return v;
}

IdentityResidual transmission_identity_residual(const Field& u, const RadialProfiled& q,
                                                const PhaseConfig& config) {
  const Mesh& mesh = *u.mesh;
  const Point& center = config.domain().center();
  double num = 0.0, den = 0.0;
  bool any = false;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.region[t] == kShellTag) continue;
    any = true;
    const double area = mesh.signed_area(t);
    const Point c = mesh.centroid(t) - center;
    const double r = c.norm();
    const Eigen::Vector2d grad_q = r > 0.0 ? Eigen::Vector2d(q.derivative(std::clamp(r, q.inner(), q.outer())) * c / r) : Eigen::Vector2d::Zero();
    const Eigen::Vector2d defect = config.sigma_of(mesh.region[t]) * u.gradient(t) - grad_q;
    num += area * defect.squaredNorm();
    den += area * grad_q.squaredNorm();
  }
  if (!any) return {0.0, true};
  if (den == 0.0) throw std::domain_error("auxiliary gradient vanishes on the core");
  return {num / den, false};
}

}  // namespace phaselab
