#pragma once

// Exact radial solutions of -div(sigma grad U) = g for radially layered
// conductivities in dimension N >= 2.
//
// On every interval the flux form sigma r^{N-1} U'(r) = C - int_{r0}^r g s^{N-1}
// integrates in closed form when g is polynomial in r, so solution pieces are
// a polynomial plus a multiple of log r (N = 2) or r^{2-N} (N >= 3).

#include "phaselab/geometry.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace phaselab {

enum class ProfileKind { Solution, Conductivity, Source };

/// One interval of a radial profile: sum_m poly[m] r^m + singular * basis(r)
/// where basis(r) = log r for N = 2 and r^{2-N} otherwise.
template <typename Scalar>
struct RadialPiece {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> poly;
  Scalar singular = Scalar(0);
};

template <typename Scalar>
class RadialProfile {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  RadialProfile(int dimension, std::vector<Scalar> breakpoints, std::vector<RadialPiece<Scalar>> pieces,
                ProfileKind kind)
      : dimension_(dimension), breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)), kind_(kind) {
    if (dimension_ < 2) throw std::invalid_argument("radial profile dimension must be >= 2");
    if (breakpoints_.size() < 2 || pieces_.size() + 1 != breakpoints_.size())
      throw std::invalid_argument("radial profile needs k+1 breakpoints for k pieces");
    if (breakpoints_.front() < Scalar(0)) throw std::invalid_argument("radial breakpoints must be >= 0");
    for (std::size_t j = 0; j + 1 < breakpoints_.size(); ++j)
      if (!(breakpoints_[j] < breakpoints_[j + 1]))
        throw std::invalid_argument("radial breakpoints must be strictly increasing");
  }

  /// Piecewise constant profile (conductivities or constant sources).
  static RadialProfile piecewise_constant(int dimension, std::vector<Scalar> breakpoints,
                                          const std::vector<Scalar>& values, ProfileKind kind) {
    std::vector<RadialPiece<Scalar>> pieces;
    for (Scalar v : values) pieces.push_back({Vector::Constant(1, v), Scalar(0)});
    return RadialProfile(dimension, std::move(breakpoints), std::move(pieces), kind);
  }

  /// Single polynomial piece sum_m coeffs[m] r^m on [r0, r1].
  static RadialProfile polynomial(int dimension, Scalar r0, Scalar r1, const std::vector<Scalar>& coeffs,
                                  ProfileKind kind = ProfileKind::Source) {
    Vector c(static_cast<Eigen::Index>(coeffs.size()));
    for (std::size_t m = 0; m < coeffs.size(); ++m) c[static_cast<Eigen::Index>(m)] = coeffs[m];
    return RadialProfile(dimension, {r0, r1}, {RadialPiece<Scalar>{c, Scalar(0)}}, kind);
  }

  static RadialProfile constant(int dimension, Scalar r0, Scalar r1, Scalar value,
                                ProfileKind kind = ProfileKind::Source) {
    return polynomial(dimension, r0, r1, {value}, kind);
  }

  int dimension() const { return dimension_; }
  ProfileKind kind() const { return kind_; }
  const std::vector<Scalar>& breakpoints() const { return breakpoints_; }
  const std::vector<RadialPiece<Scalar>>& pieces() const { return pieces_; }
  Scalar inner() const { return breakpoints_.front(); }
  Scalar outer() const { return breakpoints_.back(); }

  /// Index of the piece containing r; breakpoints belong to the piece on their left.
  std::size_t piece_index(Scalar r) const {
    if (r < inner() || r > outer()) throw std::out_of_range("radius outside profile support");
    const auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), r);
    return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  }

  Scalar value(Scalar r) const { return piece_value(piece_index(r), r); }
  Scalar derivative(Scalar r) const { return piece_derivative(piece_index(r), r); }

  /// Limits at an interior breakpoint from the left and right pieces.
  Scalar value_left(std::size_t breakpoint) const { return piece_value(breakpoint - 1, breakpoints_[breakpoint]); }
  Scalar value_right(std::size_t breakpoint) const { return piece_value(breakpoint, breakpoints_[breakpoint]); }
  Scalar derivative_left(std::size_t breakpoint) const {
    return piece_derivative(breakpoint - 1, breakpoints_[breakpoint]);
  }
  Scalar derivative_right(std::size_t breakpoint) const {
    return piece_derivative(breakpoint, breakpoints_[breakpoint]);
  }

  Scalar piece_value(std::size_t j, Scalar r) const {
    const auto& p = pieces_.at(j);
    Scalar v = horner(p.poly, r);
    if (p.singular != Scalar(0)) v += p.singular * basis(r);
    return v;
  }

  Scalar piece_derivative(std::size_t j, Scalar r) const {
    const auto& p = pieces_.at(j);
    Scalar d(0);
    for (Eigen::Index m = p.poly.size() - 1; m >= 1; --m) d = d * r + Scalar(m) * p.poly[m];
    if (p.singular != Scalar(0)) d += p.singular * basis_derivative(r);
    return d;
  }

  Scalar piece_second_derivative(std::size_t j, Scalar r) const {
    using std::pow;
    const auto& p = pieces_.at(j);
    Scalar d(0);
    for (Eigen::Index m = p.poly.size() - 1; m >= 2; --m) d = d * r + Scalar(m * (m - 1)) * p.poly[m];
    if (p.singular != Scalar(0)) {
      const int N = dimension_;
      d += p.singular * (N == 2 ? Scalar(-1) / (r * r) : Scalar((2 - N) * (1 - N)) * pow(r, Scalar(-N)));
    }
    return d;
  }

  Scalar basis(Scalar r) const {
    using std::log;
    using std::pow;
    return dimension_ == 2 ? log(r) : pow(r, Scalar(2 - dimension_));
  }

  Scalar basis_derivative(Scalar r) const {
    using std::pow;
    return dimension_ == 2 ? Scalar(1) / r : Scalar(2 - dimension_) * pow(r, Scalar(1 - dimension_));
  }

  RadialProfile operator*(Scalar s) const {
    RadialProfile out = *this;
    for (auto& p : out.pieces_) {
      p.poly *= s;
      p.singular *= s;
    }
    return out;
  }

 private:
  static Scalar horner(const Vector& c, Scalar r) {
    Scalar v(0);
    for (Eigen::Index m = c.size() - 1; m >= 0; --m) v = v * r + c[m];
    return v;
  }

  int dimension_;
  std::vector<Scalar> breakpoints_;
  std::vector<RadialPiece<Scalar>> pieces_;
  ProfileKind kind_;
};

using RadialProfiled = RadialProfile<double>;

namespace detail {

template <typename Scalar>
std::vector<Scalar> merged_breakpoints(Scalar r0, Scalar r1, const RadialProfile<Scalar>& a,
                                       const RadialProfile<Scalar>& b) {
  std::vector<Scalar> out{r0, r1};
  for (const auto* prof : {&a, &b}) {
    if (prof->inner() > r0 || prof->outer() < r1)
      throw std::invalid_argument("radial profile does not cover the domain");
    for (Scalar r : prof->breakpoints())
      if (r > r0 && r < r1) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Antiderivative of g(s) s^{N-1} for a polynomial piece, evaluated at r.
template <typename Scalar>
Scalar weighted_antiderivative(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& g, int N, Scalar r) {
  using std::pow;
  Scalar acc(0);
  for (Eigen::Index m = 0; m < g.size(); ++m)
    acc += g[m] * pow(r, Scalar(m + N)) / Scalar(m + N);
  return acc;
}

}  // namespace detail

template <typename Scalar>
struct RadialSolveInfo {
  bool source_positive = true;  ///< g > 0 on the sample grid
};

/// Solves -div(sigma grad U) = g with U = 0 on the boundary sphere(s).
///
/// Ball domains fix the flux constant by boundedness at the origin; annuli fix
/// it by the two Dirichlet conditions. `g` must be piecewise polynomial.
template <typename Scalar>
RadialProfile<Scalar> solve_radial(const DomainSpec& domain, const RadialProfile<Scalar>& sigma,
                                   const RadialProfile<Scalar>& g, RadialSolveInfo<Scalar>* info = nullptr) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int N = sigma.dimension();
  if (g.dimension() != N) throw std::invalid_argument("sigma and g profiles differ in dimension");
  const Scalar r0 = Scalar(domain.inner_radius());
  const Scalar R = Scalar(domain.outer_radius());
  const auto breaks = detail::merged_breakpoints(r0, R, sigma, g);
  const std::size_t k = breaks.size() - 1;

  std::vector<Scalar> sig(k);
  std::vector<Vector> src(k);
  for (std::size_t j = 0; j < k; ++j) {
    const Scalar mid = (breaks[j] + breaks[j + 1]) / Scalar(2);
    const auto& sp = sigma.pieces()[sigma.piece_index(mid)];
    sig[j] = sp.poly.size() > 0 ? sp.poly[0] : Scalar(0);
    if (sp.singular != Scalar(0) || (sp.poly.size() > 1 && !sp.poly.tail(sp.poly.size() - 1).isZero()))
      throw std::invalid_argument("sigma profile must be piecewise constant");
    if (!(sig[j] > Scalar(0))) throw std::invalid_argument("sigma must be positive");
    const auto& gp = g.pieces()[g.piece_index(mid)];
    if (gp.singular != Scalar(0)) throw std::invalid_argument("source must be piecewise polynomial");
    src[j] = gp.poly;
  }

  if (info) {
    info->source_positive = true;
    for (std::size_t j = 0; j < k; ++j)
      for (int s = 0; s <= 16; ++s) {
        const Scalar r = breaks[j] + (breaks[j + 1] - breaks[j]) * Scalar(s) / Scalar(16);
        if (!(g.value(r) > Scalar(0))) info->source_positive = false;
      }
  }

  // Per piece, U' = (C + kappa_j) / (sigma_j r^{N-1}) - sum_m c_m r^{m+1} / ((m+N) sigma_j)
  // with kappa_j = P_j(r_j) - G(r_j) and G the cumulative weighted source.
  std::vector<Scalar> kappa(k);
  Scalar cumulative(0);
  for (std::size_t j = 0; j < k; ++j) {
    const Scalar pj_left = detail::weighted_antiderivative(src[j], N, breaks[j]);
    kappa[j] = pj_left - cumulative;
    cumulative += detail::weighted_antiderivative(src[j], N, breaks[j + 1]) - pj_left;
  }

  auto basis_factor = [&]() { return N == 2 ? Scalar(1) : Scalar(1) / Scalar(2 - N); };

  // Builds pieces for a given flux constant C and a source scale (0 or 1),
  // fixing additive constants so that U(R) = 0 and U is continuous.
  auto build = [&](Scalar C, bool with_source) {
    std::vector<RadialPiece<Scalar>> pieces(k);
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::Index deg = with_source ? src[j].size() : 0;
      Vector poly = Vector::Zero(deg + 2);
      for (Eigen::Index m = 0; m < deg; ++m)
        poly[m + 2] = -src[j][m] / (Scalar(m + N) * Scalar(m + 2) * sig[j]);
      const Scalar kap = with_source ? kappa[j] : Scalar(0);
      pieces[j] = {poly, (C + kap) / sig[j] * basis_factor()};
    }
    RadialProfile<Scalar> tmp(N, breaks, pieces, ProfileKind::Solution);
    Scalar target(0);
    for (std::size_t jj = k; jj-- > 0;) {
      const Scalar at_right = tmp.piece_value(jj, breaks[jj + 1]);
      pieces[jj].poly[0] = target - at_right;
      tmp = RadialProfile<Scalar>(N, breaks, pieces, ProfileKind::Solution);
      target = tmp.piece_value(jj, breaks[jj]);
      if (jj == 0 && breaks[0] == Scalar(0)) break;
    }
    return RadialProfile<Scalar>(N, breaks, pieces, ProfileKind::Solution);
  };

  if (domain.is_ball()) return build(Scalar(0), true);

  const auto particular = build(Scalar(0), true);
  const auto homogeneous = build(Scalar(1), false);
  const Scalar C = -particular.value(r0) / homogeneous.value(r0);
  return build(C, true);
}

template <typename Scalar>
RadialProfile<Scalar> unit_conductivity(const DomainSpec& domain, int dimension) {
  return RadialProfile<Scalar>::constant(dimension, Scalar(domain.inner_radius()), Scalar(domain.outer_radius()),
                                         Scalar(1), ProfileKind::Conductivity);
}

/// The one-phase radial solution q of -Delta q = g, q = 0 on the boundary.
template <typename Scalar>
RadialProfile<Scalar> build_auxiliary_q(const DomainSpec& domain, const RadialProfile<Scalar>& g) {
  return solve_radial(domain, unit_conductivity<Scalar>(domain, g.dimension()), g);
}

template <typename Scalar>
Scalar eval_radial(const RadialProfile<Scalar>& profile, Scalar r) {
  return profile.value(r);
}

/// Conductivity implied by a radial solution through the localized equation
/// sigma = -g / Delta U, with Delta U = U'' + (N-1)/r U' evaluated on the piece
/// containing r (r > 0). For g = 1 this is the form -1/Delta U; the general
/// source makes the dependence on g explicit.
template <typename Scalar>
Scalar implied_conductivity(const RadialProfile<Scalar>& U, const RadialProfile<Scalar>& g, Scalar r) {
  if (!(r > Scalar(0))) throw std::domain_error("implied conductivity needs r > 0");
  const std::size_t j = U.piece_index(r);
  const Scalar lap = U.piece_second_derivative(j, r) + Scalar(U.dimension() - 1) / r * U.piece_derivative(j, r);
  if (lap == Scalar(0)) throw std::domain_error("Laplacian of the solution vanishes");
  return -g.value(r) / lap;
}

template <typename Scalar>
struct BoundaryFlux {
  Scalar outer = Scalar(0);      ///< outward normal derivative at R (or R2)
  Scalar inner = Scalar(0);      ///< outward normal derivative at R1 (annuli only)
  Scalar identity_residual = Scalar(0);
};

namespace detail {

// Gauss-Legendre integral of g(s) s^{N-1} over [a, b], exact for the
// polynomial degrees used here.
template <typename Scalar>
Scalar gauss_weighted_integral(const RadialProfile<Scalar>& g, Scalar a, Scalar b) {
  static const double x[] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                             -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                             0.7966664774136267,  0.9602898564975363};
  static const double w[] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                             0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                             0.2223810344533745, 0.1012285362903763};
  using std::pow;
  Scalar total(0);
  std::vector<Scalar> cuts{a, b};
  for (Scalar r : g.breakpoints())
    if (r > a && r < b) cuts.push_back(r);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const Scalar half = (cuts[c + 1] - cuts[c]) / Scalar(2), mid = (cuts[c + 1] + cuts[c]) / Scalar(2);
    const std::size_t piece = g.piece_index(mid);
    for (int q = 0; q < 8; ++q) {
      const Scalar s = mid + half * Scalar(x[q]);
      total += half * Scalar(w[q]) * g.piece_value(piece, s) * pow(s, Scalar(g.dimension() - 1));
    }
  }
  return total;
}

}  // namespace detail

/// Outward normal derivatives on the boundary sphere(s) and the residual of the
/// divergence identity, assuming unit conductivity next to the boundary. For
/// balls the residual is |dU/dnu(R) + R^{1-N} int_0^R g s^{N-1} ds|; for annuli
/// it is the two-sphere balance |R2^{N-1} U'(R2) - R1^{N-1} U'(R1) + int g s^{N-1}|.
template <typename Scalar>
BoundaryFlux<Scalar> boundary_flux(const RadialProfile<Scalar>& U, const DomainSpec& domain,
                                   const RadialProfile<Scalar>& g) {
  using std::abs;
  using std::pow;
  const int N = U.dimension();
  const Scalar R = Scalar(domain.outer_radius());
  const Scalar r0 = Scalar(domain.inner_radius());
  BoundaryFlux<Scalar> out;
  out.outer = U.derivative(R);
  const Scalar mass = detail::gauss_weighted_integral(g, r0, R);
  if (domain.is_ball()) {
    out.identity_residual = abs(out.outer + mass / pow(R, Scalar(N - 1)));
  } else {
    const Scalar right_of_inner = U.piece_derivative(0, r0);
    out.inner = -right_of_inner;
    out.identity_residual =
        abs(pow(R, Scalar(N - 1)) * out.outer - pow(r0, Scalar(N - 1)) * right_of_inner + mass);
  }
  return out;
}

}  // namespace phaselab
