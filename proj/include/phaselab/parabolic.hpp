#pragma once

#include "phaselab/fem.hpp"
#include "phaselab/geometry.hpp"
#include "phaselab/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace phaselab {

/// Heat solution at one time level; `u` lives on free nodes.
struct HeatState {
  double time = 0.0;
  Eigen::VectorXd u;
  double mass_norm = 0.0;
};

/// u = value on free nodes, 0 on Dirichlet nodes.
HeatState initial_state(const SparseSystem& system, double value = 1.0);

/// theta-scheme stepper for M u' = -K u: theta = 1 is backward Euler,
/// theta = 1/2 Crank-Nicolson. Keeps the Cholesky factor of M + theta dt K
/// and refactors only when dt changes.
class ImplicitStepper {
 public:
  explicit ImplicitStepper(const SparseSystem& system, double theta = 1.0);

  HeatState step(const HeatState& state, double dt);

 private:
  const SparseSystem* system_;
  double theta_;
  double factored_dt_ = -1.0;
  bool analyzed_ = false;
  Eigen::SimplicialLLT<SparseMatrix> llt_;
};

/// One backward-Euler step (M + dt K) u_new = M u_old.
HeatState step_implicit(const HeatState& state, double dt, const SparseSystem& system);

struct EigenResult {
  double lambda = 0.0;
  Eigen::VectorXd vector;  ///< M-normalized, free nodes
  int iterations = 0;
};

/// Smallest eigenvalue of K x = lambda M x by inverse iteration with
/// M-normalization, stopped on relative Rayleigh-quotient change <= tol.
EigenResult smallest_eigenvalue(const SparseSystem& system, double tol = 1e-8, int max_iterations = 2000);

/// Uniform steps of initial_dt, then geometric growth capped at max_dt.
struct TimeSchedule {
  double initial_dt = 1e-4;
  int initial_steps = 100;
  double growth = 1.05;
  double max_dt = 1e-3;

  double dt(int step) const;

  /// Same schedule with every step limited to max_lambda_dt / lambda. Backward
  /// Euler damps the slowest mode by 1 / (1 + lambda dt) per step instead of
  /// e^{-lambda dt}; the lag compounds over the run, so the continuum decay
  /// bound is tracked only while lambda dt stays small.
  TimeSchedule limited_for(double lambda, double max_lambda_dt = 1e-2) const;
};

/// Circle M = {|x - center| = radius}.
struct SurfaceSpec {
  Point center = Point::Zero();
  double radius = 0.75;
};

struct SurfaceCheck {
  bool distance_condition = false;  ///< dist(x, core) >= dist(x, boundary) on M
  double min_core_distance = 0.0;
  double max_boundary_distance = 0.0;
};

/// Throws std::invalid_argument when M meets a core closure or leaves the domain.
SurfaceCheck check_surface(const PhaseConfig& config, const SurfaceSpec& surface);

struct ProbeSample {
  double mean_u = 0.0;
  double dev_u = 0.0;  ///< angular stddev / |mean|
  double mean_flux = 0.0;
  double dev_flux = 0.0;
};

/// Samples a nodal field and its recovered gradient (area-weighted average of
/// element gradients at the vertices) on a circle; the normal derivative is the
/// interpolated gradient dotted with the outward radial direction of M.
class SurfaceProbe {
 public:
  SurfaceProbe(const Mesh& mesh, SurfaceSpec surface, int samples = 256);

  ProbeSample measure(const Eigen::VectorXd& nodal) const;
  const SurfaceSpec& surface() const { return surface_; }

 private:
  struct Sample {
    std::array<int, 3> local;  ///< indices into nodes_
    Eigen::Vector3d weights;
    Eigen::Vector2d normal;
  };
  const Mesh* mesh_;
  SurfaceSpec surface_;
  std::vector<Sample> samples_;
  std::vector<int> nodes_;                  ///< vertices touched by samples
  std::vector<std::vector<int>> incident_;  ///< triangles around each of nodes_
};

/// Probe statistics for analytic value and gradient functions.
template <typename F, typename G>
ProbeSample probe_function(F&& value, G&& gradient, const SurfaceSpec& surface, int samples = 256) {
  constexpr double kPi = 3.14159265358979323846;
  std::vector<double> u(samples), f(samples);
  for (int j = 0; j < samples; ++j) {
    const double th = 2.0 * kPi * j / samples;
    const Eigen::Vector2d n(std::cos(th), std::sin(th));
    const Point p = surface.center + surface.radius * n;
    u[j] = value(p);
    f[j] = gradient(p).dot(n);
  }
  auto stats = [&](const std::vector<double>& v, double& mean, double& dev) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.size()));
    dev = std::abs(mean) < 1e-12 ? sd : sd / std::abs(mean);
  };
  ProbeSample s;
  stats(u, s.mean_u, s.dev_u);
  stats(f, s.mean_flux, s.dev_flux);
  return s;
}

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> mass_norms;
  std::vector<std::vector<ProbeSample>> probes;  ///< [surface][record]
  int dissipativity_violations = 0;              ///< steps with growing mass norm
};

struct HeatRunOptions {
  TimeSchedule schedule;
  double epsilon = 1e-6;  ///< stop once ||u||_M <= epsilon
  int max_steps = 200000;
  double theta = 1.0;
  double initial_value = 1.0;
  std::vector<SurfaceSpec> probes;
};

struct HeatRun {
  TimeSeries series;
  Eigen::VectorXd integral;  ///< trapezoidal int_0^T u dt on free nodes
  HeatState final_state;
  int steps = 0;
};

/// Marches from `start` (or the unit initial state) until the mass norm drops
/// below epsilon, accumulating the time integral. Throws when epsilon is not
/// reached within max_steps.
HeatRun run_heat(const SparseSystem& system, const HeatRunOptions& options,
                 const std::optional<HeatState>& start = std::nullopt, int first_step_index = 0);

struct DecayReport {
  bool pass = true;
  std::optional<double> first_violation;
  double tail_slope = 0.0;   ///< fitted d/dt log ||u||_M over the second half of the run
  double slope_ratio = 0.0;  ///< tail_slope / (-lambda)
  double max_ratio = 0.0;    ///< max_k ||u_k||^2 / (|Omega| e^{-2 lambda t_k})
};

DecayReport decay_check(const TimeSeries& series, double lambda, double area, double tol = 0.02);

struct TimeIntegral {
  Field v;
  double final_time = 0.0;
  double tail_bound = 0.0;  ///< sqrt(|Omega|) e^{-lambda T} / lambda
  HeatRun run;
};

TimeIntegral integrate_time(const SparseSystem& system, double lambda, const HeatRunOptions& options);

/// Continues a finished integration until the mass norm has dropped by
/// `decades` more factors of ten; returns ||V_ext - V||_M.
double extend_integration(const SparseSystem& system, const TimeIntegral& integral, const HeatRunOptions& options,
                          int decades = 1);

struct ProbeReport {
  SurfaceCheck check;
  double max_dev_u = 0.0;     ///< over every record with t > 0; verdicts use these
  double max_dev_flux = 0.0;
  bool isothermic = false;
  bool constant_flow = false;
  // Diagnostic only: the same maxima over records whose mean is resolved,
  // |mean| >= resolved_fraction * max_k |mean_k|. In the initial layer the
  // flux on M is many orders of magnitude below its peak and its relative
  // deviation reflects mesh anisotropy of a numerically tiny signal.
  double resolved_dev_u = 0.0;
  double resolved_dev_flux = 0.0;
  int resolved_records_flux = 0;
};

/// Maximum angular deviations over all records after t = 0 (the constant datum).
ProbeReport probe_surface(const TimeSeries& series, std::size_t surface_index, const SurfaceCheck& check,
                          double tol = 2e-2, double resolved_fraction = 1e-2);

}  // namespace phaselab
