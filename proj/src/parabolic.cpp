#include "phaselab/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace phaselab {

namespace {

constexpr double kPi = 3.14159265358979323846;

void angular_stats(const std::vector<double>& v, double& mean, double& dev) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  dev = std::abs(mean) < 1e-12 ? sd : sd / std::abs(mean);
}

}  // namespace

HeatState initial_state(const SparseSystem& system, double value) {
  HeatState s;
  s.u = Eigen::VectorXd::Constant(system.num_free(), value);
  s.mass_norm = mass_norm(system.mass, s.u);
  return s;
}

ImplicitStepper::ImplicitStepper(const SparseSystem& system, double theta) : system_(&system), theta_(theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
}

HeatState ImplicitStepper::step(const HeatState& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (dt != factored_dt_) {
    const SparseMatrix A = system_->mass + (theta_ * dt) * system_->stiffness;
    if (!analyzed_) {
      llt_.analyzePattern(A);
      analyzed_ = true;
    }
    llt_.factorize(A);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("implicit step: factorization failed");
    factored_dt_ = dt;
  }
  Eigen::VectorXd rhs = system_->mass * state.u;
  if (theta_ < 1.0) rhs -= ((1.0 - theta_) * dt) * (system_->stiffness * state.u);
  HeatState next;
  next.time = state.time + dt;
  next.u = llt_.solve(rhs);
  if (llt_.info() != Eigen::Success) throw std::runtime_error("implicit step: solve failed");
  next.mass_norm = mass_norm(system_->mass, next.u);
  return next;
}

HeatState step_implicit(const HeatState& state, double dt, const SparseSystem& system) {
  ImplicitStepper stepper(system);
  return stepper.step(state, dt);
}

EigenResult smallest_eigenvalue(const SparseSystem& system, double tol, int max_iterations) {
  Eigen::SimplicialLLT<SparseMatrix> llt(system.stiffness);
  if (llt.info() != Eigen::Success) throw std::runtime_error("eigenvalue: stiffness factorization failed");
  Eigen::VectorXd x = Eigen::VectorXd::Ones(system.num_free());
  x /= mass_norm(system.mass, x);
  double rq = x.dot(system.stiffness * x);
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd y = llt.solve(system.mass * x);
    y /= mass_norm(system.mass, y);
    const double next = y.dot(system.stiffness * y);
    x = std::move(y);
    if (std::abs(next - rq) <= tol * std::abs(next)) return {next, x, it};
    rq = next;
  }
  std::ostringstream msg;
  msg << "inverse iteration stagnated; last Rayleigh quotient " << rq;
  throw std::runtime_error(msg.str());
}

double TimeSchedule::dt(int step) const {
  if (step < initial_steps) return initial_dt;
  return std::min(max_dt, initial_dt * std::pow(growth, step - initial_steps + 1));
}

TimeSchedule TimeSchedule::limited_for(double lambda, double max_lambda_dt) const {
  if (!(lambda > 0.0 && max_lambda_dt > 0.0)) throw std::invalid_argument("step limit needs positive lambda");
  TimeSchedule s = *this;
  const double cap = max_lambda_dt / lambda;
  s.max_dt = std::min(s.max_dt, cap);
  s.initial_dt = std::min(s.initial_dt, cap);
  return s;
}

SurfaceCheck check_surface(const PhaseConfig& config, const SurfaceSpec& surface) {
  if (!(surface.radius > 0.0)) throw std::invalid_argument("surface radius must be positive");
  const auto& domain = config.domain();
  SurfaceCheck c;
  c.distance_condition = true;
  c.min_core_distance = std::numeric_limits<double>::infinity();
  const int m = 1024;
  for (int j = 0; j < m; ++j) {
    const double th = 2.0 * kPi * j / m;
    const Point p = surface.center + surface.radius * Point(std::cos(th), std::sin(th));
    if (!domain.contains(p)) throw std::invalid_argument("probe surface leaves the domain");
    const double db = domain.distance_to_boundary(p);
    c.max_boundary_distance = std::max(c.max_boundary_distance, db);
    double dc = std::numeric_limits<double>::infinity();
    for (const auto& ph : config.phases()) dc = std::min(dc, distance_to_phase(ph.shape, p));
    if (!(dc > 0.0)) throw std::invalid_argument("probe surface meets the core closure");
    c.min_core_distance = std::min(c.min_core_distance, dc);
    if (dc < db - 1e-12) c.distance_condition = false;
  }
  return c;
}

SurfaceProbe::SurfaceProbe(const Mesh& mesh, SurfaceSpec surface, int samples)
    : mesh_(&mesh), surface_(std::move(surface)) {
  const PointLocator locator(mesh);
  std::map<int, int> local;
  for (int j = 0; j < samples; ++j) {
    const double th = 2.0 * kPi * j / samples;
    const Eigen::Vector2d n(std::cos(th), std::sin(th));
    const auto loc = locator.locate(surface_.center + surface_.radius * n);
    if (!loc) throw std::invalid_argument("probe surface leaves the mesh");
    Sample s;
    s.weights = loc->barycentric;
    s.normal = n;
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.triangles[loc->triangle][i];
      auto [it, inserted] = local.emplace(v, static_cast<int>(nodes_.size()));
      if (inserted) nodes_.push_back(v);
      s.local[i] = it->second;
    }
    samples_.push_back(s);
  }
  incident_.resize(nodes_.size());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int v : mesh.triangles[t])
      if (auto it = local.find(v); it != local.end()) incident_[it->second].push_back(t);
}

ProbeSample SurfaceProbe::measure(const Eigen::VectorXd& nodal) const {
  std::vector<Eigen::Vector2d> grads(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    double area = 0.0;
    for (int t : incident_[i]) {
      const auto& tri = mesh_->triangles[t];
      const Point& a = mesh_->vertices[tri[0]];
      const Point& b = mesh_->vertices[tri[1]];
      const Point& c = mesh_->vertices[tri[2]];
      const double twice = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
      const Eigen::Vector2d g = (nodal[tri[0]] * Eigen::Vector2d(b.y() - c.y(), c.x() - b.x()) +
                                 nodal[tri[1]] * Eigen::Vector2d(c.y() - a.y(), a.x() - c.x()) +
                                 nodal[tri[2]] * Eigen::Vector2d(a.y() - b.y(), b.x() - a.x())) /
                                twice;
      acc += 0.5 * twice * g;
      area += 0.5 * twice;
    }
    grads[i] = acc / area;
  }
  std::vector<double> u(samples_.size()), flux(samples_.size());
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    const auto& s = samples_[j];
    double val = 0.0;
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) {
      val += s.weights[i] * nodal[nodes_[s.local[i]]];
      g += s.weights[i] * grads[s.local[i]];
    }
    u[j] = val;
    flux[j] = g.dot(s.normal);
  }
  ProbeSample out;
  angular_stats(u, out.mean_u, out.dev_u);
  angular_stats(flux, out.mean_flux, out.dev_flux);
  return out;
}

HeatRun run_heat(const SparseSystem& system, const HeatRunOptions& options, const std::optional<HeatState>& start,
                 int first_step_index) {
  std::vector<SurfaceProbe> probes;
  for (const auto& s : options.probes) probes.emplace_back(*system.mesh, s);

  HeatRun run;
  HeatState state = start ? *start : initial_state(system, options.initial_value);
  run.integral = Eigen::VectorXd::Zero(system.num_free());
  run.series.probes.resize(probes.size());

  auto record = [&](const HeatState& s) {
    run.series.times.push_back(s.time);
    run.series.mass_norms.push_back(s.mass_norm);
    if (!probes.empty()) {
      const Eigen::VectorXd full = system.expand(s.u);
      for (std::size_t p = 0; p < probes.size(); ++p) run.series.probes[p].push_back(probes[p].measure(full));
    }
  };
  record(state);

  ImplicitStepper stepper(system, options.theta);
  int k = first_step_index;
  while (state.mass_norm > options.epsilon) {
    if (run.steps >= options.max_steps) {
      std::ostringstream msg;
      msg << "heat run: mass norm " << state.mass_norm << " above epsilon " << options.epsilon << " after "
          << run.steps << " steps";
      throw std::runtime_error(msg.str());
    }
    const double dt = options.schedule.dt(k++);
    HeatState next = stepper.step(state, dt);
    if (next.mass_norm > state.mass_norm) ++run.series.dissipativity_violations;
    run.integral += (0.5 * dt) * (state.u + next.u);
    state = std::move(next);
    ++run.steps;
    record(state);
  }
  run.final_state = std::move(state);
  return run;
}

DecayReport decay_check(const TimeSeries& series, double lambda, double area, double tol) {
  DecayReport r;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double bound = area * std::exp(-2.0 * lambda * series.times[i]);
    const double sq = series.mass_norms[i] * series.mass_norms[i];
    r.max_ratio = std::max(r.max_ratio, sq / bound);
    if (sq > bound * (1.0 + tol) && r.pass) {
      r.pass = false;
      r.first_violation = series.times[i];
    }
  }
  // Least-squares slope of log ||u|| over t >= T/2.
  const double half = 0.5 * series.times.back();
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    if (series.times[i] < half || !(series.mass_norms[i] > 0.0)) continue;
    const double t = series.times[i], y = std::log(series.mass_norms[i]);
    n += 1;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  if (n >= 2) {
    r.tail_slope = (n * sty - st * sy) / (n * stt - st * st);
    r.slope_ratio = r.tail_slope / -lambda;
  }
  return r;
}

TimeIntegral integrate_time(const SparseSystem& system, double lambda, const HeatRunOptions& options) {
  if (!(lambda > 0.0)) throw std::invalid_argument("integrate_time needs a positive eigenvalue");
  TimeIntegral out;
  out.run = run_heat(system, options);
  out.v = Field{system.mesh, system.expand(out.run.integral)};
  out.final_time = out.run.final_state.time;
  out.tail_bound = std::sqrt(system.mesh->total_area()) * std::exp(-lambda * out.final_time) / lambda;
  return out;
}

double extend_integration(const SparseSystem& system, const TimeIntegral& integral, const HeatRunOptions& options,
                          int decades) {
  HeatRunOptions ext = options;
  ext.probes.clear();
  ext.epsilon = options.epsilon * std::pow(10.0, -decades);
  const HeatRun more = run_heat(system, ext, integral.run.final_state, integral.run.steps);
  return mass_norm(system.mass, more.integral);
}

ProbeReport probe_surface(const TimeSeries& series, std::size_t surface_index, const SurfaceCheck& check,
                          double tol, double resolved_fraction) {
  if (surface_index >= series.probes.size()) throw std::out_of_range("no probe records for surface");
  ProbeReport r;
  r.check = check;
  const auto& recs = series.probes[surface_index];
  double peak_u = 0.0, peak_flux = 0.0;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    peak_u = std::max(peak_u, std::abs(recs[i].mean_u));
    peak_flux = std::max(peak_flux, std::abs(recs[i].mean_flux));
  }
  for (std::size_t i = 1; i < recs.size(); ++i) {
    r.max_dev_u = std::max(r.max_dev_u, recs[i].dev_u);
    r.max_dev_flux = std::max(r.max_dev_flux, recs[i].dev_flux);
    if (std::abs(recs[i].mean_u) >= resolved_fraction * peak_u) r.resolved_dev_u = std::max(r.resolved_dev_u, recs[i].dev_u);
    if (std::abs(recs[i].mean_flux) >= resolved_fraction * peak_flux) {
      r.resolved_dev_flux = std::max(r.resolved_dev_flux, recs[i].dev_flux);
      ++r.resolved_records_flux;
    }
  }
  r.isothermic = r.max_dev_u < tol;
  r.constant_flow = r.max_dev_flux < tol;
  return r;
}

}  // namespace phaselab
