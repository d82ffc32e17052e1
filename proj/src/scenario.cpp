#include "phaselab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace phaselab {

namespace {

constexpr double kPi = 3.14159265358979323846;

RadialProfiled unit_source(const DomainSpec& d, double value = 1.0) {
  return RadialProfiled::constant(2, d.inner_radius(), d.outer_radius(), value);
}

Scenario base(std::string name, PhaseConfig config) {
  Scenario s{.name = std::move(name),
             .config = config,
             .source = unit_source(config.domain())};
  s.probes.push_back(SurfaceSpec{config.domain().center(), 0.75});
  return s;
}

// k disks of radius 0.18 on the circle of radius 0.6, 0.06 apart along the
// chord, fanned symmetrically about the positive x axis with sigma 0.1 (j+1).
PhaseConfig multiphase(int k) {
  if (k < 2 || k > 6) throw std::invalid_argument("multiphase_discrete supports 2 to 6 phases");
  const double c = 0.6, r = 0.18, gap = 0.06;
  const double step = 2.0 * std::asin((2.0 * r + gap) / (2.0 * c));
  std::vector<PhaseRegion> phases;
  for (int j = 0; j < k; ++j) {
    const double th = (j - 0.5 * (k - 1)) * step;
    phases.push_back({j + 1, Disk{Point(c * std::cos(th), c * std::sin(th)), r}, 0.1 * (j + 1)});
  }
  return PhaseConfig(DomainSpec(Ball{1.0}), std::move(phases));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

VerdictEntry verdict(std::string check, bool pass, std::string detail) {
  return {std::move(check), pass ? Verdict::Pass : Verdict::Fail, std::move(detail)};
}

std::vector<double> default_radii(const DomainSpec& d) {
  const double r0 = d.inner_radius(), R = d.outer_radius();
  return {r0 + 0.25 * (R - r0), r0 + 0.5 * (R - r0), r0 + 0.75 * (R - r0)};
}

double exact_source_integral(const DomainSpec& d, const RadialProfiled& g) {
  return 2.0 * kPi * detail::gauss_weighted_integral(g, d.inner_radius(), d.outer_radius());
}

double interpolate(const Field& f, const PointLocator& locator, const Point& p) {
  const auto loc = locator.locate(p);
  if (!loc) throw std::domain_error("point outside the mesh");
  const auto& tri = f.mesh->triangles[loc->triangle];
  return loc->barycentric[0] * f.values[tri[0]] + loc->barycentric[1] * f.values[tri[1]] +
         loc->barycentric[2] * f.values[tri[2]];
}

bool same_constant(const RadialProfiled& g, double value) {
  if (g.pieces().size() != 1) return false;
  const auto& p = g.pieces().front();
  if (p.singular != 0.0 || p.poly.size() < 1 || p.poly[0] != value) return false;
  for (Eigen::Index m = 1; m < p.poly.size(); ++m)
    if (p.poly[m] != 0.0) return false;
  return true;
}

EllipticSummary run_elliptic(const Scenario& sc, const PhaseConfig& config, const std::shared_ptr<const Mesh>& mesh,
                             const SparseSystem& system, Field& u) {
  const auto& domain = config.domain();
  const Thresholds& th = sc.thresholds;
  EllipticSummary e;
  e.vertices = mesh->num_vertices();
  e.triangles = mesh->num_triangles();
  e.mesh_area = mesh->total_area();

  u = solve_elliptic(system);
  e.outer = recover_boundary_flux(system, u, kOuterBoundary);
  if (!domain.is_ball()) e.inner = recover_boundary_flux(system, u, kInnerBoundary);
  e.boundary_flux_mean = whole_boundary_flux_mean(system, u);
  e.expected_flux_mean = -exact_source_integral(domain, sc.source) / domain.boundary_length();
  e.flux = flux_residual(e.outer);

  const auto radii = sc.spectrum_radii.empty() ? default_radii(domain) : sc.spectrum_radii;
  e.spectrum = angular_spectrum(u, domain.center(), radii, kDefaultModes);
  e.radiality = radiality_verdict(e.spectrum, th.radiality);

  const auto q = build_auxiliary_q(domain, sc.source);
  e.identity = transmission_identity_residual(u, q, config);

  for (int v : system.free_nodes)
    if (!(u.values[v] > 0.0)) e.discrete_positive = false;

  if (auto sigma = radial_conductivity(config)) {
    e.radial_solution = solve_radial(domain, *sigma, sc.source);
    e.oracle_l2_error = l2_error(u, *e.radial_solution, domain.center());
    if (domain.is_ball()) {
      const PointLocator locator(*mesh);
      e.oracle_center_error =
          std::abs(interpolate(u, locator, domain.center()) - e.radial_solution->value(0.0));
    }
  }
  return e;
}

}  // namespace

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::Elliptic: return "elliptic";
    case Pipeline::Parabolic: return "parabolic";
    case Pipeline::Both: return "both";
  }
  return "?";
}

std::string to_string(Expectation e) { return e == Expectation::Symmetric ? "symmetric" : "asymmetric"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotRun: return "not-run";
  }
  return "?";
}

Pipeline parse_pipeline(std::string_view s) {
  if (s == "elliptic") return Pipeline::Elliptic;
  if (s == "parabolic") return Pipeline::Parabolic;
  if (s == "both") return Pipeline::Both;
  throw std::invalid_argument("unknown pipeline '" + std::string(s) + "' (elliptic|parabolic|both)");
}

std::vector<std::string> preset_names() {
  return {"one_phase_disk",       "one_phase_annulus",   "two_phase_concentric",
          "two_phase_displaced",  "multiphase_discrete", "nested_rings_hypothesis_violation"};
}

Scenario preset(std::string_view name, const PresetOptions& options) {
  const DomainSpec disk(Ball{1.0});
  if (name == "one_phase_disk") return base("one_phase_disk", PhaseConfig(disk, {}));
  if (name == "one_phase_annulus")
  {
    // r = 0.75 sits near the profile maximum where the mean flux nearly
    // vanishes, so the relative flux deviation is uninformative there.
    auto s = base("one_phase_annulus", PhaseConfig(DomainSpec(Annulus{0.5, 1.0}), {}));
    s.probes = {SurfaceSpec{Point::Zero(), 0.875}};
    return s;
  }
  if (name == "two_phase_concentric")
    return base("two_phase_concentric", PhaseConfig(disk, {{1, Disk{Point::Zero(), 0.5}, 2.0}}));
  if (name == "two_phase_displaced") {
    auto s = base("two_phase_displaced", PhaseConfig(disk, {{1, Disk{Point(0.2, 0.0), 0.3}, 2.0}}));
    s.expectation = Expectation::Asymmetric;
    return s;
  }
  if (name == "multiphase_discrete") {
    auto s = base("multiphase_discrete", multiphase(options.phases));
    // The disks reach radius 0.78; this circle keeps dist(x, core) >= dist(x, boundary).
    s.probes = {SurfaceSpec{Point::Zero(), 0.9}};
    s.expectation = Expectation::Asymmetric;
    return s;
  }
  if (name == "nested_rings_hypothesis_violation") {
    // The ring separates the shell into an inner and an outer component, so
    // the shell is disconnected; the configuration stays radially layered.
    auto s = base("nested_rings_hypothesis_violation",
                  PhaseConfig(disk, {{1, Disk{Point::Zero(), 0.3}, 2.0}, {2, Ring{Point::Zero(), 0.5, 0.7}, 3.0}}));
    s.probes = {SurfaceSpec{Point::Zero(), 0.85}};
    s.expect_hypotheses_hold = false;
    return s;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'; known presets: " + known);
}

std::optional<RadialProfiled> radial_conductivity(const PhaseConfig& config, int dimension) {
  if (!config.is_concentric() || config.has_element_sets()) return std::nullopt;
  const auto& d = config.domain();
  std::vector<double> br{d.inner_radius(), d.outer_radius()};
  for (const auto& ph : config.phases()) {
    if (const auto* disk = std::get_if<Disk>(&ph.shape)) {
      br.push_back(disk->radius);
    } else if (const auto* ring = std::get_if<Ring>(&ph.shape)) {
      br.push_back(ring->inner);
      br.push_back(ring->outer);
    }
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  std::vector<double> values;
  for (std::size_t j = 0; j + 1 < br.size(); ++j) {
    const double mid = 0.5 * (br[j] + br[j + 1]);
    values.push_back(sigma_at(config, d.center() + Point(mid, 0.0)));
  }
  return RadialProfiled::piecewise_constant(dimension, std::move(br), values, ProfileKind::Conductivity);
}

bool Report::ok() const {
  return std::none_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.verdict == Verdict::Fail; });
}

const VerdictEntry* Report::find(std::string_view check) const {
  for (const auto& v : verdicts)
    if (v.check == check) return &v;
  return nullptr;
}

Report run_scenario(const Scenario& sc, bool write_files) {
  const auto dir = sc.output_dir / sc.name;
  auto save = [&](const std::string& file, const std::string& content) {
    if (write_files) write_text_file(dir / file, content);
  };

  Report report;
  report.scenario = sc.name;
  report.resolution = sc.resolution;
  report.pipeline = sc.pipeline;
  report.expectation = sc.expectation;
  const Thresholds& th = sc.thresholds;
  const bool symmetric = sc.expectation == Expectation::Symmetric;
  const bool elliptic = sc.pipeline != Pipeline::Parabolic;
  const bool parabolic = sc.pipeline != Pipeline::Elliptic;

  try {
    const PhaseConfig config = validate_configuration(sc.config);
    report.flags = *config.hypothesis_flags();
    report.verdicts.push_back(verdict("hypotheses", report.flags.all() == sc.expect_hypotheses_hold,
                                      sc.expect_hypotheses_hold ? "expected to hold" : "expected violated"));

    const auto mesh = std::make_shared<const Mesh>(assign_phases(generate_mesh(config, sc.resolution), config));
    if (write_files) {
      std::ostringstream os;
      write_mesh(os, *mesh);
      save("mesh.txt", os.str());
    }

    const auto t_elliptic = std::chrono::steady_clock::now();
    const SparseSystem system = assemble_system(mesh, config, sc.source);
    if (elliptic) {
      Field u;
      report.elliptic = run_elliptic(sc, config, mesh, system, u);
      report.elliptic_seconds = seconds_since(t_elliptic);
      const auto& e = *report.elliptic;

      save("field.csv", field_csv(u));
      save("flux_outer.csv", flux_csv(e.outer));
      if (e.inner) save("flux_inner.csv", flux_csv(*e.inner));
      save("spectrum.csv", spectrum_csv(e.spectrum));
      if (e.radial_solution) save("radial_profile.csv", profile_csv(*e.radial_solution));
      const DiagnosticsReport diag{e.flux, e.radiality, e.spectrum.energy_nonradial, e.identity, report.flags};
      save("diagnostics.csv", diagnostics_csv(diag));
      save("diagnostics.txt", diagnostics_text(diag));

      const double div_err = std::abs(e.boundary_flux_mean - e.expected_flux_mean) / std::abs(e.expected_flux_mean);
      report.verdicts.push_back(verdict("divergence_identity", div_err <= th.divergence,
                                        "relative error " + fmt(div_err)));
      if (symmetric) {
        report.verdicts.push_back(verdict("flux_symmetry", e.flux.deviation < th.flux_symmetric,
                                          "deviation " + fmt(e.flux.deviation) + " < " + fmt(th.flux_symmetric)));
        report.verdicts.push_back(
            verdict("radiality", e.radiality.radial, "E_perp/E_total " + fmt(e.radiality.ratio)));
        report.verdicts.push_back(verdict("transmission_identity", e.identity.value < th.identity_symmetric,
                                          "residual " + fmt(e.identity.value) + " < " + fmt(th.identity_symmetric)));
      } else {
        report.verdicts.push_back(verdict("flux_symmetry", e.flux.deviation > th.flux_asymmetric,
                                          "deviation " + fmt(e.flux.deviation) + " > " + fmt(th.flux_asymmetric)));
        report.verdicts.push_back(verdict("radiality", !e.radiality.radial && e.radiality.dominant_mode == 1,
                                          "E_perp/E_total " + fmt(e.radiality.ratio) + ", dominant mode " +
                                              std::to_string(e.radiality.dominant_mode)));
        report.verdicts.push_back(verdict("transmission_identity", e.identity.value > th.identity_asymmetric,
                                          "residual " + fmt(e.identity.value) + " > " + fmt(th.identity_asymmetric)));
      }
    } else {
      for (const char* c : {"divergence_identity", "flux_symmetry", "radiality", "transmission_identity"})
        report.verdicts.push_back({c, Verdict::NotRun, ""});
    }

    if (parabolic) {
      const auto t_parabolic = std::chrono::steady_clock::now();
      ParabolicSummary p;
      HeatRunOptions opts = sc.heat;
      opts.probes = sc.probes;
      std::vector<SurfaceCheck> checks;
      for (const auto& m : sc.probes) checks.push_back(check_surface(config, m));

      // V solves the problem with source u_0, so it is compared against that elliptic solve.
      const auto heat_source = unit_source(config.domain(), opts.initial_value);
      const SparseSystem heat_system =
          same_constant(sc.source, opts.initial_value) ? system : assemble_system(mesh, config, heat_source);
      const Field v_ref = solve_elliptic(heat_system);

      const auto eig = smallest_eigenvalue(heat_system);
      p.lambda = eig.lambda;
      p.eigen_iterations = eig.iterations;
      p.area = mesh->total_area();
      opts.schedule = opts.schedule.limited_for(p.lambda);
      const TimeIntegral integral = integrate_time(heat_system, p.lambda, opts);
      const auto& series = integral.run.series;
      p.decay = decay_check(series, p.lambda, p.area, th.decay_slack);
      p.final_time = integral.final_time;
      p.steps = integral.run.steps;
      p.tail_bound = integral.tail_bound;
      p.dissipativity_violations = series.dissipativity_violations;
      const double ref_norm = mass_norm(heat_system.full_mass, v_ref.values);
      p.v_relative_error = ref_norm > 0.0
                               ? mass_norm(heat_system.full_mass, integral.v.values - v_ref.values) / ref_norm
                               : mass_norm(heat_system.full_mass, integral.v.values);
      p.extension_change = extend_integration(heat_system, integral, opts);
      p.v_flux_mean = whole_boundary_flux_mean(heat_system, integral.v);
      for (std::size_t i = 0; i < sc.probes.size(); ++i)
        p.probes.push_back(probe_surface(series, i, checks[i], th.probe_symmetric));
      report.parabolic_seconds = seconds_since(t_parabolic);

      if (sc.probes.empty()) {
        save("timeseries.csv", timeseries_csv(series, std::nullopt));
      } else {
        for (std::size_t i = 0; i < sc.probes.size(); ++i)
          save(sc.probes.size() == 1 ? "timeseries.csv" : "timeseries_" + std::to_string(i) + ".csv",
               timeseries_csv(series, i));
      }
      save("decay.csv", decay_csv(series, p.lambda, p.area));
      save("decay.txt", decay_text(p.decay, p.lambda, p.area));
      save("time_integral.csv", field_csv(integral.v));

      report.verdicts.push_back(verdict("decay", p.decay.pass, "max ratio " + fmt(p.decay.max_ratio)));
      report.verdicts.push_back(verdict("dissipativity", p.dissipativity_violations == 0,
                                        std::to_string(p.dissipativity_violations) + " increasing steps"));
      report.verdicts.push_back(verdict("time_integral", p.v_relative_error < th.time_integral,
                                        "relative error " + fmt(p.v_relative_error)));
      report.verdicts.push_back(verdict("tail_bound", p.extension_change <= p.tail_bound,
                                        "extension change " + fmt(p.extension_change) + " <= bound " +
                                            fmt(p.tail_bound)));
      for (std::size_t i = 0; i < p.probes.size(); ++i) {
        const auto& pr = p.probes[i];
        const std::string suffix = p.probes.size() == 1 ? "" : "_" + std::to_string(i);
        if (symmetric) {
          report.verdicts.push_back(verdict("probe_isothermic" + suffix, pr.max_dev_u < th.probe_symmetric,
                                            "max deviation " + fmt(pr.max_dev_u)));
          report.verdicts.push_back(verdict("probe_constant_flow" + suffix, pr.max_dev_flux < th.probe_symmetric,
                                            "max deviation " + fmt(pr.max_dev_flux)));
        } else {
          report.verdicts.push_back(verdict("probe_isothermic" + suffix, pr.max_dev_u > th.probe_asymmetric,
                                            "max deviation " + fmt(pr.max_dev_u)));
          report.verdicts.push_back(verdict("probe_constant_flow" + suffix, pr.max_dev_flux > th.probe_asymmetric,
                                            "max deviation " + fmt(pr.max_dev_flux)));
        }
      }
      report.parabolic = std::move(p);
    } else {
      for (const char* c : {"decay", "dissipativity", "time_integral", "tail_bound"})
        report.verdicts.push_back({c, Verdict::NotRun, ""});
    }
  } catch (const std::exception& ex) {
    if (write_files) {
      try {
        save("report.txt", format_text_report(report, false) + "error: " + ex.what() + "\n");
      } catch (...) {
      }
    }
    throw std::runtime_error("scenario '" + sc.name + "': " + ex.what());
  }

  save("summary.csv", summary_header() + summary_row(report));
  // Timings stay out of the files so repeated runs are byte-identical.
  save("report.txt", format_text_report(report, false));
  return report;
}

}  // namespace phaselab
