#include "phaselab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace phaselab {

namespace {

// Full round-trip precision keeps CSV output exact and deterministic.
std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(17);
  return os;
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

std::string optional_number(const std::optional<double>& v) {
  if (!v) return "not-run";
  std::ostringstream os;
  os << std::setprecision(17) << *v;
  return os.str();
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string field_csv(const Field& field) {
  auto os = csv_stream();
  os << "vertex_id,x,y,value\n";
  for (int i = 0; i < field.mesh->num_vertices(); ++i) {
    const Point& p = field.mesh->vertices[i];
    os << i << ',' << p.x() << ',' << p.y() << ',' << field.values[i] << '\n';
  }
  return os.str();
}

std::string flux_csv(const FluxTrace& trace) {
  auto os = csv_stream();
  os << "vertex_id,arc,weight,flux\n";
  for (std::size_t i = 0; i < trace.nodes.size(); ++i)
    os << trace.nodes[i] << ',' << trace.arc[i] << ',' << trace.weight[i] << ',' << trace.flux[i] << '\n';
  return os.str();
}

std::string spectrum_csv(const ModeSpectrum& s) {
  auto os = csv_stream();
  os << "radius,k,a_k,b_k\n";
  for (std::size_t i = 0; i < s.radii.size(); ++i)
    for (int k = 0; k <= s.k_max(); ++k) {
      const auto row = static_cast<Eigen::Index>(i);
      os << s.radii[i] << ',' << k << ',' << s.a(row, k) << ',' << s.b(row, k) << '\n';
    }
  return os.str();
}

// One row per piece: value(r) = sum_m c_m r^m + singular * log r on
// [r_left, r_right]; coefficients are ';'-separated in increasing degree.
std::string profile_csv(const RadialProfiled& profile) {
  auto os = csv_stream();
  os << "piece,r_left,r_right,singular,coefficients\n";
  const auto& br = profile.breakpoints();
  for (std::size_t j = 0; j < profile.pieces().size(); ++j) {
    const auto& p = profile.pieces()[j];
    os << j << ',' << br[j] << ',' << br[j + 1] << ',' << p.singular << ',';
    for (Eigen::Index m = 0; m < p.poly.size(); ++m) os << (m ? ";" : "") << p.poly[m];
    os << '\n';
  }
  return os.str();
}

std::string timeseries_csv(const TimeSeries& series, std::optional<std::size_t> surface) {
  auto os = csv_stream();
  os << "t,mass_norm,probe_mean_u,probe_dev_u,probe_mean_flux,probe_dev_flux\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    os << series.times[i] << ',' << series.mass_norms[i];
    if (surface) {
      const auto& p = series.probes.at(*surface).at(i);
      os << ',' << p.mean_u << ',' << p.dev_u << ',' << p.mean_flux << ',' << p.dev_flux << '\n';
    } else {
      os << ",,,,\n";
    }
  }
  return os.str();
}

std::string decay_csv(const TimeSeries& series, double lambda, double area) {
  auto os = csv_stream();
  os << "t,mass_norm_squared,bound,ratio\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double sq = series.mass_norms[i] * series.mass_norms[i];
    const double bound = area * std::exp(-2.0 * lambda * series.times[i]);
    os << series.times[i] << ',' << sq << ',' << bound << ',' << sq / bound << '\n';
  }
  return os.str();
}

std::string decay_text(const DecayReport& d, double lambda, double area) {
  std::ostringstream os;
  os << std::setprecision(8);
  os << "decay check: " << (d.pass ? "pass" : "fail") << '\n'
     << "  lambda            " << lambda << '\n'
     << "  area              " << area << '\n'
     << "  max ratio         " << d.max_ratio << '\n'
     << "  tail slope        " << d.tail_slope << '\n'
     << "  slope / -lambda   " << d.slope_ratio << '\n';
  if (d.first_violation) os << "  first violation t " << *d.first_violation << '\n';
  return os.str();
}

std::string diagnostics_csv(const DiagnosticsReport& d) {
  auto os = csv_stream();
  os << "flux_mean,flux_deviation,flux_absolute,radial,dominant_mode,nonradial_ratio,nonradial_energy,"
        "identity_residual,empty_core,shell_connected_and_unique,discrete_core,sigma_one_only_on_shell\n";
  os << d.flux.mean << ',' << d.flux.deviation << ',' << yes_no(d.flux.absolute) << ','
     << yes_no(d.radiality.radial) << ',' << d.radiality.dominant_mode << ',' << d.radiality.ratio << ','
     << d.nonradial_energy << ',' << d.identity.value << ',' << yes_no(d.identity.empty_core) << ','
     << yes_no(d.flags.shell_connected_and_unique) << ',' << yes_no(d.flags.discrete_core) << ','
     << yes_no(d.flags.sigma_one_only_on_shell) << '\n';
  return os.str();
}

std::string diagnostics_text(const DiagnosticsReport& d) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "flux residual        mean " << d.flux.mean << ", deviation " << d.flux.deviation
     << (d.flux.absolute ? " (absolute)" : " (relative)") << '\n'
     << "radiality            " << (d.radiality.radial ? "radial" : "non-radial") << ", E_perp/E_total "
     << d.radiality.ratio;
  if (!d.radiality.radial) os << ", dominant mode " << d.radiality.dominant_mode;
  os << '\n'
     << "transmission identity " << d.identity.value << (d.identity.empty_core ? " (empty core)" : "") << '\n'
     << "hypotheses           shell connected " << yes_no(d.flags.shell_connected_and_unique) << ", discrete "
     << yes_no(d.flags.discrete_core) << ", sigma=1 only on shell " << yes_no(d.flags.sigma_one_only_on_shell)
     << '\n';
  return os.str();
}

std::string summary_header() {
  return "scenario,resolution,pipeline,expectation,shell_connected_and_unique,discrete_core,"
         "sigma_one_only_on_shell,vertices,triangles,flux_mean,expected_flux_mean,flux_deviation,"
         "nonradial_ratio,dominant_mode,identity_residual,oracle_l2_error,oracle_center_error,lambda,"
         "decay_max_ratio,slope_ratio,v_relative_error,tail_bound,extension_change,probe_dev_u,"
         "probe_dev_flux,verdicts,status\n";
}

std::string summary_row(const Report& r) {
  auto os = csv_stream();
  os << r.scenario << ',' << r.resolution << ',' << to_string(r.pipeline) << ',' << to_string(r.expectation)
     << ',' << yes_no(r.flags.shell_connected_and_unique) << ',' << yes_no(r.flags.discrete_core) << ','
     << yes_no(r.flags.sigma_one_only_on_shell) << ',';
  if (r.elliptic) {
    const auto& e = *r.elliptic;
    os << e.vertices << ',' << e.triangles << ',' << e.boundary_flux_mean << ',' << e.expected_flux_mean << ','
       << e.flux.deviation << ',' << e.radiality.ratio << ',' << e.radiality.dominant_mode << ','
       << e.identity.value << ',' << optional_number(e.oracle_l2_error) << ','
       << optional_number(e.oracle_center_error) << ',';
  } else {
    for (int i = 0; i < 10; ++i) os << "not-run,";
  }
  if (r.parabolic) {
    const auto& p = *r.parabolic;
    double du = 0.0, df = 0.0;
    for (const auto& pr : p.probes) {
      du = std::max(du, pr.max_dev_u);
      df = std::max(df, pr.max_dev_flux);
    }
    os << p.lambda << ',' << p.decay.max_ratio << ',' << p.decay.slope_ratio << ',' << p.v_relative_error << ','
       << p.tail_bound << ',' << p.extension_change << ',';
    if (p.probes.empty())
      os << "not-run,not-run,";
    else
      os << du << ',' << df << ',';
  } else {
    for (int i = 0; i < 8; ++i) os << "not-run,";
  }
  std::string verdicts;
  for (const auto& v : r.verdicts) verdicts += (verdicts.empty() ? "" : ";") + v.check + "=" + to_string(v.verdict);
  os << verdicts << ',' << (r.ok() ? "ok" : "mismatch") << '\n';
  return os.str();
}

std::string format_text_report(const Report& r, bool with_timings) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "scenario     " << r.scenario << '\n'
     << "resolution   " << r.resolution << '\n'
     << "pipeline     " << to_string(r.pipeline) << '\n'
     << "expectation  " << to_string(r.expectation) << '\n'
     << "hypotheses   shell_connected_and_unique=" << yes_no(r.flags.shell_connected_and_unique)
     << " discrete_core=" << yes_no(r.flags.discrete_core)
     << " sigma_one_only_on_shell=" << yes_no(r.flags.sigma_one_only_on_shell) << "\n\n";

  if (r.elliptic) {
    const auto& e = *r.elliptic;
    os << "elliptic\n"
       << "  mesh                 " << e.vertices << " vertices, " << e.triangles << " triangles, area "
       << e.mesh_area << '\n'
       << "  outer flux           mean " << e.outer.mean << ", stddev " << e.outer.stddev << ", max deviation "
       << e.outer.max_deviation << '\n';
    if (e.inner)
      os << "  inner flux           mean " << e.inner->mean << ", stddev " << e.inner->stddev << '\n';
    os << "  boundary flux mean   " << e.boundary_flux_mean << " (expected " << e.expected_flux_mean << ")\n"
       << "  flux deviation       " << e.flux.deviation << '\n'
       << "  radiality            " << (e.radiality.radial ? "radial" : "non-radial") << ", ratio "
       << e.radiality.ratio << ", dominant mode " << e.radiality.dominant_mode << '\n'
       << "  identity residual    " << e.identity.value << (e.identity.empty_core ? " (empty core)" : "") << '\n'
       << "  discrete positivity  " << yes_no(e.discrete_positive) << '\n';
    if (e.oracle_l2_error) os << "  L2 error vs radial   " << *e.oracle_l2_error << '\n';
    if (e.oracle_center_error) os << "  center error         " << *e.oracle_center_error << '\n';
    os << '\n';
  }
  if (r.parabolic) {
    const auto& p = *r.parabolic;
    os << "parabolic\n"
       << "  lambda               " << p.lambda << " (" << p.eigen_iterations << " iterations)\n"
       << "  decay                " << (p.decay.pass ? "pass" : "fail") << ", max ratio " << p.decay.max_ratio
       << ", slope ratio " << p.decay.slope_ratio << '\n'
       << "  steps                " << p.steps << ", final time " << p.final_time << '\n'
       << "  V vs elliptic        " << p.v_relative_error << '\n'
       << "  tail bound           " << p.tail_bound << ", extension change " << p.extension_change << '\n'
       << "  V boundary flux mean " << p.v_flux_mean << '\n'
       << "  dissipativity        " << p.dissipativity_violations << " increasing steps\n";
    for (std::size_t i = 0; i < p.probes.size(); ++i) {
      const auto& pr = p.probes[i];
      os << "  probe " << i << "              dev u " << pr.max_dev_u << ", dev flux " << pr.max_dev_flux
         << " (resolved records: dev u " << pr.resolved_dev_u << ", dev flux " << pr.resolved_dev_flux << ")"
         << ", distance condition " << yes_no(pr.check.distance_condition) << '\n';
    }
    os << '\n';
  }
  os << "verdicts\n";
  for (const auto& v : r.verdicts) {
    os << "  " << std::left << std::setw(22) << v.check << std::setw(8) << to_string(v.verdict);
    if (!v.detail.empty()) os << v.detail;
    os << '\n';
  }
  os << "status       " << (r.ok() ? "ok" : "mismatch") << '\n';
  if (with_timings)
    os << "timings      elliptic " << r.elliptic_seconds << " s, parabolic " << r.parabolic_seconds << " s\n";
  return os.str();
}

std::string merge_summaries(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::invalid_argument(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto f = entry.path() / "summary.csv";
    if (entry.is_directory() && std::filesystem::exists(f)) files.push_back(f);
  }
  std::sort(files.begin(), files.end());
  std::string out = summary_header();
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line))
      if (!line.empty()) out += line + '\n';
  }
  return out;
}

}  // namespace phaselab
