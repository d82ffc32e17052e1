#pragma once

#include "phaselab/fem.hpp"
#include "phaselab/geometry.hpp"
#include "phaselab/parabolic.hpp"
#include "phaselab/radial.hpp"
#include "phaselab/symmetry.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phaselab {

enum class Pipeline { Elliptic, Parabolic, Both };
enum class Expectation { Symmetric, Asymmetric };
enum class Verdict { Pass, Fail, NotRun };

std::string to_string(Pipeline p);
std::string to_string(Expectation e);
std::string to_string(Verdict v);
Pipeline parse_pipeline(std::string_view s);

/// Thresholds a run is judged against.
struct Thresholds {
  double flux_symmetric = kFluxSymmetryTol;  ///< flux deviation below this on symmetric presets
  double flux_asymmetric = 5e-2;             ///< and above this on asymmetric ones
  double radiality = kRadialityTol;
  double identity_symmetric = kIdentityTol;
  double identity_asymmetric = 5e-2;
  double divergence = 1e-2;  ///< relative error of the boundary flux mean
  double probe_symmetric = 2e-2;
  double probe_asymmetric = 5e-2;
  double decay_slack = 2e-2;
  double time_integral = 2e-2;  ///< ||V - v||_M / ||v||_M
};

struct Scenario {
  std::string name;
  PhaseConfig config;
  RadialProfiled source;
  int resolution = 64;
  Pipeline pipeline = Pipeline::Elliptic;
  std::vector<SurfaceSpec> probes{};
  std::vector<double> spectrum_radii{};
  std::filesystem::path output_dir = "phaselab_out";
  Expectation expectation = Expectation::Symmetric;
  bool expect_hypotheses_hold = true;
  HeatRunOptions heat{};
  Thresholds thresholds{};
};

struct PresetOptions {
  int phases = 3;  ///< number of disks for multiphase_discrete, 2..6
};

std::vector<std::string> preset_names();

/// Deterministic preset scenarios; throws std::invalid_argument listing the
/// known names for anything else.
Scenario preset(std::string_view name, const PresetOptions& options = {});

struct EllipticSummary {
  int vertices = 0;
  int triangles = 0;
  double mesh_area = 0.0;
  FluxTrace outer;
  std::optional<FluxTrace> inner;
  double boundary_flux_mean = 0.0;     ///< over all boundary components
  double expected_flux_mean = 0.0;     ///< -(int g) / |boundary| on the continuum domain
  FluxResidual flux;                    ///< outer component
  ModeSpectrum spectrum;
  RadialityVerdict radiality;
  IdentityResidual identity;
  bool discrete_positive = true;        ///< all interior nodal values > 0
  std::optional<double> oracle_l2_error;    ///< vs the exact radial solution (concentric only)
  std::optional<double> oracle_center_error;
  std::optional<RadialProfiled> radial_solution;
};

struct ParabolicSummary {
  double lambda = 0.0;
  double area = 0.0;  ///< discrete |Omega| used by the decay bound
  int eigen_iterations = 0;
  DecayReport decay;
  double v_relative_error = 0.0;
  double tail_bound = 0.0;
  double extension_change = 0.0;
  double final_time = 0.0;
  int steps = 0;
  int dissipativity_violations = 0;
  double v_flux_mean = 0.0;
  std::vector<ProbeReport> probes;
};

struct VerdictEntry {
  std::string check;
  Verdict verdict = Verdict::NotRun;
  std::string detail;
};

struct Report {
  std::string scenario;
  int resolution = 0;
  Pipeline pipeline = Pipeline::Elliptic;
  Expectation expectation = Expectation::Symmetric;
  HypothesisFlags flags;
  std::optional<EllipticSummary> elliptic;
  std::optional<ParabolicSummary> parabolic;
  std::vector<VerdictEntry> verdicts;
  double elliptic_seconds = 0.0;
  double parabolic_seconds = 0.0;

  /// Every verdict passes or was not run.
  bool ok() const;
  const VerdictEntry* find(std::string_view check) const;
};

/// Full pipeline: validate, mesh, assemble, solve, diagnostics and, when
/// selected, the heat run. Writes artifacts under output_dir/name when
/// `write_files` is set.
Report run_scenario(const Scenario& scenario, bool write_files = true);

/// Radial conductivity profile of a concentric Disk/Ring configuration.
std::optional<RadialProfiled> radial_conductivity(const PhaseConfig& config, int dimension = 2);

// Report serialization (report.cpp).
std::string summary_header();
std::string summary_row(const Report& report);
std::string format_text_report(const Report& report, bool with_timings = true);
/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string spectrum_csv(const ModeSpectrum& spectrum);
std::string flux_csv(const FluxTrace& trace);
std::string field_csv(const Field& field);
std::string profile_csv(const RadialProfiled& profile);
std::string timeseries_csv(const TimeSeries& series, std::optional<std::size_t> surface);
std::string decay_csv(const TimeSeries& series, double lambda, double area);
std::string decay_text(const DecayReport& decay, double lambda, double area);
std::string diagnostics_csv(const DiagnosticsReport& d);
std::string diagnostics_text(const DiagnosticsReport& d);

/// Concatenates summary.csv rows found in the immediate subdirectories of
/// `dir` (sorted by name) under one header.
std::string merge_summaries(const std::filesystem::path& dir);

// Configuration files (config.cpp).

/// Key-value scenario file; unknown keys are rejected with their line number.
Scenario parse_scenario(std::istream& in, const std::string& default_name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace phaselab
