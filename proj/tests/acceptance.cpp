// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Criteria 5, 6 and 8 share the parabolic runs; criterion 7 runs its own at a
// finer mesh because the concentric probe deviations only drop under 2e-2
// "over all recorded times" from n = 192 on (see README, known failures).

#include "phaselab/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace phaselab;
namespace fs = std::filesystem;

namespace {

constexpr double kBesselLambda = 5.7832;  // j_{0,1}^2 to four decimals
constexpr int kProbeResolution = 192;

int failures = 0;

void criterion(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s [%s]\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Timed {
  Report report;
  double seconds;
};

Timed run(Scenario sc, int n, Pipeline p, bool write = false, fs::path out = {}) {
  sc.resolution = n;
  sc.pipeline = p;
  if (write) sc.output_dir = out;
  const auto t0 = std::chrono::steady_clock::now();
  Report r = run_scenario(sc, write);
  return {std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void radial_oracle() {
  const auto coarse = run(preset("two_phase_concentric"), 32, Pipeline::Elliptic);
  const auto fine = run(preset("two_phase_concentric"), 64, Pipeline::Elliptic);
  const auto& e = *fine.report.elliptic;
  const double center = *e.oracle_center_error;
  const double order = std::log2(*coarse.report.elliptic->oracle_l2_error / *e.oracle_l2_error);
  criterion(1, center <= 2e-3 && order >= 1.8 && fine.seconds < 30.0,
            "two_phase_concentric n=64: center value within 2e-3 of 0.21875, L2 order >= 1.8 (n=32->64), < 30 s",
            "center error " + num(center) + ", order " + num(order) + ", " + num(fine.seconds) + " s");
}

void divergence_identity() {
  bool ok = true;
  std::string detail;
  for (const auto& name : preset_names()) {
    const auto r = run(preset(name), 64, Pipeline::Elliptic).report;
    const auto& e = *r.elliptic;
    const double rel = std::abs(e.boundary_flux_mean - e.expected_flux_mean) / std::abs(e.expected_flux_mean);
    ok = ok && rel <= 1e-2;
    if (name == "one_phase_disk") ok = ok && std::abs(e.expected_flux_mean + 0.5) < 1e-12;
    detail += (detail.empty() ? "" : ", ") + name + " " + num(rel);
  }
  criterion(2, ok, "mean boundary flux = -(int g)/|boundary| within 1% on every preset (n=64)", detail);
}

void dichotomy() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"one_phase_disk", "one_phase_annulus", "two_phase_concentric"}) {
    const auto& e = *run(preset(name), 64, Pipeline::Elliptic).report.elliptic;
    const bool pass = e.flux.deviation < 1e-2 && e.radiality.ratio < 1e-3 && e.identity.value < 5e-3;
    ok = ok && pass;
    detail += std::string(name) + (pass ? " ok" : " FAIL") + " (flux " + num(e.flux.deviation) + ", radial " +
              num(e.radiality.ratio) + ", identity " + num(e.identity.value) + "); ";
  }
  for (const char* name : {"two_phase_displaced", "multiphase_discrete"}) {
    std::vector<double> flux, ratio, identity;
    bool pass = true;
    for (int n : {64, 96}) {
      const auto& e = *run(preset(name), n, Pipeline::Elliptic).report.elliptic;
      pass = pass && e.flux.deviation > 5e-2 && !e.radiality.radial && e.radiality.dominant_mode == 1 &&
             e.identity.value > 5e-2;
      flux.push_back(e.flux.deviation);
      ratio.push_back(e.radiality.ratio);
      identity.push_back(e.identity.value);
    }
    for (const auto* v : {&flux, &ratio, &identity}) pass = pass && std::abs((*v)[0] - (*v)[1]) <= 0.2 * (*v)[1];
    ok = ok && pass;
    detail += std::string(name) + (pass ? " ok" : " FAIL") + " (flux " + num(flux[0]) + "/" + num(flux[1]) +
              ", radial " + num(ratio[0]) + "/" + num(ratio[1]) + ", identity " + num(identity[0]) + "/" +
              num(identity[1]) + "); ";
  }
  criterion(3, ok, "symmetric presets radial and flux-constant at n=64; asymmetric presets detected at n=64 and 96",
            detail);
}

void spectrum_exactness() {
  const std::vector<double> radii{0.1, 0.25, 0.5, 0.75, 0.95};
  const std::vector<std::function<double(const Point&)>> radial = {
      [](const Point& p) { return 1.0 - p.squaredNorm(); },
      [](const Point& p) { return std::exp(-3.0 * p.norm()); },
      [](const Point& p) { return std::log(1.0 + p.squaredNorm()) + std::pow(p.norm(), 5); },
  };
  double worst = 0.0;
  for (const auto& f : radial) worst = std::max(worst, angular_spectrum(f, Point::Zero(), radii, 16).energy_nonradial);
  const auto lin = angular_spectrum([](const Point& p) { return p.x(); }, Point::Zero(), radii, 16);
  double stray = 0.0, a1 = 0.0;
  for (Eigen::Index i = 0; i < lin.a.rows(); ++i)
    for (Eigen::Index k = 0; k < lin.a.cols(); ++k) {
      if (k == 1) {
        a1 = std::max(a1, std::abs(lin.a(i, 1) - radii[static_cast<std::size_t>(i)]));
        stray = std::max(stray, std::abs(lin.b(i, 1)));
      } else {
        stray = std::max({stray, std::abs(lin.a(i, k)), std::abs(lin.b(i, k))});
      }
    }
  criterion(4, worst <= 1e-12 && stray <= 1e-12 && a1 <= 1e-12,
            "angular spectrum: radial inputs have no nonzero-mode energy; x1 has only mode 1 (to 1e-12)",
            "radial E_perp " + num(worst) + ", x1 stray " + num(stray) + ", a1 - r " + num(a1));
}

int main_impl() {
  radial_oracle();
  divergence_identity();
  dichotomy();
  spectrum_exactness();

  // Criteria 5, 6, 8 on the two symmetric parabolic runs.
  std::vector<Timed> heat;
  for (const char* name : {"one_phase_disk", "two_phase_concentric"})
    heat.push_back(run(preset(name), 64, Pipeline::Parabolic));
  {
    bool ok = true;
    std::string detail;
    for (const auto& h : heat) {
      const auto& p = *h.report.parabolic;
      ok = ok && p.decay.pass && h.seconds < 120.0;
      detail += h.report.scenario + " max ratio " + num(p.decay.max_ratio) + " in " + num(h.seconds) + " s; ";
    }
    const double lambda = heat[0].report.parabolic->lambda;
    const double rel = std::abs(lambda - kBesselLambda) / kBesselLambda;
    ok = ok && rel < 1e-2;
    criterion(5, ok, "||u(t)||^2 <= |Omega| e^{-2 lambda t} (2% slack) at every record; disk lambda within 1% of 5.7832",
              detail + "lambda " + num(lambda) + " (rel " + num(rel) + ")");
  }
  {
    bool ok = true;
    std::string detail;
    for (const auto& h : heat) {
      const auto& p = *h.report.parabolic;
      ok = ok && p.v_relative_error < 2e-2 && p.extension_change <= p.tail_bound;
      detail += h.report.scenario + " error " + num(p.v_relative_error) + ", extension " + num(p.extension_change) +
                " <= tail " + num(p.tail_bound) + "; ";
    }
    criterion(6, ok, "time integral V matches the elliptic solve within 2% and respects the tail bound", detail);
  }

  // Criterion 7: probes on circle(0.75), literal maximum over every record with t > 0.
  const auto conc = run(preset("two_phase_concentric"), kProbeResolution, Pipeline::Parabolic);
  const auto disp = run(preset("two_phase_displaced"), kProbeResolution, Pipeline::Parabolic);
  {
    const auto& c = conc.report.parabolic->probes.at(0);
    const auto& d = disp.report.parabolic->probes.at(0);
    const bool ok = c.max_dev_u < 2e-2 && c.max_dev_flux < 2e-2 && d.max_dev_u > 5e-2 && d.max_dev_flux > 5e-2;
    criterion(7, ok,
              "probes on circle(0.75), n=" + std::to_string(kProbeResolution) +
                  ": concentric deviations < 2e-2, displaced deviations > 5e-2",
              "concentric u " + num(c.max_dev_u) + " flux " + num(c.max_dev_flux) + "; displaced u " +
                  num(d.max_dev_u) + " flux " + num(d.max_dev_flux) + " (resolved-record flux " +
                  num(d.resolved_dev_flux) + ")");
  }

  {
    int violations = 0, runs = 0;
    for (const Report* r : std::initializer_list<const Report*>{&heat[0].report, &heat[1].report, &conc.report,
                                                                  &disp.report}) {
      violations += r->parabolic->dissipativity_violations;
      ++runs;
    }
    criterion(8, violations == 0, "mass norm non-increasing at every backward-Euler step",
              std::to_string(violations) + " increases over " + std::to_string(runs) + " runs");
  }

  {
    const fs::path root = fs::temp_directory_path() / "phaselab_acceptance_determinism";
    fs::remove_all(root);
    auto sc = preset("two_phase_displaced");
    run(sc, 32, Pipeline::Both, true, root / "first");
    run(sc, 32, Pipeline::Both, true, root / "second");
    int files = 0, differing = 0;
    for (const auto& e : fs::directory_iterator(root / "first" / sc.name)) {
      ++files;
      if (slurp(e.path()) != slurp(root / "second" / sc.name / e.path().filename())) ++differing;
    }
    fs::remove_all(root);
    criterion(9, files > 0 && differing == 0, "repeated runs write byte-identical artifacts",
              std::to_string(files) + " files, " + std::to_string(differing) + " differ");
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main() {
  try {
    return main_impl();
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "acceptance aborted: %s\n", ex.what());
    return 2;
  }
}
