#include "phaselab/scenario.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace phaselab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("phaselab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "from_text");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const std::invalid_argument& ex) {
    return ex.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("configuration files") {
    const auto sc = parse(R"(# two disks
name = pair
domain = ball
radius = 1.0
phase = disk 1 -0.4 0 0.15 2.0
phase = disk 2 0.4 0 0.15 0.5   # trailing comment
source = 1 0.5
resolution = 24
pipeline = both
expect = asymmetric
probe = 0.8
probe = 0.9
)");
    CHECK(sc.name == "pair");
    CHECK(sc.config.phases().size() == 2);
    CHECK(sc.config.sigma_of(2) == 0.5);
    CHECK(sc.source.value(0.5) == doctest::Approx(1.25));
    CHECK(sc.resolution == 24);
    CHECK(sc.pipeline == Pipeline::Both);
    CHECK(sc.expectation == Expectation::Asymmetric);
    REQUIRE(sc.probes.size() == 2);
    CHECK(sc.probes[1].radius == 0.9);

    const auto defaults = parse("phase = ring 1 0 0 0.3 0.5 3\n");
    CHECK(defaults.name == "from_text");
    CHECK(defaults.resolution == 64);
    CHECK(defaults.probes.size() == 1);
    CHECK(defaults.probes[0].radius == 0.75);

    const auto ann = parse("domain = annulus\ninner_radius = 0.5\nouter_radius = 2\ncenter = 1 -1\n");
    CHECK_FALSE(ann.config.domain().is_ball());
    CHECK(ann.config.domain().center() == Point(1, -1));
    CHECK(ann.probes[0].radius == 1.5);
  }

  TEST_CASE("configuration errors name the line") {
    CHECK(error_of("resolution = 32\ncolour = red\n").find("line 2: unknown key 'colour'") != std::string::npos);
    CHECK(error_of("name = a\nname = b\n").find("line 2: duplicate key") != std::string::npos);
    CHECK(error_of("radius = one\n").find("line 1: not a number") != std::string::npos);
    CHECK(error_of("phase = square 1 0 0 1 2\n").find("line 1: unknown phase kind") != std::string::npos);
    CHECK(error_of("just words\n").find("line 1: expected 'key = value'") != std::string::npos);
    CHECK(error_of("resolution = 2.5\n").find("integer") != std::string::npos);
    CHECK(error_of("domain = annulus\nouter_radius = 1\n").find("inner_radius") != std::string::npos);
    CHECK(error_of("phase = disk 1 0.8 0 0.3 2\n").find("contained") != std::string::npos);
    CHECK_THROWS_AS(load_scenario("/nonexistent/file.cfg"), std::invalid_argument);
  }

  TEST_CASE("presets") {
    const auto names = preset_names();
    CHECK(names.size() == 6);
    for (const auto& n : names) {
      const auto sc = preset(n);
      CHECK(sc.name == n);
      CHECK_FALSE(sc.probes.empty());
    }
    CHECK(preset("two_phase_displaced").expectation == Expectation::Asymmetric);
    CHECK_FALSE(preset("nested_rings_hypothesis_violation").expect_hypotheses_hold);
    for (int k = 2; k <= 6; ++k) {
      const auto sc = preset("multiphase_discrete", PresetOptions{.phases = k});
      CHECK(sc.config.phases().size() == static_cast<std::size_t>(k));
      CHECK(check_discreteness(sc.config).discrete);
    }
    CHECK_THROWS_AS(preset("multiphase_discrete", PresetOptions{.phases = 7}), std::invalid_argument);
    try {
      preset("nope");
      FAIL("expected an error");
    } catch (const std::invalid_argument& ex) {
      CHECK(std::string(ex.what()).find("two_phase_concentric") != std::string::npos);
    }
  }

  TEST_CASE("elliptic run of the concentric preset matches the radial solution") {
    auto sc = preset("two_phase_concentric");
    sc.resolution = 32;
    const auto r = run_scenario(sc, false);
    CHECK(r.ok());
    REQUIRE(r.elliptic);
    REQUIRE(r.elliptic->oracle_center_error);
    CHECK(*r.elliptic->oracle_center_error < 5e-3);
    CHECK(r.elliptic->expected_flux_mean == doctest::Approx(-0.5));
    CHECK(r.find("flux_symmetry")->verdict == Verdict::Pass);
    CHECK(r.find("decay")->verdict == Verdict::NotRun);
    CHECK(r.find("missing") == nullptr);
  }

  TEST_CASE("hypothesis violation is the expected outcome for nested rings") {
    auto sc = preset("nested_rings_hypothesis_violation");
    sc.resolution = 24;
    const auto r = run_scenario(sc, false);
    CHECK_FALSE(r.flags.shell_connected_and_unique);
    CHECK(r.find("hypotheses")->verdict == Verdict::Pass);
  }

  TEST_CASE("artifacts are deterministic and merge into one table") {
    const auto root = scratch("determinism");
    auto sc = preset("two_phase_displaced");
    sc.resolution = 16;
    sc.pipeline = Pipeline::Both;
    sc.output_dir = root / "a";
    run_scenario(sc);
    sc.output_dir = root / "b";
    run_scenario(sc);
    int compared = 0;
    for (const auto& e : fs::directory_iterator(root / "a" / sc.name)) {
      const auto name = e.path().filename();
      CHECK_MESSAGE(slurp(e.path()) == slurp(root / "b" / sc.name / name), name.string());
      ++compared;
    }
    CHECK(compared >= 10);
    for (const char* f : {"field.csv", "flux_outer.csv", "spectrum.csv", "timeseries.csv", "decay.csv", "mesh.txt",
                          "summary.csv"})
      CHECK_MESSAGE(fs::exists(root / "a" / sc.name / f), f);
    CHECK(slurp(root / "a" / sc.name / "field.csv").rfind("vertex_id,x,y,value\n", 0) == 0);

    auto other = preset("one_phase_disk");
    other.resolution = 8;
    other.output_dir = root / "a";
    run_scenario(other);
    const auto merged = merge_summaries(root / "a");
    std::istringstream lines(merged);
    std::string header, first, second, extra;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, second);
    CHECK(header + "\n" == summary_header());
    CHECK(first.rfind("one_phase_disk,", 0) == 0);
    CHECK(second.rfind("two_phase_displaced,", 0) == 0);
    CHECK_FALSE(std::getline(lines, extra));
    fs::remove_all(root);
  }

  TEST_CASE("runtime errors are reported with the scenario name") {
    auto sc = preset("one_phase_disk");
    sc.resolution = 8;
    sc.pipeline = Pipeline::Parabolic;
    sc.probes = {SurfaceSpec{Point::Zero(), 1.5}};
    try {
      run_scenario(sc, false);
      FAIL("expected an error");
    } catch (const std::runtime_error& ex) {
      CHECK(std::string(ex.what()).find("scenario 'one_phase_disk'") != std::string::npos);
    }
  }

  TEST_CASE("command-line exit codes") {
    const char* cli = std::getenv("PHASELAB_CLI");
    if (!cli) {
      MESSAGE("PHASELAB_CLI not set; skipping");
      return;
    }
    const auto root = scratch("cli");
    auto code = [&](const std::string& args) {
      const int status = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
      return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    const std::string out = " --out " + (root / "out").string();
    CHECK(code("list-presets") == 0);
    CHECK(code("preset two_phase_concentric --n 24" + out) == 0);
    CHECK(code("preset two_phase_displaced --n 24" + out) == 1);
    CHECK(code("preset nonexistent" + out) == 2);
    CHECK(code("preset one_phase_disk --n 2") != 0);
    {
      std::ofstream(root / "bad.cfg") << "radius = 1\nwibble = 3\n";
      std::ofstream(root / "good.cfg") << "phase = disk 1 0 0 0.4 3\nresolution = 16\n";
    }
    CHECK(code("run " + (root / "bad.cfg").string() + out) == 2);
    CHECK(code("run " + (root / "good.cfg").string() + out) == 0);
    CHECK(fs::exists(root / "out" / "good" / "summary.csv"));
    CHECK(code("report --merge " + (root / "out").string()) == 0);
    fs::remove_all(root);
  }
}
