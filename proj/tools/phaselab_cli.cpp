// phaselab command-line runner.
//
//   phaselab run <config>...            run scenario files concurrently
//   phaselab preset <name> [options]    run a built-in scenario
//   phaselab list-presets
//   phaselab report --merge <dir>       concatenate summary rows
//
// Exit codes: 0 every verdict matches the scenario's expectation,
// 1 some verdict does not, 2 usage or runtime error.

#include "phaselab/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <future>
#include <iostream>

namespace {

using namespace phaselab;

// --out beats the environment, which beats the scenario's own setting.
void apply_output_dir(Scenario& sc, const std::string& cli_out) {
  if (!cli_out.empty()) {
    sc.output_dir = cli_out;
  } else if (const char* env = std::getenv("PHASELAB_OUT"); env && *env) {
    sc.output_dir = env;
  }
}

int report_outcome(const Report& r) {
  std::cout << format_text_report(r) << '\n';
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-phase torsion and heat-flow symmetry laboratory"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out;
  auto* run = app.add_subcommand("run", "Run scenario configuration files");
  run->add_option("configs", configs, "Scenario files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (overrides PHASELAB_OUT and the file)");

  std::string preset_name, pipeline = "elliptic";
  int n = 64, k = 3;
  auto* pre = app.add_subcommand("preset", "Run a built-in scenario");
  pre->add_option("name", preset_name, "Preset name")->required();
  pre->add_option("--n", n, "Mesh resolution")->check(CLI::Range(4, 4096));
  pre->add_option("--pipeline", pipeline, "elliptic|parabolic|both")
      ->check(CLI::IsMember({"elliptic", "parabolic", "both"}));
  pre->add_option("--out", out, "Output directory (overrides PHASELAB_OUT)");
  pre->add_option("--k", k, "Number of disks for multiphase_discrete")->check(CLI::Range(2, 6));

  auto* list = app.add_subcommand("list-presets", "List built-in scenarios");

  std::string merge_dir;
  auto* rep = app.add_subcommand("report", "Summarize earlier runs");
  rep->add_option("--merge", merge_dir, "Directory holding per-scenario outputs")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& name : preset_names()) std::cout << name << '\n';
      return 0;
    }
    if (*rep) {
      std::cout << merge_summaries(merge_dir);
      return 0;
    }
    if (*pre) {
      Scenario sc = preset(preset_name, PresetOptions{.phases = k});
      sc.resolution = n;
      sc.pipeline = parse_pipeline(pipeline);
      apply_output_dir(sc, out);
      return report_outcome(run_scenario(sc));
    }

    std::vector<Scenario> scenarios;
    for (const auto& path : configs) {
      scenarios.push_back(load_scenario(path));
      apply_output_dir(scenarios.back(), out);
    }
    for (std::size_t i = 0; i < scenarios.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (scenarios[i].name == scenarios[j].name)
          throw std::invalid_argument("duplicate scenario name '" + scenarios[i].name + "' in batch");

    std::vector<std::future<Report>> jobs;
    for (const auto& sc : scenarios)
      jobs.push_back(std::async(std::launch::async, [&sc] { return run_scenario(sc); }));
    int code = 0;
    for (auto& job : jobs) {
      try {
        code = std::max(code, report_outcome(job.get()));
      } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        code = 2;
      }
    }
    return code;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
}
