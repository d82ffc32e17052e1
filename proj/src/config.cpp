// Scenario files are line-oriented "key = value" pairs; '#' starts a comment.
// The full schema is documented in README.md.

#include "phaselab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace phaselab {

namespace {

struct ParseError : std::invalid_argument {
  ParseError(int line, const std::string& what)
      : std::invalid_argument("line " + std::to_string(line) + ": " + what) {}
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> numbers(const std::string& value, int line) {
  std::istringstream is(value);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ParseError(line, "not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

double number(const std::string& value, int line) {
  const auto v = numbers(value, line);
  if (v.size() != 1) throw ParseError(line, "expected one number, got '" + value + "'");
  return v.front();
}

int integer(const std::string& value, int line) {
  const double v = number(value, line);
  if (v != static_cast<int>(v)) throw ParseError(line, "expected an integer, got '" + value + "'");
  return static_cast<int>(v);
}

PhaseRegion parse_phase(const std::string& value, int line) {
  std::istringstream is(value);
  std::string kind;
  is >> kind;
  std::string rest;
  std::getline(is, rest);
  const auto v = numbers(rest, line);
  if (kind == "disk") {
    if (v.size() != 5) throw ParseError(line, "disk phase needs: id cx cy radius sigma");
    return {static_cast<int>(v[0]), Disk{Point(v[1], v[2]), v[3]}, v[4]};
  }
  if (kind == "ring") {
    if (v.size() != 6) throw ParseError(line, "ring phase needs: id cx cy inner outer sigma");
    return {static_cast<int>(v[0]), Ring{Point(v[1], v[2]), v[3], v[4]}, v[5]};
  }
  throw ParseError(line, "unknown phase kind '" + kind + "' (disk|ring)");
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& default_name) {
  std::map<std::string, std::pair<std::string, int>> single;
  std::vector<std::pair<std::string, int>> phase_lines, probe_lines;
  static const std::vector<std::string> known = {
      "name",       "domain",   "radius",   "inner_radius",   "outer_radius",      "center",
      "sigma_min",  "sigma_max", "source",  "resolution",     "pipeline",          "expect",
      "expect_hypotheses", "output_dir", "spectrum_radii", "epsilon", "theta"};

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ParseError(line_no, "empty value for '" + key + "'");
    if (key == "phase") {
      phase_lines.emplace_back(value, line_no);
    } else if (key == "probe") {
      probe_lines.emplace_back(value, line_no);
    } else if (std::find(known.begin(), known.end(), key) != known.end()) {
      if (single.contains(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
      single[key] = {value, line_no};
    } else {
      throw ParseError(line_no, "unknown key '" + key + "'");
    }
  }

  auto get = [&](const std::string& key) -> const std::pair<std::string, int>* {
    const auto it = single.find(key);
    return it == single.end() ? nullptr : &it->second;
  };

  Point center = Point::Zero();
  if (const auto* c = get("center")) {
    const auto v = numbers(c->first, c->second);
    if (v.size() != 2) throw ParseError(c->second, "center needs two numbers");
    center = Point(v[0], v[1]);
  }

  const std::string kind = get("domain") ? get("domain")->first : "ball";
  std::optional<DomainSpec> domain;
  if (kind == "ball") {
    for (const char* k : {"inner_radius", "outer_radius"})
      if (const auto* e = get(k)) throw ParseError(e->second, std::string(k) + " applies to annulus domains");
    const double R = get("radius") ? number(get("radius")->first, get("radius")->second) : 1.0;
    if (!(R > 0.0)) throw std::invalid_argument("ball radius must be positive");
    domain.emplace(Ball{R}, center);
  } else if (kind == "annulus") {
    if (const auto* e = get("radius")) throw ParseError(e->second, "radius applies to ball domains");
    const auto* a = get("inner_radius");
    const auto* b = get("outer_radius");
    if (!a || !b) throw std::invalid_argument("annulus domains need inner_radius and outer_radius");
    const double r1 = number(a->first, a->second), r2 = number(b->first, b->second);
    if (!(r1 > 0.0 && r1 < r2)) throw std::invalid_argument("annulus radii must satisfy 0 < inner < outer");
    domain.emplace(Annulus{r1, r2}, center);
  } else {
    throw ParseError(get("domain")->second, "unknown domain '" + kind + "' (ball|annulus)");
  }

  SigmaBounds bounds;
  if (const auto* e = get("sigma_min")) bounds.min = number(e->first, e->second);
  if (const auto* e = get("sigma_max")) bounds.max = number(e->first, e->second);

  std::vector<PhaseRegion> phases;
  for (const auto& [v, l] : phase_lines) phases.push_back(parse_phase(v, l));

  Scenario sc{.name = get("name") ? get("name")->first : default_name,
              .config = PhaseConfig(*domain, std::move(phases), bounds),
              .source = RadialProfiled::constant(2, domain->inner_radius(), domain->outer_radius(), 1.0)};

  if (const auto* e = get("source")) {
    const auto c = numbers(e->first, e->second);
    if (c.empty()) throw ParseError(e->second, "source needs at least one coefficient");
    sc.source = RadialProfiled::polynomial(2, domain->inner_radius(), domain->outer_radius(), c);
  }
  if (const auto* e = get("resolution")) sc.resolution = integer(e->first, e->second);
  if (sc.resolution < 4) throw std::invalid_argument("resolution must be >= 4");
  if (const auto* e = get("pipeline")) {
    try {
      sc.pipeline = parse_pipeline(e->first);
    } catch (const std::invalid_argument& ex) {
      throw ParseError(e->second, ex.what());
    }
  }
  if (const auto* e = get("expect")) {
    if (e->first == "symmetric")
      sc.expectation = Expectation::Symmetric;
    else if (e->first == "asymmetric")
      sc.expectation = Expectation::Asymmetric;
    else
      throw ParseError(e->second, "expect must be symmetric or asymmetric");
  }
  if (const auto* e = get("expect_hypotheses")) {
    if (e->first != "hold" && e->first != "violated")
      throw ParseError(e->second, "expect_hypotheses must be hold or violated");
    sc.expect_hypotheses_hold = e->first == "hold";
  }
  if (const auto* e = get("output_dir")) sc.output_dir = e->first;
  if (const auto* e = get("spectrum_radii")) sc.spectrum_radii = numbers(e->first, e->second);
  if (const auto* e = get("epsilon")) sc.heat.epsilon = number(e->first, e->second);
  if (const auto* e = get("theta")) sc.heat.theta = number(e->first, e->second);

  if (probe_lines.empty()) {
    sc.probes.push_back(SurfaceSpec{center, 0.75 * domain->outer_radius()});
  } else {
    for (const auto& [v, l] : probe_lines) sc.probes.push_back(SurfaceSpec{center, number(v, l)});
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open configuration " + path.string());
  try {
    return parse_scenario(in, path.stem().string());
  } catch (const std::invalid_argument& ex) {
    throw std::invalid_argument(path.string() + ": " + ex.what());
  }
}

}  // namespace phaselab
