#include "phaselab/geometry.hpp"

#include "phaselab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace phaselab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kContactTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double dist_point_to_ring(const Ring& ring, const Point& p) {
  const double d = (p - ring.center).norm();
  if (d < ring.inner) return ring.inner - d;
  if (d > ring.outer) return d - ring.outer;
  return 0.0;
}

// Signed gap between two closed analytic phases: > 0 separated, 0 touching,
// < 0 overlapping interiors.
double gap_between(const PhaseShape& a, const PhaseShape& b) {
  return std::visit(
      overloaded{
          [](const Disk& x, const Disk& y) {
            return (x.center - y.center).norm() - x.radius - y.radius;
          },
          [](const Disk& x, const Ring& y) { return dist_point_to_ring(y, x.center) - x.radius; },
          [](const Ring& x, const Disk& y) { return dist_point_to_ring(x, y.center) - y.radius; },
          [](const Ring& x, const Ring& y) {
            if ((x.center - y.center).norm() > 0.0)
              throw std::invalid_argument("non-concentric ring phases are not supported");
            return std::max(y.inner - x.outer, x.inner - y.outer);
          },
          [](const auto&, const auto&) -> double {
            throw std::invalid_argument("element-set phases cannot be mixed with analytic phases");
          }},
      a, b);
}

// Minimum over the closed phase of the distance to the domain boundary, signed:
// negative or zero means the phase is not compactly contained.
double clearance(const DomainSpec& domain, const PhaseShape& shape) {
  const double R = domain.outer_radius();
  const double R1 = domain.inner_radius();
  return std::visit(
      overloaded{
          [&](const Disk& d) {
            const double c = (d.center - domain.center()).norm();
            double gap = R - (c + d.radius);
            if (!domain.is_ball()) gap = std::min(gap, c - d.radius - R1);
            return gap;
          },
          [&](const Ring& r) {
            const double c = (r.center - domain.center()).norm();
            double gap = R - (c + r.outer);
            if (!domain.is_ball()) {
              double inner_gap;
              if (c <= r.inner)
                inner_gap = r.inner - c - R1;
              else if (c < r.outer)
                inner_gap = -R1;
              else
                inner_gap = c - r.outer - R1;
              gap = std::min(gap, inner_gap);
            }
            return gap;
          },
          [](const ElementSet&) { return 1.0; }},
      shape);
}

bool inside_open(const PhaseShape& shape, const Point& p, bool& on_interface) {
  on_interface = false;
  return std::visit(
      overloaded{
          [&](const Disk& d) {
            const double r = (p - d.center).norm();
            if (std::abs(r - d.radius) <= kContactTol * std::max(1.0, d.radius)) {
              on_interface = true;
              return false;
            }
            return r < d.radius;
          },
          [&](const Ring& g) {
            const double r = (p - g.center).norm();
            const double tol = kContactTol * std::max(1.0, g.outer);
            if (std::abs(r - g.inner) <= tol || std::abs(r - g.outer) <= tol) {
              on_interface = true;
              return false;
            }
            return r > g.inner && r < g.outer;
          },
          [&](const ElementSet& s) {
            PointLocator locator(*s.mesh);
            const auto hits = locator.locate_all(p);
            std::size_t in = 0;
            for (int t : hits)
              if (std::find(s.triangles.begin(), s.triangles.end(), t) != s.triangles.end()) ++in;
            if (in > 0 && in < hits.size()) on_interface = true;
            return in > 0 && in == hits.size();
          }},
      shape);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

bool all_element_sets(const std::vector<PhaseRegion>& phases) {
  return !phases.empty() && std::all_of(phases.begin(), phases.end(), [](const PhaseRegion& r) {
    return std::holds_alternative<ElementSet>(r.shape);
  });
}

}  // namespace

DomainSpec::DomainSpec(Ball ball, Point center) : kind_(ball), center_(std::move(center)) {
  if (!(ball.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
}

DomainSpec::DomainSpec(Annulus annulus, Point center) : kind_(annulus), center_(std::move(center)) {
  if (!(annulus.inner > 0.0) || !(annulus.inner < annulus.outer))
    throw std::invalid_argument("annulus radii must satisfy 0 < R1 < R2");
}

double DomainSpec::outer_radius() const {
  return std::visit(overloaded{[](const Ball& b) { return b.radius; },
                               [](const Annulus& a) { return a.outer; }},
                    kind_);
}

double DomainSpec::inner_radius() const {
  return std::visit(overloaded{[](const Ball&) { return 0.0; },
                               [](const Annulus& a) { return a.inner; }},
                    kind_);
}

double DomainSpec::area() const {
  const double R = outer_radius(), r = inner_radius();
  return kPi * (R * R - r * r);
}

double DomainSpec::boundary_length() const {
  return 2.0 * kPi * (outer_radius() + inner_radius());
}

bool DomainSpec::contains(const Point& p) const {
  const double r = (p - center_).norm();
  return r < outer_radius() && (is_ball() || r > inner_radius());
}

double DomainSpec::distance_to_boundary(const Point& p) const {
  const double r = (p - center_).norm();
  double d = outer_radius() - r;
  if (!is_ball()) d = std::min(d, r - inner_radius());
  return d;
}

PhaseConfig::PhaseConfig(DomainSpec domain, std::vector<PhaseRegion> phases, SigmaBounds bounds)
    : domain_(std::move(domain)), phases_(std::move(phases)), bounds_(bounds) {
  if (!(bounds_.min > 0.0 && bounds_.min < 1.0 && bounds_.max > 1.0))
    throw std::invalid_argument("sigma bounds must satisfy 0 < sigma_min < 1 < sigma_max");

  const bool element_sets = all_element_sets(phases_);
  for (const auto& ph : phases_) {
    if (ph.id < 1) throw std::invalid_argument("phase ids must be >= 1");
    if (!(ph.sigma >= bounds_.min && ph.sigma <= bounds_.max))
      throw std::invalid_argument("phase " + std::to_string(ph.id) +
                                  ": sigma outside [sigma_min, sigma_max]");
    const bool is_set = std::holds_alternative<ElementSet>(ph.shape);
    if (is_set != element_sets)
      throw std::invalid_argument("element-set phases cannot be mixed with analytic phases");
    if (const auto* d = std::get_if<Disk>(&ph.shape); d && !(d->radius > 0.0))
      throw std::invalid_argument("disk phase radius must be positive");
    if (const auto* g = std::get_if<Ring>(&ph.shape); g && !(g->inner > 0.0 && g->inner < g->outer))
      throw std::invalid_argument("ring phase radii must satisfy 0 < inner < outer");
    if (const auto* s = std::get_if<ElementSet>(&ph.shape)) {
      if (!s->mesh) throw std::invalid_argument("element-set phase without mesh");
      for (int t : s->triangles)
        if (t < 0 || t >= s->mesh->num_triangles())
          throw std::invalid_argument("element-set phase references unknown triangle");
    }
    if (!(clearance(domain_, ph.shape) > 0.0))
      throw std::invalid_argument("phase " + std::to_string(ph.id) +
                                  " is not compactly contained in the domain");
  }

  for (std::size_t i = 0; i < phases_.size(); ++i) {
    for (std::size_t j = i + 1; j < phases_.size(); ++j) {
      const auto& a = phases_[i];
      const auto& b = phases_[j];
      if (a.id == b.id) {
        if (a.sigma != b.sigma)
          throw std::invalid_argument("regions of phase " + std::to_string(a.id) +
                                      " carry different sigma values");
        continue;
      }
      if (element_sets) {
        const auto& ta = std::get<ElementSet>(a.shape).triangles;
        const auto& tb = std::get<ElementSet>(b.shape).triangles;
        for (int t : ta)
          if (std::find(tb.begin(), tb.end(), t) != tb.end())
            throw std::invalid_argument("element-set phases share a triangle");
        continue;
      }
      if (gap_between(a.shape, b.shape) < -kContactTol)
        throw std::invalid_argument("phases " + std::to_string(a.id) + " and " +
                                    std::to_string(b.id) + " overlap");
    }
  }
}

double PhaseConfig::sigma_of(int id) const {
  if (id == kShellTag) return 1.0;
  for (const auto& ph : phases_)
    if (ph.id == id) return ph.sigma;
  throw std::out_of_range("unknown phase id " + std::to_string(id));
}

bool PhaseConfig::is_concentric() const {
  return std::all_of(phases_.begin(), phases_.end(), [&](const PhaseRegion& ph) {
    return std::visit(overloaded{[&](const Disk& d) { return d.center == domain_.center(); },
                                 [&](const Ring& g) { return g.center == domain_.center(); },
                                 [](const ElementSet&) { return false; }},
                      ph.shape);
  });
}

bool PhaseConfig::has_element_sets() const { return all_element_sets(phases_); }

DiscretenessResult check_discreteness(const PhaseConfig& config) {
  const auto& phases = config.phases();
  if (config.has_element_sets()) {
    // Distinct phases must not share a mesh vertex.
    std::vector<std::set<int>> verts(phases.size());
    for (std::size_t i = 0; i < phases.size(); ++i) {
      const auto& s = std::get<ElementSet>(phases[i].shape);
      for (int t : s.triangles)
        for (int v : s.mesh->triangles[t]) verts[i].insert(v);
    }
    for (std::size_t i = 0; i < phases.size(); ++i)
      for (std::size_t j = i + 1; j < phases.size(); ++j) {
        if (phases[i].id == phases[j].id) continue;
        for (int v : verts[i])
          if (verts[j].count(v)) return {false, std::make_pair(phases[i].id, phases[j].id)};
      }
    return {};
  }
  for (std::size_t i = 0; i < phases.size(); ++i)
    for (std::size_t j = i + 1; j < phases.size(); ++j) {
      if (phases[i].id == phases[j].id) continue;
      if (gap_between(phases[i].shape, phases[j].shape) <= kContactTol)
        return {false, std::make_pair(phases[i].id, phases[j].id)};
    }
  return {};
}

bool check_shell_connected(const PhaseConfig& config) {
  const auto& phases = config.phases();
  if (phases.empty()) return true;
  if (config.has_element_sets()) {
    const auto& mesh = *std::get<ElementSet>(phases.front().shape).mesh;
    Mesh tagged = mesh;
    tagged.region.assign(mesh.num_triangles(), kShellTag);
    for (const auto& ph : phases)
      for (int t : std::get<ElementSet>(ph.shape).triangles) tagged.region[t] = ph.id;
    return shell_connected_on_mesh(tagged);
  }

  // Phases have pairwise disjoint interiors (same-id overlaps aside), so the
  // complement splits exactly when the contact graph has a cycle or a ring
  // encloses a hole that no concentric disk of the same radius fills.
  for (const auto& ph : phases) {
    const auto* ring = std::get_if<Ring>(&ph.shape);
    if (!ring) continue;
    const bool filled = std::any_of(phases.begin(), phases.end(), [&](const PhaseRegion& o) {
      const auto* d = std::get_if<Disk>(&o.shape);
      return d && d->center == ring->center && std::abs(d->radius - ring->inner) <= kContactTol;
    });
    if (!filled) return false;
  }
  UnionFind uf(static_cast<int>(phases.size()));
  for (std::size_t i = 0; i < phases.size(); ++i)
    for (std::size_t j = i + 1; j < phases.size(); ++j)
      if (gap_between(phases[i].shape, phases[j].shape) <= kContactTol &&
          !uf.unite(static_cast<int>(i), static_cast<int>(j)))
        return false;
  return true;
}

PhaseConfig validate_configuration(const PhaseConfig& config) {
  PhaseConfig out = config;
  HypothesisFlags flags;
  flags.shell_connected_and_unique = check_shell_connected(config);
  flags.discrete_core = check_discreteness(config).discrete;
  flags.sigma_one_only_on_shell =
      std::none_of(config.phases().begin(), config.phases().end(),
                   [](const PhaseRegion& ph) { return ph.sigma == 1.0; });
  out.flags_ = flags;
  return out;
}

int phase_at(const PhaseConfig& config, const Point& p) {
  if (!config.domain().contains(p)) throw std::domain_error("point outside the domain");
  for (const auto& ph : config.phases()) {
    bool on_interface = false;
    const bool inside = inside_open(ph.shape, p, on_interface);
    if (on_interface) throw std::domain_error("point lies on a phase interface");
    if (inside) return ph.id;
  }
  return kShellTag;
}

double sigma_at(const PhaseConfig& config, const Point& p) {
  return config.sigma_of(phase_at(config, p));
}

double distance_to_phase(const PhaseShape& shape, const Point& p) {
  return std::visit(
      overloaded{[&](const Disk& d) { return std::max(0.0, (p - d.center).norm() - d.radius); },
                 [&](const Ring& g) { return dist_point_to_ring(g, p); },
                 [](const ElementSet&) -> double {
                   throw std::invalid_argument("distance to element-set phases is not supported");
                 }},
      shape);
}

}  // namespace phaselab
