#include "phaselab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>

namespace phaselab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> conforming_breakpoints(const PhaseConfig& config) {
  const auto& domain = config.domain();
  std::vector<double> radii{domain.inner_radius(), domain.outer_radius()};
  for (const auto& ph : config.phases()) {
    if (const auto* d = std::get_if<Disk>(&ph.shape); d && d->center == domain.center()) {
      radii.push_back(d->radius);
    } else if (const auto* g = std::get_if<Ring>(&ph.shape); g && g->center == domain.center()) {
      radii.push_back(g->inner);
      radii.push_back(g->outer);
    }
  }
  for (double r : radii)
    if (r < domain.inner_radius() || r > domain.outer_radius())
      throw std::invalid_argument("phase radius outside the domain");
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  return radii;
}

int ring_count(double r, double h) {
  return std::max(6, 6 * static_cast<int>(std::lround(r / h)));
}

void add_triangle(Mesh& mesh, int a, int b, int c) {
  std::array<int, 3> tri{a, b, c};
  const Point& p = mesh.vertices[a];
  const Point& q = mesh.vertices[b];
  const Point& s = mesh.vertices[c];
  const double det = (q - p).x() * (s - p).y() - (q - p).y() * (s - p).x();
  if (det < 0.0) std::swap(tri[1], tri[2]);
  if (det == 0.0) throw std::logic_error("degenerate triangle in polar mesh");
  mesh.triangles.push_back(tri);
}

// Stitch two closed vertex rings whose first vertices sit at angle 0.
void stitch(Mesh& mesh, int inner_first, int a, int outer_first, int b) {
  long i = 0, k = 0;
  auto in = [&](long j) { return inner_first + static_cast<int>(j % a); };
  auto out = [&](long j) { return outer_first + static_cast<int>(j % b); };
  while (i < a || k < b) {
    // Compare angles (i+1)/a and (k+1)/b exactly in integers.
    const bool advance_inner = k == b || (i < a && (i + 1) * b <= (k + 1) * static_cast<long>(a));
    if (advance_inner) {
      add_triangle(mesh, in(i), in(i + 1), out(k));
      ++i;
    } else {
      add_triangle(mesh, in(i), out(k + 1), out(k));
      ++k;
    }
  }
}

}  // namespace

double Mesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Point e1 = vertices[tri[1]] - vertices[tri[0]];
  const Point e2 = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Point Mesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += signed_area(t);
  return a;
}

std::vector<int> Mesh::boundary_vertices() const {
  std::vector<int> ids;
  for (const auto& e : boundary_edges) {
    ids.push_back(e.a);
    ids.push_back(e.b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Mesh generate_mesh(const PhaseConfig& config, int resolution) {
  if (resolution < 4) throw std::invalid_argument("mesh resolution must be >= 4");
  const auto& domain = config.domain();
  const double h = domain.outer_radius() / resolution;
  const auto breaks = conforming_breakpoints(config);

  std::vector<double> ring_radii;
  ring_radii.push_back(breaks.front());
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    const double len = breaks[j + 1] - breaks[j];
    const int layers = std::max(1, static_cast<int>(std::lround(len / h)));
    for (int l = 1; l < layers; ++l) ring_radii.push_back(breaks[j] + len * l / layers);
    ring_radii.push_back(breaks[j + 1]);
  }

  Mesh mesh;
  mesh.spacing = h;
  const Point& o = domain.center();
  std::vector<int> first, count;
  for (double r : ring_radii) {
    first.push_back(mesh.num_vertices());
    if (r == 0.0) {
      count.push_back(1);
      mesh.vertices.push_back(o);
      continue;
    }
    const int c = ring_count(r, h);
    count.push_back(c);
    for (int j = 0; j < c; ++j) {
      const double theta = 2.0 * kPi * j / c;
      mesh.vertices.push_back(o + r * Point(std::cos(theta), std::sin(theta)));
    }
  }

  for (std::size_t l = 0; l + 1 < ring_radii.size(); ++l) {
    if (count[l] == 1) {
      const int c = count[l + 1];
      for (int j = 0; j < c; ++j) add_triangle(mesh, first[l], first[l + 1] + j, first[l + 1] + (j + 1) % c);
    } else {
      stitch(mesh, first[l], count[l], first[l + 1], count[l + 1]);
    }
  }

  const std::size_t last = ring_radii.size() - 1;
  for (int j = 0; j < count[last]; ++j)
    mesh.boundary_edges.push_back({first[last] + j, first[last] + (j + 1) % count[last], kOuterBoundary});
  if (!domain.is_ball()) {
    // Inner loop traversed clockwise so the domain stays on the left.
    for (int j = 0; j < count[0]; ++j)
      mesh.boundary_edges.push_back({first[0] + (j + 1) % count[0], first[0] + j, kInnerBoundary});
  }
  mesh.region.assign(mesh.num_triangles(), kShellTag);
  return mesh;
}

Mesh assign_phases(Mesh mesh, const PhaseConfig& config) {
  mesh.region.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) mesh.region[t] = phase_at(config, mesh.centroid(t));
  return mesh;
}

bool shell_connected_on_mesh(const Mesh& mesh) {
  std::map<std::pair<int, int>, std::vector<int>> edge_tris;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  }
  std::vector<int> comp(mesh.num_triangles(), -1);
  int ncomp = 0;
  for (int s = 0; s < mesh.num_triangles(); ++s) {
    if (mesh.region[s] != kShellTag || comp[s] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    comp[s] = ncomp;
    while (!q.empty()) {
      const int t = q.front();
      q.pop();
      const auto& tri = mesh.triangles[t];
      for (int e = 0; e < 3; ++e) {
        int a = tri[e], b = tri[(e + 1) % 3];
        for (int nb : edge_tris[{std::min(a, b), std::max(a, b)}])
          if (mesh.region[nb] == kShellTag && comp[nb] < 0) {
            comp[nb] = ncomp;
            q.push(nb);
          }
      }
    }
    ++ncomp;
  }
  if (ncomp != 1) return false;
  // The single shell component must touch every boundary edge.
  for (const auto& e : mesh.boundary_edges) {
    const auto& tris = edge_tris[{std::min(e.a, e.b), std::max(e.a, e.b)}];
    if (std::none_of(tris.begin(), tris.end(), [&](int t) { return mesh.region[t] == kShellTag; }))
      return false;
  }
  return true;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto old_prec = os.precision(17);
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges.size() << '\n';
  for (const auto& v : mesh.vertices) os << v.x() << ' ' << v.y() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    os << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << mesh.region[t] << '\n';
  }
  for (const auto& e : mesh.boundary_edges) os << e.a << ' ' << e.b << ' ' << e.tag << '\n';
  os.precision(old_prec);
}

Mesh read_mesh(std::istream& is) {
  Mesh mesh;
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(is >> nv >> nt >> nb)) throw std::runtime_error("mesh: bad header");
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices)
    if (!(is >> v.x() >> v.y())) throw std::runtime_error("mesh: bad vertex line");
  mesh.triangles.resize(nt);
  mesh.region.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    auto& tri = mesh.triangles[t];
    if (!(is >> tri[0] >> tri[1] >> tri[2] >> mesh.region[t])) throw std::runtime_error("mesh: bad triangle line");
    for (int v : tri)
      if (v < 0 || static_cast<std::size_t>(v) >= nv) throw std::runtime_error("mesh: vertex index out of range");
  }
  mesh.boundary_edges.resize(nb);
  for (auto& e : mesh.boundary_edges)
    if (!(is >> e.a >> e.b >> e.tag)) throw std::runtime_error("mesh: bad boundary line");
  return mesh;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  if (mesh.vertices.empty()) throw std::invalid_argument("empty mesh");
  Eigen::Vector2d lo = mesh.vertices.front(), hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double pad = 1e-9 * std::max(1.0, (hi - lo).maxCoeff());
  lo_ = lo.array() - pad;
  const Eigen::Vector2d ext = (hi - lo).array() + 2 * pad;
  const int per_side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
  cell_ = ext.maxCoeff() / per_side;
  nx_ = std::max(1, static_cast<int>(std::ceil(ext.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(ext.y() / cell_)));
  buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    Eigen::Vector2d tlo = mesh.vertices[mesh.triangles[t][0]], thi = tlo;
    for (int v : mesh.triangles[t]) {
      tlo = tlo.cwiseMin(mesh.vertices[v]);
      thi = thi.cwiseMax(mesh.vertices[v]);
    }
    const int x0 = std::clamp(static_cast<int>((tlo.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int x1 = std::clamp(static_cast<int>((thi.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int y0 = std::clamp(static_cast<int>((tlo.y() - lo_.y()) / cell_), 0, ny_ - 1);
    const int y1 = std::clamp(static_cast<int>((thi.y() - lo_.y()) / cell_), 0, ny_ - 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) buckets_[static_cast<std::size_t>(y) * nx_ + x].push_back(t);
  }
}

Eigen::Vector3d PointLocator::barycentric(int t, const Point& p) const {
  const auto& tri = mesh_->triangles[t];
  const Point& a = mesh_->vertices[tri[0]];
  const Point& b = mesh_->vertices[tri[1]];
  const Point& c = mesh_->vertices[tri[2]];
  const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  const double l1 = ((p - a).x() * (c - a).y() - (p - a).y() * (c - a).x()) / det;
  const double l2 = ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x()) / det;
  return {1.0 - l1 - l2, l1, l2};
}

std::vector<int> PointLocator::locate_all(const Point& p) const {
  std::vector<int> hits;
  const int x = static_cast<int>(std::floor((p.x() - lo_.x()) / cell_));
  const int y = static_cast<int>(std::floor((p.y() - lo_.y()) / cell_));
  if (x < 0 || y < 0 || x >= nx_ || y >= ny_) return hits;
  for (int t : buckets_[static_cast<std::size_t>(y) * nx_ + x])
    if (barycentric(t, p).minCoeff() >= -1e-12) hits.push_back(t);
  std::sort(hits.begin(), hits.end());
  return hits;
}

std::optional<Location> PointLocator::locate(const Point& p) const {
  const int x = static_cast<int>(std::floor((p.x() - lo_.x()) / cell_));
  const int y = static_cast<int>(std::floor((p.y() - lo_.y()) / cell_));
  if (x < 0 || y < 0 || x >= nx_ || y >= ny_) return std::nullopt;
  std::optional<Location> best;
  for (int t : buckets_[static_cast<std::size_t>(y) * nx_ + x]) {
    const Eigen::Vector3d bc = barycentric(t, p);
    if (bc.minCoeff() >= -1e-12 && (!best || t < best->triangle)) best = Location{t, bc};
  }
  return best;
}

}  // namespace phaselab
