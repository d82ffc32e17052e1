#include "phaselab/fem.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace phaselab {

namespace {

constexpr double kPi = 3.14159265358979323846;

SparseMatrix reduce(const SparseMatrix& full, const std::vector<int>& free_index, int nfree) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (int col = 0; col < full.outerSize(); ++col) {
    const int fc = free_index[col];
    if (fc < 0) continue;
    for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
      const int fr = free_index[it.row()];
      if (fr >= 0) trips.emplace_back(fr, fc, it.value());
    }
  }
  SparseMatrix out(nfree, nfree);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

Eigen::VectorXd SparseSystem::expand(const Eigen::VectorXd& free_values) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_index.size()));
  for (int i = 0; i < num_free(); ++i) full[free_nodes[i]] = free_values[i];
  return full;
}

Eigen::VectorXd SparseSystem::restrict_to_free(const Eigen::VectorXd& full_values) const {
  Eigen::VectorXd out(num_free());
  for (int i = 0; i < num_free(); ++i) out[i] = full_values[free_nodes[i]];
  return out;
}

Eigen::Vector2d Field::gradient(int t) const {
  const auto& tri = mesh->triangles[t];
  const Point& a = mesh->vertices[tri[0]];
  const Point& b = mesh->vertices[tri[1]];
  const Point& c = mesh->vertices[tri[2]];
  const double twice_area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  // grad phi_i = perp(opposite edge) / (2A), perp(x, y) = (-y, x) rotated inward.
  const Eigen::Vector2d g0(b.y() - c.y(), c.x() - b.x());
  const Eigen::Vector2d g1(c.y() - a.y(), a.x() - c.x());
  const Eigen::Vector2d g2(a.y() - b.y(), b.x() - a.x());
  return (values[tri[0]] * g0 + values[tri[1]] * g1 + values[tri[2]] * g2) / twice_area;
}

Eigen::Matrix3d element_stiffness(const Point& a, const Point& b, const Point& c, double sigma) {
  const double twice_area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  Eigen::Matrix<double, 2, 3> grads;
  grads.col(0) << b.y() - c.y(), c.x() - b.x();
  grads.col(1) << c.y() - a.y(), a.x() - c.x();
  grads.col(2) << a.y() - b.y(), b.x() - a.x();
  // sigma * A * (G^T G) / (2A)^2
  return sigma * (grads.transpose() * grads) / (2.0 * twice_area);
}

SparseSystem assemble_system(std::shared_ptr<const Mesh> mesh, const PhaseConfig& config,
                             const RadialProfiled& g) {
  if (!mesh) throw std::invalid_argument("assemble_system: null mesh");
  const int nv = mesh->num_vertices();
  if (static_cast<int>(mesh->region.size()) != mesh->num_triangles())
    throw std::invalid_argument("assemble_system: mesh has untagged triangles");

  std::map<int, double> sigma_by_tag{{kShellTag, 1.0}};
  for (const auto& ph : config.phases()) sigma_by_tag[ph.id] = ph.sigma;

  const Point& center = config.domain().center();
  std::vector<double> gv(nv);
  for (int v = 0; v < nv; ++v) gv[v] = g.value(std::clamp((mesh->vertices[v] - center).norm(), g.inner(), g.outer()));

  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * mesh->triangles.size());
  mt.reserve(9 * mesh->triangles.size());
  Eigen::VectorXd F = Eigen::VectorXd::Zero(nv);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    const auto sig = sigma_by_tag.find(mesh->region[t]);
    if (sig == sigma_by_tag.end())
      throw std::invalid_argument("assemble_system: triangle " + std::to_string(t) + " has unknown tag " +
                                  std::to_string(mesh->region[t]));
    const auto& tri = mesh->triangles[t];
    const double area = mesh->signed_area(t);
    const Eigen::Matrix3d ke =
        element_stiffness(mesh->vertices[tri[0]], mesh->vertices[tri[1]], mesh->vertices[tri[2]], sig->second);
    for (int i = 0; i < 3; ++i) {
      F[tri[i]] += area / 3.0 * gv[tri[i]];
      for (int j = 0; j < 3; ++j) {
        kt.emplace_back(tri[i], tri[j], ke(i, j));
        mt.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }

  SparseSystem sys;
  sys.mesh = mesh;
  sys.full_stiffness.resize(nv, nv);
  sys.full_stiffness.setFromTriplets(kt.begin(), kt.end());
  sys.full_mass.resize(nv, nv);
  sys.full_mass.setFromTriplets(mt.begin(), mt.end());
  sys.full_load = F;

  sys.dirichlet_nodes = mesh->boundary_vertices();
  sys.free_index.assign(nv, 0);
  for (int v : sys.dirichlet_nodes) sys.free_index[v] = -1;
  for (int v = 0; v < nv; ++v)
    if (sys.free_index[v] >= 0) {
      sys.free_index[v] = static_cast<int>(sys.free_nodes.size());
      sys.free_nodes.push_back(v);
    }
  sys.stiffness = reduce(sys.full_stiffness, sys.free_index, sys.num_free());
  sys.mass = reduce(sys.full_mass, sys.free_index, sys.num_free());
  sys.load = sys.restrict_to_free(F);
  return sys;
}

Eigen::VectorXd solve_free(const SparseSystem& system, const Eigen::VectorXd& rhs, const SolverOptions& options) {
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(options.tolerance);
  cg.setMaxIterations(options.max_iterations);
  cg.compute(system.stiffness);
  Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "conjugate gradients did not converge: relative residual " << cg.error() << " after "
        << cg.iterations() << " iterations";
    throw std::runtime_error(msg.str());
  }
  return x;
}

Field solve_elliptic(const SparseSystem& system, const SolverOptions& options) {
  return Field{system.mesh, system.expand(solve_free(system, system.load, options))};
}

FluxTrace recover_boundary_flux(const SparseSystem& system, const Field& field, int tag) {
  const Mesh& mesh = *system.mesh;
  std::map<int, double> measure;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != tag) continue;
    const double len = (mesh.vertices[e.a] - mesh.vertices[e.b]).norm();
    measure[e.a] += 0.5 * len;
    measure[e.b] += 0.5 * len;
  }
  if (measure.empty()) throw std::invalid_argument("no boundary edges with tag " + std::to_string(tag));

  const Eigen::VectorXd residual = system.full_stiffness * field.values - system.full_load;

  Point center = Point::Zero();
  for (const auto& [v, w] : measure) center += mesh.vertices[v];
  center /= static_cast<double>(measure.size());

  struct Entry {
    double angle;
    int node;
  };
  std::vector<Entry> order;
  for (const auto& [v, w] : measure) {
    const Point d = mesh.vertices[v] - center;
    double a = std::atan2(d.y(), d.x());
    if (a < 0) a += 2.0 * kPi;
    order.push_back({a, v});
  }
  std::sort(order.begin(), order.end(), [](const Entry& x, const Entry& y) {
    return x.angle < y.angle || (x.angle == y.angle && x.node < y.node);
  });

  FluxTrace tr;
  tr.tag = tag;
  double sum = 0.0;
  for (const auto& e : order) {
    const double w = measure[e.node];
    const double f = residual[e.node] / w;
    tr.nodes.push_back(e.node);
    tr.arc.push_back((mesh.vertices[e.node] - center).norm() * e.angle);
    tr.weight.push_back(w);
    tr.flux.push_back(f);
    tr.length += w;
    sum += w * f;
  }
  tr.mean = sum / tr.length;
  double var = 0.0;
  for (std::size_t i = 0; i < tr.flux.size(); ++i) {
    const double d = tr.flux[i] - tr.mean;
    var += tr.weight[i] * d * d;
    tr.max_deviation = std::max(tr.max_deviation, std::abs(d));
  }
  tr.stddev = std::sqrt(var / tr.length);
  return tr;
}

double whole_boundary_flux_mean(const SparseSystem& system, const Field& field) {
  std::vector<int> tags;
  for (const auto& e : system.mesh->boundary_edges)
    if (std::find(tags.begin(), tags.end(), e.tag) == tags.end()) tags.push_back(e.tag);
  std::sort(tags.begin(), tags.end());
  double total = 0.0, length = 0.0;
  for (int tag : tags) {
    const auto tr = recover_boundary_flux(system, field, tag);
    total += tr.mean * tr.length;
    length += tr.length;
  }
  return total / length;
}

double integrate_source(const Mesh& mesh, const PhaseConfig& config, const RadialProfiled& g) {
  const Point& center = config.domain().center();
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.signed_area(t);
    for (int v : mesh.triangles[t]) total += area / 3.0 * g.value(std::clamp((mesh.vertices[v] - center).norm(), g.inner(), g.outer()));
  }
  return total;
}

double l2_error(const Field& field, const RadialProfiled& exact, const Point& center) {
  // Degree-5 Dunavant rule (barycentric coordinates, weights sum to 1).
  static const double a1 = 0.059715871789770, b1 = 0.470142064105115;
  static const double a2 = 0.797426985353087, b2 = 0.101286507323456;
  static const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
  static const double pts[7][3] = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                                   {a2, b2, b2},                 {b2, a2, b2}, {b2, b2, a2}};
  static const double wts[7] = {w0, w1, w1, w1, w2, w2, w2};
  const Mesh& mesh = *field.mesh;
  double err2 = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    for (int q = 0; q < 7; ++q) {
      Point x = Point::Zero();
      double uh = 0.0;
      for (int i = 0; i < 3; ++i) {
        x += pts[q][i] * mesh.vertices[tri[i]];
        uh += pts[q][i] * field.values[tri[i]];
      }
      const double r = std::min((x - center).norm(), exact.outer());
      const double d = uh - exact.value(std::max(r, exact.inner()));
      err2 += area * wts[q] * d * d;
    }
  }
  return std::sqrt(err2);
}

double mass_norm(const SparseMatrix& mass, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(mass * v)));
}

}  // namespace phaselab
