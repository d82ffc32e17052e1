#pragma once

#include "phaselab/geometry.hpp"
#include "phaselab/mesh.hpp"
#include "phaselab/radial.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace phaselab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Assembled P1 operators. Reduced matrices act on free (non-Dirichlet)
/// nodes; full_* operators are kept for flux recovery.
struct SparseSystem {
  std::shared_ptr<const Mesh> mesh;
  SparseMatrix stiffness;
  Eigen::VectorXd load;
  SparseMatrix mass;
  SparseMatrix full_stiffness;
  Eigen::VectorXd full_load;
  SparseMatrix full_mass;
  std::vector<int> dirichlet_nodes;
  std::vector<int> free_nodes;      ///< free index -> vertex id
  std::vector<int> free_index;      ///< vertex id -> free index, -1 on Dirichlet nodes

  int num_free() const { return static_cast<int>(free_nodes.size()); }
  /// Scatters free-node values into a full nodal vector with zeros on Dirichlet nodes.
  Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const;
  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full_values) const;
};

/// Nodal P1 field on a mesh.
struct Field {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd values;

  /// Constant gradient on triangle t.
  Eigen::Vector2d gradient(int t) const;
};

/// Element stiffness sigma * area * (grad phi_i . grad phi_j) for one triangle.
Eigen::Matrix3d element_stiffness(const Point& a, const Point& b, const Point& c, double sigma);

/// Assembles stiffness, vertex-rule load and exact P1 mass; eliminates the
/// homogeneous Dirichlet nodes symmetrically. Throws if a triangle tag is not
/// a phase of `config`. `g` is evaluated at |x - domain center|.
SparseSystem assemble_system(std::shared_ptr<const Mesh> mesh, const PhaseConfig& config,
                             const RadialProfiled& g);

struct SolverOptions {
  double tolerance = 1e-10;
  int max_iterations = 20000;
};

/// Jacobi-preconditioned conjugate gradients from a zero start. Throws
/// std::runtime_error when the relative residual is not reached.
Field solve_elliptic(const SparseSystem& system, const SolverOptions& options = {});

/// Same solve for an arbitrary right-hand side on free nodes.
Eigen::VectorXd solve_free(const SparseSystem& system, const Eigen::VectorXd& rhs,
                           const SolverOptions& options = {});

struct FluxTrace {
  int tag = kOuterBoundary;
  std::vector<int> nodes;      ///< vertex ids ordered by polar angle
  std::vector<double> arc;     ///< arc position (radius * angle in [0, 2pi))
  std::vector<double> weight;  ///< lumped boundary measure of each node
  std::vector<double> flux;    ///< outward normal derivative
  double mean = 0.0;           ///< measure-weighted
  double stddev = 0.0;         ///< measure-weighted
  double max_deviation = 0.0;
  double length = 0.0;         ///< total measure of the component
};

/// Consistent flux recovery from the residual of the full system.
FluxTrace recover_boundary_flux(const SparseSystem& system, const Field& field, int tag);

/// Measure-weighted mean of recovered flux over every boundary component.
double whole_boundary_flux_mean(const SparseSystem& system, const Field& field);

/// Vertex-rule integral of g over the mesh (the discrete int_Omega g).
double integrate_source(const Mesh& mesh, const PhaseConfig& config, const RadialProfiled& g);

/// L2 error of a P1 field against a radial profile, 7-point Dunavant quadrature per triangle.
double l2_error(const Field& field, const RadialProfiled& exact, const Point& center);

/// Mass-weighted norm sqrt(v^T M v).
double mass_norm(const SparseMatrix& mass, const Eigen::VectorXd& v);

}  // namespace phaselab
