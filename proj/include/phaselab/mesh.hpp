#pragma once

#include "phaselab/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace phaselab {

inline constexpr int kShellTag = 0;
inline constexpr int kOuterBoundary = 1;
inline constexpr int kInnerBoundary = 2;

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int tag = kOuterBoundary;
  bool operator==(const BoundaryEdge&) const = default;
};

/// 2D triangulation with per-triangle region tags (0 = shell, otherwise
/// phase id) and tagged boundary edges. Triangles are counter-clockwise.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> region;
  std::vector<BoundaryEdge> boundary_edges;
  /// Typical radial spacing used to build the mesh.
  double spacing = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double signed_area(int t) const;
  double area(int t) const { return signed_area(t); }
  Point centroid(int t) const;
  double total_area() const;
  /// Sorted, unique vertex ids touched by boundary edges (all tags).
  std::vector<int> boundary_vertices() const;
};

/// Polar-structured mesh of the domain with radial spacing R_outer / n.
///
/// Rings are placed uniformly inside every interval between consecutive
/// breakpoints. Breakpoints are the domain radii plus, for concentric Disk and
/// Ring phases, their radii, so those interfaces are vertex rings. A ring at
/// radius r carries max(6, 6 * round(r / h)) equispaced vertices starting at
/// angle 0, and consecutive rings are stitched by an angular merge. For the
/// unit disk without phases this yields 1 + 3n(n+1) vertices, 6n^2 triangles
/// and 6n boundary edges. Displaced phases are ignored here; the mesh does not
/// conform to them.
Mesh generate_mesh(const PhaseConfig& config, int resolution);

/// Tags every triangle with the phase id at its centroid.
Mesh assign_phases(Mesh mesh, const PhaseConfig& config);

/// True when shell-tagged triangles form one edge-connected set that touches
/// every boundary loop.
bool shell_connected_on_mesh(const Mesh& mesh);

/// ASCII mesh format:
///   line 1: "<nvertices> <ntriangles> <nboundary_edges>"
///   vertex lines "x y", triangle lines "i j k tag", boundary lines "i j tag".
/// Doubles are written with 17 significant digits.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

struct Location {
  int triangle = -1;
  Eigen::Vector3d barycentric = Eigen::Vector3d::Zero();
};

/// Bucketed point location over a mesh.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);

  /// First triangle (lowest id) containing p, with barycentric tolerance 1e-12.
  std::optional<Location> locate(const Point& p) const;
  /// All triangles containing p, sorted by id.
  std::vector<int> locate_all(const Point& p) const;

 private:
  const Mesh* mesh_;
  Eigen::Vector2d lo_;
  double cell_;
  int nx_;
  int ny_;
  std::vector<std::vector<int>> buckets_;

  Eigen::Vector3d barycentric(int t, const Point& p) const;
};

}  // namespace phaselab
