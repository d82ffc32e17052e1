#pragma once

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace phaselab {

using Point = Eigen::Vector2d;

struct Mesh;

/// Ball {|x - center| < radius}.
struct Ball {
  double radius = 1.0;
};

/// Annulus {inner < |x - center| < outer}.
struct Annulus {
  double inner = 0.5;
  double outer = 1.0;
};

class DomainSpec {
 public:
  DomainSpec(Ball ball, Point center = Point::Zero());
  DomainSpec(Annulus annulus, Point center = Point::Zero());

  bool is_ball() const { return std::holds_alternative<Ball>(kind_); }
  const Point& center() const { return center_; }
  double outer_radius() const;
  /// Zero for balls.
  double inner_radius() const;
  /// Exact area of the continuum domain.
  double area() const;
  /// Total length of the boundary circles.
  double boundary_length() const;
  /// Open-set membership.
  bool contains(const Point& p) const;
  /// Distance from an interior point to the boundary.
  double distance_to_boundary(const Point& p) const;

 private:
  std::variant<Ball, Annulus> kind_;
  Point center_;
};

struct Disk {
  Point center = Point::Zero();
  double radius = 0.0;
};

/// Closed ring {inner <= |x - center| <= outer} used for nested annular phases.
struct Ring {
  Point center = Point::Zero();
  double inner = 0.0;
  double outer = 0.0;
};

/// A phase given as a union of triangles of a specific mesh.
struct ElementSet {
  std::shared_ptr<const Mesh> mesh;
  std::vector<int> triangles;
};

using PhaseShape = std::variant<Disk, Ring, ElementSet>;

struct PhaseRegion {
  int id = 1;  ///< phase index, >= 1; 0 is reserved for the shell
  PhaseShape shape;
  double sigma = 2.0;
};

struct SigmaBounds {
  double min = 0.1;
  double max = 10.0;
};

struct HypothesisFlags {
  bool shell_connected_and_unique = false;
  bool discrete_core = false;
  bool sigma_one_only_on_shell = false;

  bool all() const {
    return shell_connected_and_unique && discrete_core && sigma_one_only_on_shell;
  }
  bool operator==(const HypothesisFlags&) const = default;
};

/// Multi-phase configuration: a domain, a list of core phases and the
/// conductivity bounds. The shell carries conductivity 1.
///
/// Construction enforces well-formedness and throws std::invalid_argument on
/// malformed geometry. Hypothesis flags are derived only by
/// validate_configuration().
class PhaseConfig {
 public:
  PhaseConfig(DomainSpec domain, std::vector<PhaseRegion> phases, SigmaBounds bounds = {});

  const DomainSpec& domain() const { return domain_; }
  const std::vector<PhaseRegion>& phases() const { return phases_; }
  const SigmaBounds& sigma_bounds() const { return bounds_; }
  /// Empty until validate_configuration() has run.
  const std::optional<HypothesisFlags>& hypothesis_flags() const { return flags_; }

  /// Conductivity of the phase with the given id (1 for id 0).
  double sigma_of(int id) const;
  /// True when every phase is a Disk or Ring centered at the domain center.
  bool is_concentric() const;
  bool has_element_sets() const;

 private:
  friend PhaseConfig validate_configuration(const PhaseConfig& config);

  DomainSpec domain_;
  std::vector<PhaseRegion> phases_;
  SigmaBounds bounds_;
  std::optional<HypothesisFlags> flags_;
};

struct DiscretenessResult {
  bool discrete = true;
  std::optional<std::pair<int, int>> offending_pair;  ///< phase ids
};

/// Returns a copy of `config` with hypothesis flags set. Violations are
/// flagged, not rejected.
PhaseConfig validate_configuration(const PhaseConfig& config);

/// Locally constant conductivity. Throws std::domain_error outside the open
/// domain or on a phase interface.
double sigma_at(const PhaseConfig& config, const Point& p);

/// Phase id at a point (0 = shell); same error contract as sigma_at.
int phase_at(const PhaseConfig& config, const Point& p);

DiscretenessResult check_discreteness(const PhaseConfig& config);

/// Shell connectivity, decided analytically for Disk/Ring phases and on the
/// mesh graph for ElementSet phases.
bool check_shell_connected(const PhaseConfig& config);

/// Distance from a point to the closure of a Disk or Ring phase.
double distance_to_phase(const PhaseShape& shape, const Point& p);

}  // namespace phaselab
