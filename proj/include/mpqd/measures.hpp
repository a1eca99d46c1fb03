#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mpqd/grid.hpp"

namespace mpqd {

struct BallAtom {
  Point center;
  double radius = 0.0;
  double density = 0.0;
  double mass() const;
};

struct PointAtom {
  Point center;
  double mass = 0.0;
};

enum class SegmentProfile { constant, sqrt_tent };

/// Line density along an axis-aligned segment a->b. With s the arc length
/// from a and L the length:
///   constant:  rho(s) = amplitude
///   sqrt_tent: rho(s) = amplitude * (1 - sqrt(|s - L/2| / (L/2)))
struct SegmentAtom {
  Point a;
  Point b;
  SegmentProfile profile = SegmentProfile::constant;
  double amplitude = 0.0;

  double length() const;
  double density_at(double s) const;
  Point at(double s) const;
  double mass() const;
};

std::string to_string(SegmentProfile p);
SegmentProfile parse_segment_profile(const std::string& name);

/// Positive measure made of weighted balls, point masses and line densities.
struct MeasureSpec {
  std::vector<BallAtom> balls;
  std::vector<PointAtom> points;
  std::vector<SegmentAtom> segments;

  bool empty() const { return balls.empty() && points.empty() && segments.empty(); }
  double total_mass() const;
  /// Throws "invalid_measure" on negative densities, non-axis-aligned
  /// segments or degenerate atoms.
  void validate() const;

  /// Image under an isometry; segments must stay axis-aligned.
  MeasureSpec mapped(const std::function<Point(Point)>& map) const;
  MeasureSpec scaled(double s) const;
  /// Closed-form distance from p to the support.
  double distance_to_support(Point p) const;
  /// Nodes within `pad` of the support.
  PhaseMask support_mask(const Grid& grid, double pad) const;
  /// Smallest closed disc centred at `center` holding the support.
  double support_radius_about(Point center) const;
};

/// Minimum distance between the supports of two measures (+inf if either is
/// empty).
double support_distance(const MeasureSpec& a, const MeasureSpec& b);
/// True when every pair of measures is separated by at least min_dist.
bool supports_disjoint(const std::vector<MeasureSpec>& measures, double min_dist);

/// Cosine-hat kernel psi(rho) ~ 1 + cos(pi rho / r) on rho < r.
struct Mollifier {
  double radius = 0.0;
  double profile(double rho) const;
};

/// Node density of the rasterized measure before smoothing; each atom is
/// rescaled so the discrete mass equals its exact mass.
ScalarField rasterize(const MeasureSpec& measure, const Grid& grid);

/// Nodal density of mu * psi. The discrete kernel has unit mass on the grid,
/// so total mass is preserved unless the support leaves the box.
ScalarField mollify(const MeasureSpec& measure, const Mollifier& psi, const Grid& grid);

/// f = mu * psi - lambda on the grid.
struct ForceField {
  ScalarField mu;
  double lambda = 1.0;
  ScalarField f;

  static ForceField from_values(ScalarField f, double lambda);
  static ForceField constant(const Grid& grid, double lambda);

  const Grid& grid() const { return f.grid(); }
  bool has_positive_part() const { return f.max() > 0.0; }
  /// f < 0 on every node within `margin_cells` of the box boundary.
  bool satisfies_condition_a(int margin_cells = 2) const;
};

ForceField build_force(const MeasureSpec& measure, double lambda, const Mollifier& psi, const Grid& grid);

struct SakaiSample {
  Point location;
  double density = 0.0;  // limsup mu(B_r(x)) / |B_r|, may be +inf
  bool passes = false;
};

/// Density limsup at sample points of the support, from atom formulas.
std::vector<SakaiSample> sakai_check(const MeasureSpec& measure, double lambda);
bool sakai_holds(const MeasureSpec& measure, double lambda);

/// mu vanishes outside B_R(center) and mu(B_R) > (b + 2c/(3R)) * 36 * pi R^2.
bool concentration_check(const MeasureSpec& measure, Point center, double R, double b, double c);

}  // namespace mpqd
