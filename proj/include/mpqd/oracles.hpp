#pragma once

#include <array>
#include <vector>

#include "mpqd/grid.hpp"
#include "mpqd/measures.hpp"
#include "mpqd/solver.hpp"
#include "mpqd/verify.hpp"

namespace mpqd {

struct NullQDParams {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 1.0;

  double sigma() const { return lambda1 * lambda2 + lambda1 * lambda3 + lambda2 * lambda3; }
  double a() const;
  double b() const;
};

struct NullQD {
  std::array<ScalarField, 3> fields;
  std::array<PhaseMask, 3> masks;
};

/// Explicit three-phase global solution with zero measure; phase i lives in a
/// cone with apex at the origin.
NullQD null_qd_fields(const NullQDParams& params, const Grid& grid);
/// Cone membership (closed) for phase index 0, 1, 2.
bool null_qd_in_cone(const NullQDParams& params, int phase, Point p);

/// D = {0 < x < 2, |y| < (1 - (x-1)^2)/2} turned clockwise by k quarter turns.
struct ParabolaQD {
  PhaseMask mask;
  MeasureSpec measure;
};

bool parabola_contains(int k, Point p);
ParabolaQD parabola_qd(int k, const Grid& grid);
/// Clockwise rotation by k quarter turns.
Point rotate_cw(Point p, int k);

/// Equivalent-area radius of the one-phase QD of a central point mass.
double ball_qd_oracle(double mass, double lambda);

struct TripleJunctionParams {
  double h = 1.0 / 64.0;
  double half_width = 2.5;
  double ball_radius = 0.2;
  double mollifier_cells = 2.0;
  SolverParams solver = default_solver();
  int radius_cells = 3;

  /// omega_auto on, interface polishing off (it triples the run time here).
  static SolverParams default_solver();
};

struct TripleJunctionResult {
  double j = 1.0;
  std::vector<MeasureSpec> measures;
  std::vector<ForceField> forces;
  SolveResult solve;
  JunctionReport junctions;
  /// min over samples of u_1 - v on the arc |x| = 3/4 inside the first cone.
  double barrier_gap = 0.0;
  bool barrier_holds = false;
  /// max |u_1(x) - u_2(R x)| / max u_1 with R the 120 degree rotation.
  double asymmetry = 0.0;
};

/// Centres z_i = (cos((2i-1) pi/3), sin((2i-1) pi/3)), i = 1..3.
Point triple_center(int i);
TripleJunctionResult triple_junction_experiment(double j, const TripleJunctionParams& params);

struct OddReflectionResult {
  ScalarField u_plus;
  ScalarField u_minus;
  MeasureSpec measure_minus;
  ForceField force_plus;
  bool converged = false;
};

/// One-phase solve in {x . n > a} with u = 0 on the plane, then odd
/// reflection. The plane must be axis-aligned and the grid symmetric about it.
OddReflectionResult odd_reflection_two_phase(const MeasureSpec& measure_plus, double lambda, const Plane& plane,
                                             const Grid& grid, const Mollifier& psi, const SolverParams& params);

}  // namespace mpqd
