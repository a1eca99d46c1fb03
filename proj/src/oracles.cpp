#include "mpqd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpqd/error.hpp"

namespace mpqd {

namespace {
constexpr double pi = std::numbers::pi;
}

double NullQDParams::a() const { return -std::sqrt(sigma()) / lambda1; }
double NullQDParams::b() const { return std::sqrt(sigma()) / lambda2; }

bool null_qd_in_cone(const NullQDParams& prm, int phase, Point p) {
  const double a = prm.a(), b = prm.b();
  const double x = p.x, y = p.y;
  switch (phase) {
    case 0:
      return y >= 0.0 && y >= a * x;
    case 1:
      return y <= 0.0 && y <= b * x;
    default:
      return b * x <= y && y <= a * x;
  }
}

NullQD null_qd_fields(const NullQDParams& prm, const Grid& grid) {
  if (!(prm.lambda1 > 0 && prm.lambda2 > 0 && prm.lambda3 > 0))
    throw Error("lambda_nonpositive", "null QD needs positive lambdas");
  const double a = prm.a(), b = prm.b();
  const double l1 = prm.lambda1, l2 = prm.lambda2;
  const double c3 = l1 * l2 / (2.0 * (l1 + l2));
  NullQD out;
  out.fields[0] = ScalarField::sample(grid, [&](Point p) {
    return null_qd_in_cone(prm, 0, p) ? 0.5 * l1 * p.y * (p.y - a * p.x) : 0.0;
  });
  out.fields[1] = ScalarField::sample(grid, [&](Point p) {
    return null_qd_in_cone(prm, 1, p) ? -0.5 * l2 * p.y * (b * p.x - p.y) : 0.0;
  });
  out.fields[2] = ScalarField::sample(grid, [&](Point p) {
    return null_qd_in_cone(prm, 2, p) ? c3 * (a * p.x - p.y) * (p.y - b * p.x) : 0.0;
  });
  // Rounding can leave -0 or tiny negatives on the rays.
  for (auto& f : out.fields)
    for (double& v : f.values()) v = std::max(v, 0.0);
  for (int i = 0; i < 3; ++i) out.masks[i] = PhaseMask::from_field(out.fields[i], 0.0);
  return out;
}

Point rotate_cw(Point p, int k) {
  k = ((k % 4) + 4) % 4;
  for (int s = 0; s < k; ++s) p = {p.y, -p.x};
  return p;
}

bool parabola_contains(int k, Point p) {
  const Point q = rotate_cw(p, -k);
  if (!(q.x > 0.0 && q.x < 2.0)) return false;
  const double d = q.x - 1.0;
  return std::abs(q.y) < 0.5 * (1.0 - d * d);
}

ParabolaQD parabola_qd(int k, const Grid& grid) {
  ParabolaQD out;
  out.mask = PhaseMask::from_predicate(grid, [k](Point p) { return parabola_contains(k, p); });
  SegmentAtom seg;
  seg.a = rotate_cw({0.0, 0.0}, k);
  seg.b = rotate_cw({2.0, 0.0}, k);
  seg.profile = SegmentProfile::sqrt_tent;
  seg.amplitude = 2.0;
  out.measure.segments.push_back(seg);
  out.measure.validate();
  return out;
}

double ball_qd_oracle(double mass, double lambda) {
  if (!(mass > 0.0) || !(lambda > 0.0)) throw Error("invalid_input", "mass and lambda must be positive");
  return std::sqrt(mass / (pi * lambda));
}

Point triple_center(int i) {
  const double th = (2.0 * i - 1.0) * pi / 3.0;
  return {std::cos(th), std::sin(th)};
}

SolverParams TripleJunctionParams::default_solver() {
  SolverParams p;
  p.omega_auto = true;
  p.polish_rounds = 0;
  return p;
}

TripleJunctionResult triple_junction_experiment(double j, const TripleJunctionParams& prm) {
  if (!(j >= 1.0)) throw Error("invalid_input", "j must be >= 1");
  const double w = prm.half_width;
  if (w < 2.5) throw Error("box_too_small", "the box must contain [-2.5, 2.5]^2");
  const Grid grid = Grid::from_box({-w, -w}, 2.0 * w, 2.0 * w, prm.h);
  const Mollifier psi{prm.mollifier_cells * prm.h};
  TripleJunctionResult out;
  out.j = j;
  for (int i = 1; i <= 3; ++i) {
    MeasureSpec m;
    m.balls.push_back({triple_center(i), prm.ball_radius, j});
    out.measures.push_back(m);
    out.forces.push_back(build_force(m, 1.0, psi, grid));
  }
  // One-phase radius must fit; larger j can only shrink a phase under segregation.
  const double r1 = ball_qd_oracle(j * pi * prm.ball_radius * prm.ball_radius, 1.0);
  if (1.0 + r1 > w) throw Error("box_too_small", "one-phase support would leave the box");

  out.solve = minimize_S(out.forces, prm.solver);
  std::vector<PhaseMask> supports;
  for (const auto& m : out.measures) supports.push_back(m.support_mask(grid, psi.radius));
  out.junctions = detect_junctions(out.solve.masks, prm.radius_cells, supports);

  const ScalarField& u1 = out.solve.ubar[0];
  const ScalarField& u2 = out.solve.ubar[1];
  out.barrier_gap = 1e300;
  const int samples = 241;
  for (int k = 1; k < samples - 1; ++k) {
    const double th = (2.0 * pi / 3.0) * k / (samples - 1);
    const Point x{0.75 * std::cos(th), 0.75 * std::sin(th)};
    const double v = 0.5 * x.y * (x.y + std::sqrt(3.0) * x.x);
    out.barrier_gap = std::min(out.barrier_gap, u1.interpolate(x) - v);
  }
  out.barrier_holds = out.barrier_gap >= 0.0;

  const double c = std::cos(2.0 * pi / 3.0), s = std::sin(2.0 * pi / 3.0);
  double worst = 0.0;
  for (int jj = 0; jj < grid.ny(); ++jj)
    for (int ii = 0; ii < grid.nx(); ++ii) {
      const Point x = grid.node(ii, jj);
      const Point rx{c * x.x - s * x.y, s * x.x + c * x.y};
      worst = std::max(worst, std::abs(u1(ii, jj) - u2.interpolate(rx)));
    }
  const double scale = u1.max();
  out.asymmetry = scale > 0.0 ? worst / scale : 0.0;
  return out;
}

OddReflectionResult odd_reflection_two_phase(const MeasureSpec& measure_plus, double lambda, const Plane& plane,
                                             const Grid& grid, const Mollifier& psi, const SolverParams& params) {
  const bool along_x = std::abs(plane.n.x) == 1.0 && plane.n.y == 0.0;
  const bool along_y = plane.n.x == 0.0 && std::abs(plane.n.y) == 1.0;
  if (!along_x && !along_y) throw Error("plane_not_axis_aligned", "the reflection plane must be axis-aligned");
  const double sgn = along_x ? plane.n.x : plane.n.y;
  const double coord = plane.t * sgn;  // plane position on its axis
  const double origin = along_x ? grid.origin().x : grid.origin().y;
  const int n = along_x ? grid.nx() : grid.ny();
  const double idx = (coord - origin) / grid.h();
  const long k = std::lround(idx);
  if (std::abs(idx - k) > 1e-9 || 2 * k != n - 1)
    throw Error("grid_not_symmetric", "the grid must be symmetric about the plane with the plane on nodes");

  auto reflect = [&](Point p) {
    if (along_x) return Point{2.0 * coord - p.x, p.y};
    return Point{p.x, 2.0 * coord - p.y};
  };
  auto side = [&](Point p) { return (along_x ? p.x * plane.n.x : p.y * plane.n.y) - plane.t; };
  // Measure must sit strictly inside the positive half-space.
  const double margin = psi.radius + grid.h();
  for (const auto& b : measure_plus.balls)
    if (side(b.center) - b.radius < margin) throw Error("measure_touches_plane", "ball reaches the plane");
  for (const auto& p : measure_plus.points)
    if (side(p.center) < margin + 2.0 * grid.h()) throw Error("measure_touches_plane", "point mass reaches the plane");
  for (const auto& s : measure_plus.segments)
    if (std::min(side(s.a), side(s.b)) < margin) throw Error("measure_touches_plane", "segment reaches the plane");

  OddReflectionResult out;
  out.force_plus = build_force(measure_plus, lambda, psi, grid);
  const PhaseMask fixed = PhaseMask::from_predicate(grid, [&](Point p) { return side(p) <= 1e-12 * grid.h(); });
  ObstacleResult r = minimize_obstacle(out.force_plus, params, &fixed);
  out.converged = r.converged;
  if (!r.converged) throw Error("max_sweeps_exceeded", "half-space solve did not converge");
  out.u_plus = r.u;
  out.u_minus = ScalarField(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const int ri = along_x ? grid.nx() - 1 - i : i;
      const int rj = along_x ? j : grid.ny() - 1 - j;
      out.u_minus(i, j) = out.u_plus(ri, rj);
    }
  out.measure_minus = measure_plus.mapped(reflect);
  return out;
}

}  // namespace mpqd
