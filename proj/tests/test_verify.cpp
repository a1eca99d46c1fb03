#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpqd/error.hpp"
#include "mpqd/oracles.hpp"
#include "mpqd/solver.hpp"
#include "mpqd/verify.hpp"

using namespace mpqd;

namespace {

constexpr double pi = std::numbers::pi;

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

PhaseMask disc_mask(const Grid& g, Point c, double r) {
  return PhaseMask::from_predicate(g, [&](Point p) { return distance(p, c) < r; });
}

MeasureSpec point_mass(Point c, double m) {
  MeasureSpec mu;
  mu.points.push_back({c, m});
  return mu;
}

MeasureSpec ball(Point c, double r, double d) {
  MeasureSpec mu;
  mu.balls.push_back({c, r, d});
  return mu;
}

}  // namespace

TEST_CASE("disc satisfies the one-phase identity for a point mass") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 128);
  const double lambda = 2.0, r = 0.6;
  const Point c{0.1, -0.05};
  const PhaseMask mask = disc_mask(g, c, r);
  const auto basis = harmonic_functions(g, 4, {{3.0, 0.5}, {-2.0, -2.5}});
  const auto rep = verify_qi_one_phase(mask, point_mass(c, lambda * pi * r * r), lambda, basis);
  REQUIRE(rep.rows.size() == basis.size());
  // pixelised boundary: relative error of order h / r
  CHECK(rep.worst_rel_err < 2e-2);
  CHECK(rep.rows[0].rhs == doctest::Approx(lambda * pi * r * r));

  // wrong mass is detected
  const auto bad = verify_qi_one_phase(mask, point_mass(c, 1.2 * lambda * pi * r * r), lambda, basis);
  CHECK(bad.worst_rel_err > 0.1);
}

TEST_CASE("disc error shrinks under refinement") {
  double prev = 1.0;
  for (int n : {32, 64, 128}) {
    const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / n);
    const PhaseMask mask = disc_mask(g, {0, 0}, 0.5);
    const auto rep = verify_qi_one_phase(mask, point_mass({0, 0}, pi * 0.25), 1.0, {HarmonicTestFn::constant_one()});
    CHECK(rep.worst_rel_err < prev);
    prev = rep.worst_rel_err;
  }
}

TEST_CASE("parabola domain and its line density") {
  const Grid g = Grid::from_box({-0.5, -1.5}, 3, 3, 1.0 / 256);
  const ParabolaQD qd = parabola_qd(0, g);
  const ScalarField re2 = HarmonicTestFn::poly(2, false).sample(g);
  // area int_0^2 (1 - (x-1)^2) dx
  CHECK(qd.mask.area() == doctest::Approx(4.0 / 3.0).epsilon(1e-2));
  // int_D (x^2 - y^2) = 8/5 - 8/105
  CHECK(integrate(re2, qd.mask) == doctest::Approx(32.0 / 21.0).epsilon(1e-2));
  CHECK(measure_integral(qd.measure, HarmonicTestFn::constant_one()) == doctest::Approx(4.0 / 3.0).epsilon(1e-8));
  CHECK(measure_integral(qd.measure, HarmonicTestFn::poly(2, false)) == doctest::Approx(32.0 / 21.0).epsilon(1e-8));
  CHECK(measure_integral(qd.measure, HarmonicTestFn::poly(1, false)) == doctest::Approx(4.0 / 3.0).epsilon(1e-8));

  const auto basis = harmonic_functions(g, 5, {{-2.0, 0.0}});
  const auto rep = verify_qi_one_phase(qd.mask, qd.measure, 1.0, basis);
  CHECK(rep.worst_rel_err < 2e-2);
}

TEST_CASE("pole inside the region is not harmonic") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 32);
  const PhaseMask mask = disc_mask(g, {0, 0}, 0.5);
  const auto basis = {HarmonicTestFn::constant_one(), HarmonicTestFn::log_pole({0.013, 0.021})};
  CHECK(error_code([&] { verify_qi_one_phase(mask, point_mass({0, 0}, pi * 0.25), 1.0, basis); }) ==
        "basis_not_harmonic");
}

TEST_CASE("pair identity for two separated discs") {
  const Grid g = Grid::from_box({-1.5, -1}, 3, 2, 1.0 / 128);
  const Point c1{-0.6, 0.0}, c2{0.7, 0.1};
  const double r1 = 0.45, r2 = 0.3, l1 = 1.0, l2 = 3.0;
  const std::vector<PhaseMask> masks = {disc_mask(g, c1, r1), disc_mask(g, c2, r2)};
  const std::vector<MeasureSpec> mus = {point_mass(c1, l1 * pi * r1 * r1), point_mass(c2, l2 * pi * r2 * r2)};
  const auto basis = harmonic_functions(g, 3, {});
  const auto rep = verify_qi_pair(masks, 0, 1, mus, {l1, l2}, basis);
  CHECK(rep.worst_rel_err < 2e-2);
  CHECK(rep.rows[0].rhs == doctest::Approx(l1 * pi * r1 * r1 - l2 * pi * r2 * r2));

  CHECK(error_code([&] { verify_qi_pair({masks[0], masks[0]}, 0, 1, mus, {l1, l2}, basis); }) == "masks_overlap");
  CHECK(error_code([&] { verify_qi_pair(masks, 0, 0, mus, {l1, l2}, basis); }) == "phase_mismatch");

  std::vector<PhaseMask> three = masks;
  three.push_back(disc_mask(g, {0.0, 0.7}, 0.2));
  std::vector<MeasureSpec> mus3 = mus;
  mus3.push_back(point_mass({0.0, 0.7}, pi * 0.04));
  CHECK(error_code([&] { verify_qi_pair(three, 0, 1, mus3, {l1, l2, 1.0}, basis); }) ==
        "h_nonzero_on_other_boundaries");
}

TEST_CASE("residual vanishes on the null solution") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 64);
  const NullQDParams prm{1.0, 2.0, 1.5};
  const NullQD qd = null_qd_fields(prm, g);
  const std::vector<ScalarField> fields(qd.fields.begin(), qd.fields.end());
  const std::vector<PhaseMask> masks(qd.masks.begin(), qd.masks.end());
  const std::vector<ForceField> forces = {ForceField::constant(g, prm.lambda1), ForceField::constant(g, prm.lambda2),
                                          ForceField::constant(g, prm.lambda3)};
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
    const auto rep = pde_residual(fields, masks, forces, i, j);
    CHECK(rep.nodes > 100);
    CHECK(rep.sup < 1e-9);
  }

  // a perturbed field shows up
  std::vector<ScalarField> bumped = fields;
  bumped[0](3 * g.nx() / 4, 3 * g.ny() / 4) += 1e-3;
  CHECK(pde_residual(bumped, masks, forces, 0, 1).sup > 1.0);
}

TEST_CASE("moving-plane comparison") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 32);
  const Mollifier psi{2.0 / 32};
  // the ordering for phase 2 at every t leaves only f_2 <= -lambda_2
  const std::vector<ForceField> forces = {build_force(ball({-0.35, 0.1}, 0.15, 30.0), 1.0, psi, g),
                                          ForceField::constant(g, 1.0)};
  const SolveResult s = minimize_S(forces, SolverParams{});
  const Plane plane{{1.0, 0.0}, 0.0};
  const auto rep = check_reflection(s.ubar, forces, plane);
  CHECK(rep.hypothesis_ok);
  CHECK(rep.samples > 0);
  CHECK(rep.passed);

  // swapping the phases breaks the ordering hypothesis
  const auto swapped = check_reflection({s.ubar[1], s.ubar[0]}, {forces[1], forces[0]}, plane);
  CHECK_FALSE(swapped.hypothesis_ok);
  CHECK_FALSE(swapped.passed);

  CHECK(error_code([&] { check_reflection(s.ubar, forces, Plane{{0.6, 0.8}, 0.0}); }) == "plane_not_axis_aligned");
}

TEST_CASE("symmetry check") {
  const double h = 1.0 / 32;
  const Grid g({-1 + h / 2, -1}, h, 64, 65);
  auto bump = [](Point p, Point c) { return std::max(0.0, 0.25 - (p.x - c.x) * (p.x - c.x) - (p.y - c.y) * (p.y - c.y)); };
  const ScalarField u1 = ScalarField::sample(g, [&](Point p) { return bump(p, {0.0, 0.4}); });
  ScalarField u2 = ScalarField::sample(g, [&](Point p) { return bump(p, {0.0, -0.4}); });
  const Plane plane{{1.0, 0.0}, 0.0};
  CHECK(check_symmetric({u1, u2}, plane).passed);
  CHECK(check_symmetric({u1, u2}, plane).worst_violation < 1e-14);
  u2(10, 32) += 1e-3;
  const auto rep = check_symmetric({u1, u2}, plane);
  CHECK_FALSE(rep.passed);
  CHECK(rep.worst_violation == doctest::Approx(1e-3));
}

TEST_CASE("star-shaped check") {
  const double h = 1.0 / 32;
  const Grid g({-1 + h / 2, -1 + h / 2}, h, 64, 64);
  // degree -1 homogeneous data
  const ScalarField fv = ScalarField::sample(g, [](Point p) { return 0.5 / norm(p) - 1.0; });
  const std::vector<ForceField> forces = {ForceField::from_values(fv, 1.0)};
  const std::vector<ForceField>& one = forces;
  const SolveResult s = minimize_S(one, SolverParams{});
  const std::vector<ScalarField> fields = {s.ubar[0], ScalarField(g)};
  const std::vector<ForceField> pair = {forces[0], ForceField::from_values(ScalarField(g), 1.0)};
  const auto rep = check_starshaped(fields, pair, -1.0, 0.0, 360);
  CHECK(rep.hypothesis_ok);
  CHECK(rep.support_violations == 0);
  CHECK(rep.passed);

  // two separated discs are not star-shaped about the origin
  const ScalarField two = ScalarField::sample(g, [](Point p) {
    return std::max({0.0, 0.04 - (p.x - 0.5) * (p.x - 0.5) - p.y * p.y, 0.04 - (p.x + 0.5) * (p.x + 0.5) - p.y * p.y});
  });
  const ScalarField lone = ScalarField::sample(g, [](Point p) {
    return std::max(0.0, 0.01 - (p.x - 0.6) * (p.x - 0.6) - p.y * p.y);
  });
  const auto ring = check_starshaped({two, ScalarField(g)}, pair, -1.0, 0.0, 360);
  CHECK_FALSE(ring.passed);
  const auto off = check_starshaped({lone, ScalarField(g)}, pair, -1.0, 0.0, 360);
  CHECK(off.support_violations == 0);
  CHECK_FALSE(off.passed);

  const Grid away = Grid::from_box({1, 1}, 1, 1, h);
  CHECK(error_code([&] { check_starshaped({ScalarField(away), ScalarField(away)}, {ForceField::constant(away, 1), ForceField::constant(away, 1)}, -1.0, 0.0); }) ==
        "origin_outside");
}

TEST_CASE("junction detection") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 64);
  const NullQD qd = null_qd_fields(NullQDParams{}, g);
  std::vector<PhaseMask> masks(qd.masks.begin(), qd.masks.end());
  const auto rep = detect_junctions(masks);
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].degree == 3);
  CHECK(norm(rep.points[0].location) < 3.0 / 64);
  CHECK_FALSE(rep.points[0].on_measure);

  std::rotate(masks.begin(), masks.begin() + 1, masks.end());
  const auto relabeled = detect_junctions(masks);
  REQUIRE(relabeled.points.size() == 1);
  CHECK(relabeled.points[0].location.x == rep.points[0].location.x);
  CHECK(relabeled.points[0].location.y == rep.points[0].location.y);
  CHECK(relabeled.points[0].nodes == rep.points[0].nodes);

  const std::vector<PhaseMask> apart = {disc_mask(g, {-0.5, 0}, 0.3), disc_mask(g, {0.5, 0}, 0.3),
                                        disc_mask(g, {0, 0.7}, 0.2)};
  CHECK(detect_junctions(apart).points.empty());
  CHECK(detect_junctions({}).points.empty());

  const Grid pg = Grid::from_box({-2.5, -2.5}, 5, 5, 1.0 / 64);
  std::vector<PhaseMask> petals, supports;
  for (int k = 0; k < 4; ++k) {
    const ParabolaQD p = parabola_qd(k, pg);
    petals.push_back(p.mask);
    supports.push_back(p.measure.support_mask(pg, pg.h()));
  }
  const auto four = detect_junctions(petals, 3, supports);
  CHECK(four.max_degree() == 4);
  bool on = false;
  for (const auto& p : four.points)
    if (p.degree == 4) on = on || (p.on_measure && norm(p.location) < 0.1);
  CHECK(on);
  const auto bare = detect_junctions(petals, 3);
  for (const auto& p : bare.points) CHECK_FALSE(p.on_measure);
}

TEST_CASE("non-degeneracy") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 64);
  const NullQDParams prm{2.0, 1.0, 1.0};
  const NullQD qd = null_qd_fields(prm, g);
  // points on the first phase's free boundary
  std::vector<Point> pts;
  for (double s : {0.2, 0.35, 0.5}) {
    pts.push_back({s, 0.0});
    pts.push_back({-s, -prm.a() * s});
  }
  const MeasureSpec none;
  const auto rep = check_nondegeneracy(qd.fields[0], prm.lambda1, pts, none, 0.25);
  CHECK(rep.rows.size() == pts.size() * 3);
  CHECK(rep.passed);
  CHECK(rep.skipped_on_measure == 0);

  const auto flat = check_nondegeneracy(ScalarField(g), 1.0, {{0.0, 0.0}}, none, 0.25);
  CHECK_FALSE(flat.passed);

  const MeasureSpec mu = ball({0.3, 0.3}, 0.1, 5.0);
  CHECK(error_code([&] { nondegeneracy_at(qd.fields[0], 1.0, {0.3, 0.3}, mu, 0.25); }) == "on_measure_support");
  const auto skipped = check_nondegeneracy(qd.fields[0], 1.0, {{0.3, 0.3}, {0.35, 0.3}}, mu, 0.25);
  CHECK(skipped.skipped_on_measure == 2);
  CHECK(check_nondegeneracy(qd.fields[0], 1.0, {{0.55, 0.3}}, mu, 0.25, 0.1).skipped_on_measure == 0);
}

TEST_CASE("small helpers") {
  const Grid g = Grid::from_box({0, 0}, 1, 1, 0.25);
  ScalarField u(g);
  u(1, 1) = 2.0;
  CHECK(sample_at(u, {0.25, 0.25}) == 2.0);
  CHECK(sample_at(u, {0.125, 0.25}) == doctest::Approx(1.0));
  CHECK(sample_at(u, {5, 5}, -7.0) == -7.0);

  PhaseMask a(g), b(g);
  a.set(1, 1, true);
  a.set(4, 4, true);
  b.set(2, 1, true);
  CHECK(inclusion_violations(a, b, 1) == 1);
  CHECK(inclusion_violations(a, b, 3) == 0);

  ScalarField v(g);
  v(1, 1) = 0.5;
  CHECK(segregation_defect({u, v}) == doctest::Approx(2.0));
  v(1, 1) = 0.0;
  v(2, 2) = 1.0;
  CHECK(segregation_defect({u, v}) == 0.0);
}
