#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mpqd/error.hpp"
#include "mpqd/oracles.hpp"

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

}  // namespace

TEST_CASE("null solution constants") {
  const NullQDParams eq;
  CHECK(eq.a() == doctest::Approx(-std::sqrt(3.0)));
  CHECK(eq.b() == doctest::Approx(std::sqrt(3.0)));
  const NullQDParams p{1.0, 2.0, 1.5};
  CHECK(p.sigma() == doctest::Approx(6.5));
  CHECK(p.a() == doctest::Approx(-std::sqrt(6.5)));
  CHECK(p.b() == doctest::Approx(std::sqrt(6.5) / 2.0));
  CHECK(error_code([] { null_qd_fields({1.0, 0.0, 1.0}, Grid::from_box({-1, -1}, 2, 2, 0.1)); }) ==
        "lambda_nonpositive");
}

TEST_CASE("cones partition the plane") {
  for (const NullQDParams& p : {NullQDParams{}, NullQDParams{1.0, 2.0, 1.5}, NullQDParams{3.0, 0.5, 1.0}}) {
    const int n = 36000;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      const double th = (k + 0.5) * 2.0 * pi / n;
      const Point x{std::cos(th), std::sin(th)};
      int hits = 0;
      for (int i = 0; i < 3; ++i) hits += null_qd_in_cone(p, i, x);
      CHECK(hits == 1);
      total += hits * 2.0 * pi / n;
    }
    CHECK(total == doctest::Approx(2.0 * pi));
  }
  // equal lambdas give three 120 degree sectors
  const NullQDParams eq;
  CHECK(null_qd_in_cone(eq, 0, {std::cos(pi / 3), std::sin(pi / 3)}));
  CHECK(null_qd_in_cone(eq, 1, {std::cos(-pi / 3), std::sin(-pi / 3)}));
  CHECK(null_qd_in_cone(eq, 2, {-1.0, 0.0}));
}

TEST_CASE("null solution fields") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 64);
  const NullQDParams p{1.0, 2.0, 1.5};
  const NullQD qd = null_qd_fields(p, g);
  const double lambdas[3] = {p.lambda1, p.lambda2, p.lambda3};
  for (int i = 0; i < 3; ++i) {
    CHECK(qd.fields[i].min() >= 0.0);
    const ScalarField lap = laplacian(qd.fields[i]);
    // nodes two cells inside the cone see an exact quadratic
    const PhaseMask all = PhaseMask::from_predicate(g, [](Point) { return true; });
    const PhaseMask deep = mask_difference(qd.masks[i], dilate(mask_difference(all, qd.masks[i]), 2));
    int n = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!deep[k] || g.is_boundary(static_cast<int>(k % g.nx()), static_cast<int>(k / g.nx()))) continue;
      CHECK(lap[k] == doctest::Approx(lambdas[i]).epsilon(1e-9));
      ++n;
    }
    CHECK(n > 100);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) CHECK(mask_intersection(qd.masks[i], qd.masks[j]).empty());
}

TEST_CASE("rotations and parabola masks") {
  const Point x{0.3, 0.7};
  CHECK(rotate_cw(x, 1).x == doctest::Approx(0.7));
  CHECK(rotate_cw(x, 1).y == doctest::Approx(-0.3));
  CHECK(rotate_cw(rotate_cw(x, 3), 1).x == doctest::Approx(x.x));
  CHECK(rotate_cw(x, -1).x == doctest::Approx(rotate_cw(x, 3).x));

  CHECK(parabola_contains(0, {1.0, 0.4}));
  CHECK_FALSE(parabola_contains(0, {1.0, 0.6}));
  CHECK_FALSE(parabola_contains(0, {-1.0, 0.0}));
  CHECK(parabola_contains(2, {-1.0, 0.0}));
  CHECK(parabola_contains(1, {0.0, -1.0}));
  CHECK(parabola_contains(3, {0.0, 1.0}));

  const Grid g = Grid::from_box({-2.5, -2.5}, 5, 5, 1.0 / 32);
  std::vector<ParabolaQD> qd;
  for (int k = 0; k < 4; ++k) qd.push_back(parabola_qd(k, g));
  for (int a = 0; a < 4; ++a) {
    CHECK(qd[a].mask.area() == doctest::Approx(4.0 / 3.0).epsilon(3e-2));
    CHECK(qd[a].measure.total_mass() == doctest::Approx(4.0 / 3.0));
    for (int b = a + 1; b < 4; ++b) CHECK(mask_intersection(qd[a].mask, qd[b].mask).empty());
  }
  // k = 2 is the mirror image of k = 0 on a grid symmetric about x = 0
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) CHECK(qd[2].mask(i, j) == qd[0].mask(g.nx() - 1 - i, j));
  CHECK(qd[2].measure.segments[0].b.x == doctest::Approx(-2.0));
}

TEST_CASE("ball oracle") {
  CHECK(ball_qd_oracle(pi, 1.0) == doctest::Approx(1.0));
  CHECK(ball_qd_oracle(2.0 * pi, 2.0) == doctest::Approx(1.0));
  CHECK(ball_qd_oracle(4.0 * pi, 1.0) == doctest::Approx(2.0));
  CHECK(error_code([] { ball_qd_oracle(0.0, 1.0); }) == "invalid_input");
  CHECK(error_code([] { ball_qd_oracle(1.0, -1.0); }) == "invalid_input");
}

TEST_CASE("triple junction on a coarse grid") {
  TripleJunctionParams prm;
  prm.h = 1.0 / 16;
  for (int i = 1; i <= 3; ++i) CHECK(norm(triple_center(i)) == doctest::Approx(1.0));
  CHECK(triple_center(2).x == doctest::Approx(-1.0));

  const TripleJunctionResult weak = triple_junction_experiment(1.0, prm);
  CHECK(weak.junctions.points.empty());
  const TripleJunctionResult strong = triple_junction_experiment(50.0, prm);
  CHECK(strong.solve.status == SolveStatus::ok);
  REQUIRE(strong.junctions.points.size() == 1);
  CHECK(strong.junctions.points[0].degree == 3);
  CHECK_FALSE(strong.junctions.points[0].on_measure);
  CHECK(norm(strong.junctions.points[0].location) < 0.2);
  for (int i = 0; i < 3; ++i) CHECK(strong.solve.masks[i].area() > weak.solve.masks[i].area());

  CHECK(error_code([&] { triple_junction_experiment(0.5, prm); }) == "invalid_input");
  TripleJunctionParams narrow = prm;
  narrow.half_width = 2.0;
  CHECK(error_code([&] { triple_junction_experiment(2.0, narrow); }) == "box_too_small");
}

TEST_CASE("odd reflection") {
  const double h = 1.0 / 64;
  const Grid g = Grid::from_box({-1.5, -1.5}, 3, 3, h);
  MeasureSpec mu;
  mu.points.push_back({{0.6, 0.1}, 0.5});
  const Plane plane{{1.0, 0.0}, 0.0};
  const OddReflectionResult r = odd_reflection_two_phase(mu, 1.0, plane, g, Mollifier{2.0 * h}, SolverParams{});
  CHECK(r.converged);
  const int mid = g.nx() / 2;
  for (int j = 0; j < g.ny(); ++j) {
    CHECK(r.u_plus(mid, j) == 0.0);
    for (int i = 0; i < g.nx(); ++i) CHECK(r.u_minus(i, j) == r.u_plus(g.nx() - 1 - i, j));
  }
  CHECK(r.measure_minus.points[0].center.x == doctest::Approx(-0.6));
  CHECK(r.measure_minus.points[0].mass == doctest::Approx(0.5));
  CHECK(r.u_plus.max() > 0.0);

  const std::vector<PhaseMask> masks = {PhaseMask::from_field(r.u_plus, 0.0), PhaseMask::from_field(r.u_minus, 0.0)};
  const auto q = verify_qi_pair(masks, 0, 1, {mu, r.measure_minus}, {1.0, 1.0}, harmonic_functions(g, 2, {}));
  CHECK(q.worst_rel_err < 3e-2);

  MeasureSpec near;
  near.points.push_back({{0.05, 0.0}, 0.5});
  CHECK(error_code([&] { odd_reflection_two_phase(near, 1.0, plane, g, Mollifier{2.0 * h}, SolverParams{}); }) ==
        "measure_touches_plane");
  const Grid shifted = Grid::from_box({-1.0, -1.5}, 2.5, 3, h);
  CHECK(error_code([&] { odd_reflection_two_phase(mu, 1.0, plane, shifted, Mollifier{2.0 * h}, SolverParams{}); }) ==
        "grid_not_symmetric");
  CHECK(error_code([&] {
          odd_reflection_two_phase(mu, 1.0, Plane{{0.6, 0.8}, 0.0}, g, Mollifier{2.0 * h}, SolverParams{});
        }) == "plane_not_axis_aligned");
}
