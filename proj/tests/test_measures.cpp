#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "mpqd/error.hpp"
#include "mpqd/measures.hpp"

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

// Continuous (chi_B * psi)(x) by polar quadrature of the kernel, normalised
// numerically so it does not share the closed-form constant.
double smoothed_ball(Point x, Point c, double rb, double r) {
  const int nr = 48, nt = 96;
  double num = 0.0, den = 0.0;
  for (int a = 0; a < nr; ++a) {
    const double rho = (a + 0.5) * r / nr;
    const double w = (1.0 + std::cos(pi * rho / r)) * rho;
    for (int b = 0; b < nt; ++b) {
      const double t = (b + 0.5) * 2.0 * pi / nt;
      const Point y{x.x + rho * std::cos(t), x.y + rho * std::sin(t)};
      den += w;
      if (distance(y, c) < rb) num += w;
    }
  }
  return num / den;
}

}  // namespace

TEST_CASE("atom masses") {
  CHECK(BallAtom{{0, 0}, 0.5, 2.0}.mass() == doctest::Approx(0.5 * pi));
  SegmentAtom tent{{0, 0}, {2, 0}, SegmentProfile::sqrt_tent, 2.0};
  // 2 * int_0^1 A (1 - sqrt(t)) dt = A * 2/3
  CHECK(tent.mass() == doctest::Approx(4.0 / 3.0));
  CHECK(tent.density_at(1.0) == doctest::Approx(2.0));
  CHECK(tent.density_at(0.0) == doctest::Approx(0.0));
  SegmentAtom flat{{0, 0}, {0, 3}, SegmentProfile::constant, 0.5};
  CHECK(flat.mass() == doctest::Approx(1.5));
  CHECK(parse_segment_profile(to_string(SegmentProfile::sqrt_tent)) == SegmentProfile::sqrt_tent);
}

TEST_CASE("mollifier profile has unit mass") {
  const Mollifier psi{0.3};
  double s = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double rho = (k + 0.5) * psi.radius / n;
    s += psi.profile(rho) * 2 * pi * rho * psi.radius / n;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(psi.profile(0.3) == 0.0);
}

TEST_CASE("point mass keeps its mass") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 64);
  MeasureSpec m;
  m.points.push_back({{0.1, -0.2}, 3.0});
  const ScalarField d = mollify(m, Mollifier{4.0 / 64}, g);
  CHECK(std::abs(integrate(d) - 3.0) / 3.0 < 0.005);
  CHECK(d.min() >= 0.0);
}

TEST_CASE("mollified ball against the continuous convolution") {
  const double h = 1.0 / 128, r = 4 * h, rb = 0.5, dens = 2.0;
  const Grid g = Grid::from_box({-1, -1}, 2, 2, h);
  MeasureSpec m;
  m.balls.push_back({{0, 0}, rb, dens});
  const ScalarField d = mollify(m, Mollifier{r}, g);
  double err = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const Point x = g.node(i, j);
      const double dist = norm(x);
      double exact = 0.0;
      if (dist < rb - r) {
        exact = dens;
      } else if (dist < rb + r) {
        exact = dens * smoothed_ball(x, {0, 0}, rb, r);
      }
      err += std::abs(d(i, j) - exact) * g.cell_area();
    }
  CHECK(err / m.total_mass() < 0.02);
}

TEST_CASE("force construction") {
  const Grid g = Grid::from_box({-1, -1}, 2, 2, 1.0 / 64);
  MeasureSpec m;
  m.balls.push_back({{0, 0}, 0.2, 50.0});
  const ForceField f = build_force(m, 1.0, Mollifier{2.0 / 64}, g);
  CHECK(f.f.max() == doctest::Approx(49.0).epsilon(1e-3));
  CHECK(f.f(0, 0) == -1.0);
  CHECK(f.satisfies_condition_a());
  CHECK(f.has_positive_part());

  CHECK(error_code([&] { build_force(m, 0.0, Mollifier{2.0 / 64}, g); }) == "lambda_nonpositive");
  CHECK(error_code([&] { build_force(m, 1.0, Mollifier{0.5 / 64}, g); }) == "mollifier_underresolved");
  MeasureSpec edge;
  edge.balls.push_back({{0.9, 0}, 0.2, 5.0});
  CHECK(error_code([&] { build_force(edge, 1.0, Mollifier{2.0 / 64}, g); }) == "measure_outside_box");
  MeasureSpec bad;
  bad.segments.push_back({{0, 0}, {0.3, 0.3}, SegmentProfile::constant, 1.0});
  CHECK(error_code([&] { bad.validate(); }) == "invalid_measure");
  MeasureSpec neg;
  neg.balls.push_back({{0, 0}, 0.2, -1.0});
  CHECK(error_code([&] { neg.validate(); }) == "invalid_measure");

  const ForceField c = ForceField::constant(g, 2.0);
  CHECK(c.f.max() == -2.0);
  CHECK(c.mu.max_abs() == 0.0);
  CHECK(!c.has_positive_part());
}

TEST_CASE("support geometry") {
  MeasureSpec a, b;
  a.balls.push_back({{0, 0}, 0.2, 1.0});
  b.points.push_back({{1, 0}, 1.0});
  CHECK(support_distance(a, b) == doctest::Approx(0.8));
  CHECK(supports_disjoint({a, b}, 0.5));
  CHECK(!supports_disjoint({a, b}, 0.9));
  CHECK(std::isinf(support_distance(a, MeasureSpec{})));
  MeasureSpec s;
  s.segments.push_back({{-1, 0.5}, {1, 0.5}, SegmentProfile::constant, 1.0});
  CHECK(s.distance_to_support({0, 0}) == doctest::Approx(0.5));
  CHECK(s.distance_to_support({2, 0.5}) == doctest::Approx(1.0));
  CHECK(a.support_radius_about({0.1, 0}) == doctest::Approx(0.3));
}

TEST_CASE("sakai condition") {
  const double lambda = 1.5;
  MeasureSpec exact, below, point;
  exact.balls.push_back({{0, 0}, 0.3, 4.0 * lambda});
  below.balls.push_back({{0, 0}, 0.3, 3.9 * lambda});
  point.points.push_back({{0, 0}, 0.01});
  CHECK(sakai_holds(exact, lambda));
  CHECK(!sakai_holds(below, lambda));
  CHECK(sakai_holds(point, lambda));
  const auto rows = sakai_check(point, lambda);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].density == std::numeric_limits<double>::infinity());
}

TEST_CASE("concentration condition") {
  MeasureSpec heavy, light;
  heavy.balls.push_back({{0, 0}, 1.0, 37.0});
  light.balls.push_back({{0, 0}, 1.0, 35.0});
  CHECK(concentration_check(heavy, {0, 0}, 1.0, 1.0, 0.0));
  CHECK(!concentration_check(light, {0, 0}, 1.0, 1.0, 0.0));
  // support leaves B_R
  CHECK(!concentration_check(heavy, {0.5, 0}, 1.0, 1.0, 0.0));
  CHECK(std::string(error_code([&] { concentration_check(heavy, {0, 0}, 1.0, 0.0, 0.0); })) ==
        "degenerate_constants");
}

TEST_CASE("translation and scaling") {
  const double h = 1.0 / 32;
  const Grid g = Grid::from_box({-2, -2}, 4, 4, h);
  MeasureSpec m;
  m.balls.push_back({{-0.3125, 0.125}, 0.25, 3.0});
  m.points.push_back({{0.40625, -0.1875}, 0.5});
  m.segments.push_back({{-0.5, -0.59375}, {0.5, -0.59375}, SegmentProfile::sqrt_tent, 2.0});
  const Mollifier psi{3 * h};
  const ScalarField base = mollify(m, psi, g);
  const int si = 5, sj = -3;
  const ScalarField moved = mollify(m.mapped([&](Point p) { return Point{p.x + si * h, p.y + sj * h}; }), psi, g);
  double worst = 0.0;
  for (int j = 8; j < g.ny() - 8; ++j)
    for (int i = 8; i < g.nx() - 8; ++i) worst = std::max(worst, std::abs(moved(i + si, j + sj) - base(i, j)));
  CHECK(worst < 1e-9 * base.max());

  const ScalarField twice = mollify(m.scaled(2.0), psi, g);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(twice[k] == doctest::Approx(2.0 * base[k]).epsilon(1e-12));
  CHECK(m.scaled(2.0).total_mass() == doctest::Approx(2.0 * m.total_mass()));
  CHECK(integrate(base) == doctest::Approx(m.total_mass()).epsilon(1e-9));
}
