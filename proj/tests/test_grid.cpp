#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "mpqd/error.hpp"
#include "mpqd/field_io.hpp"
#include "mpqd/grid.hpp"
#include "mpqd/harmonic.hpp"

using namespace mpqd;

namespace {

double max_interior_abs(const ScalarField& f) {
  double m = 0.0;
  const Grid& g = f.grid();
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) m = std::max(m, std::abs(f(i, j)));
  return m;
}

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g({-1.0, 2.0}, 0.25, 9, 5);
  CHECK(g.node(0, 0).x == -1.0);
  CHECK(g.node(4, 2).x == 0.0);
  CHECK(g.node(4, 2).y == 2.5);
  CHECK(g.cell_area() == 0.0625);
  CHECK(g.width() == 2.0);
  CHECK(g.height() == 1.0);
  CHECK(g.index(3, 2) == 21u);
  CHECK(error_code([] { Grid({0, 0}, 0.1, 2, 5); }) == "grid_underflow");
  CHECK(error_code([] { Grid({0, 0}, -0.1, 5, 5); }) == "invalid_grid");
  const Grid b = Grid::from_box({-2, -2}, 4, 4, 1.0 / 64);
  CHECK(b.nx() == 257);
  CHECK(b.x_max() == doctest::Approx(2.0));
}

TEST_CASE("laplacian stencil exactness") {
  const Grid g({-1.0, -1.0}, 1.0 / 16, 33, 33);
  SUBCASE("constant") { CHECK(max_interior_abs(laplacian(ScalarField(g, 3.5))) == 0.0); }
  SUBCASE("x^2 - y^2") {
    const auto f = ScalarField::sample(g, [](Point p) { return p.x * p.x - p.y * p.y; });
    CHECK(max_interior_abs(laplacian(f)) < 1e-11);
  }
  SUBCASE("x^2 + y^2 gives 4") {
    const auto f = ScalarField::sample(g, [](Point p) { return p.x * p.x + p.y * p.y; });
    const ScalarField lap = laplacian(f);
    for (int j = 1; j < g.ny() - 1; ++j)
      for (int i = 1; i < g.nx() - 1; ++i) CHECK(lap(i, j) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(lap(0, 5) == 0.0);
  }
  SUBCASE("affine") {
    const auto f = ScalarField::sample(g, [](Point p) { return 2.0 * p.x - 3.0 * p.y + 1.0; });
    CHECK(max_interior_abs(laplacian(f)) < 1e-11);
  }
}

TEST_CASE("integrate") {
  const int n = 64;
  const Grid unit({0.0, 0.0}, 1.0 / n, n + 1, n + 1);
  CHECK(integrate(ScalarField(unit, 1.0)) == doctest::Approx(1.0).epsilon(2.5 / n));

  const Grid g = Grid::from_box({-1.5, -1.5}, 3.0, 3.0, 1.0 / 128);
  const PhaseMask disc = PhaseMask::from_predicate(g, [](Point p) { return norm(p) < 1.0; });
  CHECK(std::abs(integrate(ScalarField(g, 1.0), disc) - std::numbers::pi) / std::numbers::pi < 0.02);

  // int_D x over D = {0 < x < 2, |y| < (1 - (x-1)^2)/2} is 4/3 by symmetry about x = 1.
  const Grid f = Grid::from_box({-0.5, -1.0}, 3.0, 2.0, 1.0 / 256);
  const PhaseMask d = PhaseMask::from_predicate(f, [](Point p) {
    return p.x > 0 && p.x < 2 && std::abs(p.y) < 0.5 * (1 - (p.x - 1) * (p.x - 1));
  });
  const auto x = ScalarField::sample(f, [](Point p) { return p.x; });
  CHECK(std::abs(integrate(x, d) - 4.0 / 3.0) / (4.0 / 3.0) < 0.01);

  SUBCASE("linear and additive") {
    const PhaseMask left = PhaseMask::from_predicate(g, [](Point p) { return p.x < 0.2; });
    const PhaseMask right = mask_difference(PhaseMask(g, true), left);
    const auto a = ScalarField::sample(g, [](Point p) { return std::sin(p.x) + p.y; });
    const auto b = ScalarField::sample(g, [](Point p) { return p.x * p.y; });
    CHECK(integrate(a, left) + integrate(a, right) == doctest::Approx(integrate(a)).epsilon(1e-12));
    CHECK(integrate(2.0 * a + b) == doctest::Approx(2.0 * integrate(a) + integrate(b)).epsilon(1e-12));
  }
  CHECK(error_code([&] { integrate(ScalarField(g), PhaseMask(unit)); }) == "grid_mismatch");
}

TEST_CASE("harmonic basis") {
  const Grid g = Grid::from_box({-2, -2}, 4, 4, 1.0 / 64);
  const auto b1 = harmonic_functions(g, 1, {});
  REQUIRE(b1.size() == 3);
  const Point p{0.3, -0.7};
  CHECK(b1[0](p) == 1.0);
  CHECK(b1[1](p) == doctest::Approx(0.3));
  CHECK(b1[2](p) == doctest::Approx(-0.7));
  const auto b2 = harmonic_functions(g, 2, {});
  REQUIRE(b2.size() == 5);
  CHECK(b2[3](p) == doctest::Approx(0.09 - 0.49));
  CHECK(b2[4](p) == doctest::Approx(2 * 0.3 * -0.7));

  const auto withpole = harmonic_basis(g, 0, {{10.0, 10.0}});
  REQUIRE(withpole.size() == 2);
  CHECK(max_discrete_laplacian(withpole[1]) < 1e-6);
  CHECK(error_code([&] { harmonic_basis(g, 1, {{1.0, 1.0}}); }) == "pole_inside_domain");
  CHECK(error_code([&] { harmonic_basis(g, 1, {{2.0 + 1.0 / 64, 0.0}}); }) == "pole_inside_domain");

  // Polynomial stencil error shrinks like h^2.
  auto lap_err = [](double h) {
    const Grid gg = Grid::from_box({-1, -1}, 2, 2, h);
    return max_discrete_laplacian(HarmonicTestFn::poly(4, false).sample(gg));
  };
  const double e1 = lap_err(1.0 / 16), e2 = lap_err(1.0 / 32);
  CHECK(e2 < 0.3 * e1);
  for (const auto& f : harmonic_basis(g, 3, {{3.0, 0.0}})) CHECK(passes_harmonic_check(f, PhaseMask(g, true)));
}

TEST_CASE("wedge mode vanishes on its rays") {
  const auto w = HarmonicTestFn::wedge_mode({0, 0}, -2.0 * std::numbers::pi / 3, 4.0 * std::numbers::pi / 3, 0.75);
  for (double r : {0.1, 0.5, 1.3}) {
    CHECK(std::abs(w({r * std::cos(-2 * std::numbers::pi / 3), r * std::sin(-2 * std::numbers::pi / 3)})) < 1e-12);
    CHECK(std::abs(w({r * std::cos(2 * std::numbers::pi / 3), r * std::sin(2 * std::numbers::pi / 3)})) < 1e-12);
    CHECK(w({r, 0.0}) > 0.0);
  }
}

TEST_CASE("masks") {
  const Grid g({0, 0}, 1.0, 7, 7);
  PhaseMask m(g);
  m.set(3, 3, true);
  CHECK(dilate(m, 1).count() == 9);
  CHECK(dilate(m, 2).count() == 25);
  const ScalarField f = ScalarField::sample(g, [](Point p) { return p.x - 2.5; });
  CHECK(PhaseMask::from_field(f, 0.0).count() == 4 * 7);
  CHECK(PhaseMask(g, true).boundary().count() == 24);
}

TEST_CASE("field file round trip") {
  const Grid g({-1.25, 0.5}, 0.1, 5, 4);
  const auto f = ScalarField::sample(g, [](Point p) { return std::exp(p.x) / 3.0 + p.y * 1e-17; });
  std::stringstream ss;
  write_field(ss, f);
  const ScalarField back = read_field(ss);
  CHECK(back.grid() == g);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(back[k] == f[k]);

  std::stringstream bad("MPQD-FIELD 3 3 0 0 0.5\n1 2 3\n4 5\n");
  CHECK(error_code([&] { read_field(bad); }) == "field_format");
  std::stringstream nan("MPQD-FIELD 3 3 0 0 0.5\n1 2 3\n4 nan 6\n7 8 9\n");
  CHECK(error_code([&] { read_field(nan); }) == "field_format");
  std::stringstream header("FIELD 3 3 0 0 0.5\n");
  CHECK(error_code([&] { read_field(header); }) == "field_format");
  CHECK(format_double(0.1) == "0.1");
}
