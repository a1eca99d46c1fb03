#include "mpqd/harmonic.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "mpqd/error.hpp"

namespace mpqd {

HarmonicTestFn HarmonicTestFn::constant_one() { return {}; }

HarmonicTestFn HarmonicTestFn::poly(int k, bool imaginary) {
  HarmonicTestFn fn;
  fn.kind = k == 0 ? Kind::constant : Kind::polynomial;
  fn.degree = k;
  fn.imaginary = imaginary;
  return fn;
}

HarmonicTestFn HarmonicTestFn::log_pole(Point pole) {
  HarmonicTestFn fn;
  fn.kind = Kind::fundamental;
  fn.pole = pole;
  return fn;
}

HarmonicTestFn HarmonicTestFn::wedge_mode(Point apex, double start_angle, double aperture, double nu) {
  HarmonicTestFn fn;
  fn.kind = Kind::wedge;
  fn.pole = apex;
  fn.start_angle = start_angle;
  fn.aperture = aperture;
  fn.order = nu;
  return fn;
}

double HarmonicTestFn::operator()(Point p) const {
  switch (kind) {
    case Kind::constant:
      return 1.0;
    case Kind::polynomial: {
      std::complex<double> z(p.x, p.y), w(1.0, 0.0);
      for (int k = 0; k < degree; ++k) w *= z;
      return imaginary ? w.imag() : w.real();
    }
    case Kind::fundamental:
      return std::log(distance(p, pole));
    case Kind::wedge: {
      const Point d = p - pole;
      const double r = norm(d);
      if (r == 0.0) return 0.0;
      constexpr double two_pi = 2.0 * std::numbers::pi;
      double phi = std::atan2(d.y, d.x) - start_angle;
      phi = std::fmod(phi, two_pi);
      if (phi < 0) phi += two_pi;
      // The branch cut sits in the middle of the excluded sector.
      if (phi > aperture + 0.5 * (two_pi - aperture)) phi -= two_pi;
      return std::pow(r, order) * std::sin(order * phi);
    }
  }
  return 0.0;
}

ScalarField HarmonicTestFn::sample(const Grid& grid) const {
  return ScalarField::sample(grid, [this](Point p) { return (*this)(p); });
}

std::string HarmonicTestFn::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::constant:
      os << "1";
      break;
    case Kind::polynomial:
      os << (imaginary ? "Im z^" : "Re z^") << degree;
      break;
    case Kind::fundamental:
      os << "log|x-(" << pole.x << "," << pole.y << ")|";
      break;
    case Kind::wedge:
      os << "wedge(nu=" << order << ",start=" << start_angle << ",aperture=" << aperture << ")";
      break;
  }
  return os.str();
}

std::vector<HarmonicTestFn> harmonic_functions(const Grid& grid, int d_max, const std::vector<Point>& poles) {
  std::vector<HarmonicTestFn> out;
  out.push_back(HarmonicTestFn::constant_one());
  for (int k = 1; k <= d_max; ++k) {
    out.push_back(HarmonicTestFn::poly(k, false));
    out.push_back(HarmonicTestFn::poly(k, true));
  }
  for (const Point& p : poles) {
    if (grid.inside_margin(p) > -2.0 * grid.h()) {
      std::ostringstream os;
      os << "pole (" << p.x << ", " << p.y << ") is not at least 2h outside the box";
      throw Error("pole_inside_domain", os.str());
    }
    out.push_back(HarmonicTestFn::log_pole(p));
  }
  return out;
}

std::vector<ScalarField> harmonic_basis(const Grid& grid, int d_max, const std::vector<Point>& poles) {
  std::vector<ScalarField> out;
  for (const auto& fn : harmonic_functions(grid, d_max, poles)) out.push_back(fn.sample(grid));
  return out;
}

double max_discrete_laplacian(const ScalarField& field) {
  return max_discrete_laplacian(field, PhaseMask(field.grid(), true));
}

double max_discrete_laplacian(const ScalarField& field, const PhaseMask& region) {
  require_same_grid(field.grid(), region.grid());
  const ScalarField lap = laplacian(field);
  const Grid& g = field.grid();
  double worst = 0.0;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i)
      if (region(i, j)) worst = std::max(worst, std::abs(lap(i, j)));
  return worst;
}

bool passes_harmonic_check(const ScalarField& field, const PhaseMask& region) {
  const double diam = field.grid().diameter();
  double scale = 0.0;
  for (std::size_t k = 0; k < field.grid().size(); ++k)
    if (region[k]) scale = std::max(scale, std::abs(field[k]));
  const double tol = 1e-2 * scale / (diam * diam) + 1e-12;
  return max_discrete_laplacian(field, region) <= tol;
}

}  // namespace mpqd
