#pragma once

#include <string>
#include <vector>

#include "mpqd/grid.hpp"

namespace mpqd {

/// Analytic harmonic test function used on both sides of a quadrature identity.
struct HarmonicTestFn {
  enum class Kind { constant, polynomial, fundamental, wedge };

  Kind kind = Kind::constant;
  int degree = 0;          // polynomial: k in Re/Im (x + iy)^k
  bool imaginary = false;  // polynomial: take Im instead of Re
  Point pole{};            // fundamental: log|x - pole|; wedge: apex
  double start_angle = 0;  // wedge: angle of the first bounding ray
  double aperture = 0;     // wedge: opening angle, measured counter-clockwise
  double order = 0;        // wedge: exponent nu in r^nu sin(nu * phi)

  static HarmonicTestFn constant_one();
  static HarmonicTestFn poly(int k, bool imaginary);
  static HarmonicTestFn log_pole(Point pole);
  /// r^nu sin(nu phi) with phi measured from `start_angle`; it vanishes on both
  /// rays of the wedge when nu * aperture is a multiple of pi.
  static HarmonicTestFn wedge_mode(Point apex, double start_angle, double aperture, double nu);

  double operator()(Point p) const;
  ScalarField sample(const Grid& grid) const;
  std::string describe() const;
};

/// {1, Re z^k, Im z^k : 1 <= k <= d_max} followed by log|x - p| for each pole.
std::vector<HarmonicTestFn> harmonic_functions(const Grid& grid, int d_max, const std::vector<Point>& poles);

/// Sampled fields of harmonic_functions(); poles must lie at least 2h outside
/// the box.
std::vector<ScalarField> harmonic_basis(const Grid& grid, int d_max, const std::vector<Point>& poles);

/// Largest |discrete Laplacian| over interior nodes of the grid, optionally
/// restricted to a region.
double max_discrete_laplacian(const ScalarField& field);
double max_discrete_laplacian(const ScalarField& field, const PhaseMask& region);

/// Discrete harmonicity check: max |lap_h phi| <= 1e-2 * max|phi| / diam^2 over
/// the region.
bool passes_harmonic_check(const ScalarField& field, const PhaseMask& region);

}  // namespace mpqd
