#pragma once

#include <string>
#include <vector>

#include "mpqd/grid.hpp"
#include "mpqd/harmonic.hpp"
#include "mpqd/measures.hpp"
#include "mpqd/solver.hpp"

namespace mpqd {

struct QuadratureRow {
  std::string basis;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
};

struct QuadratureReport {
  std::vector<QuadratureRow> rows;
  double worst_rel_err = 0.0;
};

/// int phi dmu from the atom formulas: mean value for balls, point values for
/// point masses, adaptive Simpson for line densities.
double measure_integral(const MeasureSpec& mu, const HarmonicTestFn& phi);

/// lhs = lambda int_mask phi, rhs = int phi dmu. rel_err is taken against
/// max(|rhs|, lambda int_mask |phi|).
QuadratureReport verify_qi_one_phase(const PhaseMask& mask, const MeasureSpec& mu, double lambda,
                                     const std::vector<HarmonicTestFn>& basis);

/// Pair identity lambda_i int_{O_i} phi - lambda_j int_{O_j} phi = int phi dmu_i - int phi dmu_j.
/// Other nonempty phases must see phi ~ 0 on their free boundary.
QuadratureReport verify_qi_pair(const std::vector<PhaseMask>& masks, std::size_t i, std::size_t j,
                                const std::vector<MeasureSpec>& measures, const std::vector<double>& lambdas,
                                const std::vector<HarmonicTestFn>& basis);

struct ResidualReport {
  double sup = 0.0;
  double l1 = 0.0;
  std::size_t nodes = 0;
  double band_sup = 0.0;
  double band_l1 = 0.0;
  std::size_t band_nodes = 0;
};

/// r = lap_h(u_i - u_j) + f_i chi_i - f_j chi_j away from free boundaries
/// (2-cell band reported separately) and outside the closure of other phases.
ResidualReport pde_residual(const std::vector<ScalarField>& fields, const std::vector<PhaseMask>& masks,
                            const std::vector<ForceField>& forces, std::size_t i, std::size_t j);

struct GeometryReport {
  std::string check;  // reflection_monotone, symmetric, starshaped
  bool passed = false;
  bool hypothesis_ok = true;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  Point witness{};
  std::size_t samples = 0;
  std::size_t support_violations = 0;  // reflected/ray support failures
  double scaling_violation = 0.0;      // starshaped: worst scaled-inequality excess
};

/// Axis-aligned plane {x . n = t}; n must be one of (+-1, 0), (0, +-1).
struct Plane {
  Point n{1.0, 0.0};
  double t = 0.0;
};

/// Moving-plane comparison for m = 2 at t >= t0 (grid-aligned t values).
GeometryReport check_reflection(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces,
                                Plane plane, int t_samples = 16);

/// Max |w(x) - w(x^t0)| with w = u_1 - u_2, against 1e-6 * max|w|.
GeometryReport check_symmetric(const std::vector<ScalarField>& fields, Plane plane);

/// Scaling comparison about the origin plus the ray test on {u_1 > thr}.
GeometryReport check_starshaped(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces,
                                double alpha, double supp_threshold, int rays = 720);

struct JunctionPoint {
  Point location;
  int degree = 0;
  bool on_measure = false;
  std::size_t nodes = 0;
};

struct JunctionReport {
  std::vector<JunctionPoint> points;
  int radius_cells = 3;
  int max_degree() const;
};

/// Nodes outside every mask, or on an interface between two phases, whose
/// detection disc meets >= 3 phases, grouped into 8-connected clusters.
/// `supports` (optional, one per phase or one union) flag on_measure.
JunctionReport detect_junctions(const std::vector<PhaseMask>& masks, int radius_cells = 3,
                                const std::vector<PhaseMask>& supports = {});

struct NondegeneracyRow {
  Point x0;
  double r = 0.0;
  double sup = 0.0;
  double bound = 0.0;
  bool passes = false;
};

struct NondegeneracyReport {
  std::vector<NondegeneracyRow> rows;
  std::size_t skipped_on_measure = 0;
  bool passed = true;
};

/// sup_{B_r(x0)} u >= lambda r^2 / 4 - tol for dyadic r in [4h, r_max].
/// Points within `measure_pad` of the measure support are skipped.
NondegeneracyReport check_nondegeneracy(const ScalarField& u, double lambda, const std::vector<Point>& points,
                                        const MeasureSpec& measure, double r_max, double measure_pad = 0.0,
                                        double tol = -1.0);

/// Throws "on_measure_support" when x0 lies on the measure support.
std::vector<NondegeneracyRow> nondegeneracy_at(const ScalarField& u, double lambda, Point x0,
                                               const MeasureSpec& measure, double r_max, double measure_pad = 0.0,
                                               double tol = -1.0);

/// Nodes of mask_a outside dilate(mask_b, cells).
std::size_t inclusion_violations(const PhaseMask& a, const PhaseMask& b, int cells = 1);
/// Sum over i != j of sum_nodes u_i u_j.
double segregation_defect(const std::vector<ScalarField>& fields);

/// Field value at p: exact node value when p sits on a node, bilinear
/// otherwise, `outside` beyond the box.
double sample_at(const ScalarField& field, Point p, double outside = 0.0);

}  // namespace mpqd
