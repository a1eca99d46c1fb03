#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpqd/grid.hpp"
#include "mpqd/measures.hpp"

namespace mpqd {

enum class SegRule { lowest_index, random };

std::string to_string(SegRule r);
SegRule parse_seg_rule(const std::string& name);

struct SolverParams {
  double omega = 1.7;
  /// Use 2 / (1 + sin(pi h / L)) on each level instead of `omega`.
  bool omega_auto = false;
  double tol_energy = 1e-10;
  /// Projected-residual stop; <= 0 means 1e-8 * max lambda.
  double tol_residual = 0.0;
  int max_sweeps = 200000;
  int check_every = 10;
  SegRule seg_rule = SegRule::lowest_index;
  std::uint64_t seed = 0;
  /// Coarse-to-fine levels; <= 0 picks as many as the grid allows.
  int levels = 0;
  /// Mask threshold; <= 0 means 1e-8 * max lambda * diam^2.
  double supp_threshold = 0.0;
  int threads = 1;
  /// Also start from every phase-priority ordering of the K-minimizer and
  /// keep the lowest final energy.
  bool multistart = true;
  /// Rounds of interface moves on the finest grid: one phase takes over the
  /// adjacent layer of another, the result is relaxed, and kept if the energy
  /// drops. 0 disables.
  int polish_rounds = 4;

  void validate() const;
};

double resolve_tol_residual(const SolverParams& p, const std::vector<ForceField>& forces);
double resolve_supp_threshold(const SolverParams& p, const std::vector<ForceField>& forces);
double resolve_omega(const SolverParams& p, const Grid& grid);

enum class SolveStatus { ok, max_sweeps_exceeded, support_touches_boundary };
std::string to_string(SolveStatus s);

struct SolveResult {
  std::vector<ScalarField> ubar;
  std::vector<ScalarField> v;
  std::vector<PhaseMask> masks;
  std::vector<PhaseMask> v_masks;
  std::vector<double> energy_trace;
  bool converged = false;
  int sweeps_used = 0;
  double residual = 0.0;
  SolveStatus status = SolveStatus::ok;
  /// Nodes of mask(ubar_i) outside dilate(mask(v_i), 1), summed over phases.
  std::size_t inclusion_violations = 0;
  double supp_threshold = 0.0;
  std::uint64_t seed = 0;
  /// Which start produced `ubar` ("projected", "priority 2 1 3", "init").
  std::string start = "projected";
};

/// Keep the strictly largest candidate and zero the rest. Exact ties go to the
/// lowest index, or to a pseudo-random one derived from (seed, key).
std::vector<double> seg_project(std::vector<double> candidates, SegRule rule, std::uint64_t seed = 0,
                                std::uint64_t key = 0);

struct ObstacleResult {
  ScalarField u;
  int sweeps = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> energy_trace;
};

/// One-phase obstacle problem by projected SOR. Nodes in `fixed_zero` are held
/// at 0 like box-boundary nodes.
ObstacleResult minimize_obstacle(const ForceField& force, const SolverParams& params,
                                 const PhaseMask* fixed_zero = nullptr, const ScalarField* init = nullptr);

/// Componentwise minimizers over K. Throws "max_sweeps_exceeded".
std::vector<ScalarField> minimize_K(const std::vector<ForceField>& forces, const SolverParams& params,
                                    const std::vector<ScalarField>* init = nullptr);

/// Segregated minimization over S. Without `init` the solve starts from the
/// seg-projected K-minimizer on the coarsest level and refines; with `init` it
/// runs on the given grid only. Failures are reported through `status`.
SolveResult minimize_S(const std::vector<ForceField>& forces, const SolverParams& params,
                       const std::vector<ScalarField>* init = nullptr);

/// Projected residual of the segregated problem (sup over interior nodes).
double segregated_residual(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces);
/// Projected residual of a single obstacle problem.
double obstacle_residual(const ScalarField& u, const ForceField& force, const PhaseMask* fixed_zero = nullptr);

struct ScalarSolveResult {
  ScalarField u;
  int sweeps = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> energy_trace;
};

/// Minimizes the scalar two-phase functional from u = 0. Throws
/// "max_sweeps_exceeded".
ScalarSolveResult solve_two_phase_scalar(const ForceField& f, const ForceField& h, const SolverParams& params);

/// Coarse-to-fine helpers, exposed for tests.
std::vector<Grid> level_grids(const Grid& fine, int levels);
ScalarField restrict_full_weighting(const ScalarField& fine, const Grid& coarse);
ScalarField prolong_bilinear(const ScalarField& coarse, const Grid& fine);

}  // namespace mpqd
