#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpqd/grid.hpp"
#include "mpqd/measures.hpp"

namespace mpqd {

struct PhaseEnergy {
  double dirichlet = 0.0;  // 1/2 int |grad u|^2
  double force = 0.0;      // int f u
};

struct EnergyBreakdown {
  double total = 0.0;
  std::vector<PhaseEnergy> per_phase;
};

/// 1/2 * sum over grid edges of (u_a - u_b)^2, i.e. forward differences per
/// cell times h^2. Its first variation at node c is -h^2 * lap_h u(c).
double dirichlet_energy(const ScalarField& u);

/// sum_i int 1/2 |grad u_i|^2 - f_i u_i. Fields must be >= 0.
EnergyBreakdown energy_J(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces);

/// Scalar two-phase functional int 1/2|grad u|^2 - f max(u,0) - h min(u,0).
/// The Dirichlet part is taken on the positive and negative parts
/// separately, so for u = u1 - u2 with u1 u2 = 0 and h = -f2 the value equals
/// energy_J([u1, u2], [f1, f2]) term by term.
double energy_scalar(const ScalarField& u, const ForceField& f, const ForceField& h);

/// g_i = -lap_h u_i - f_i on interior nodes, 0 on the box boundary. The
/// partial derivative of energy_J w.r.t. an interior node value is h^2 g_i.
std::vector<ScalarField> energy_gradient(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces);

struct ControlPhase {
  double dirichlet = 0.0;     // int |grad v|^2
  double lambda_term = 0.0;   // int lambda v^+
  double measure_term = 0.0;  // int mu v
  double negative_mass = 0.0; // int v^-
  int cg_iterations = 0;
  double cg_residual = 0.0;
};

struct ControlReport {
  double I = 0.0;
  /// Same quantity through summation by parts: sum int v^+(lambda - h) + h v^-.
  double I_identity = 0.0;
  double tol_num = 0.0;
  bool admissible = true;
  bool nonnegative = true;  // I >= -tol_num
  std::vector<ControlPhase> phases;
  std::vector<ScalarField> v;
};

/// Returns the violated admissibility clause ("bounds", "segregation",
/// "support"), or nothing when h is in U_ad.
std::optional<std::string> control_admissibility(const std::vector<ScalarField>& h_controls,
                                                 const std::vector<ForceField>& forces,
                                                 const std::vector<PhaseMask>& supports);

/// Solves lap v_i = h_i - mu_i in {h_i > 0}, v_i = 0 elsewhere, by Jacobi-
/// preconditioned CG and evaluates I. `supports` are the measure supports; when
/// empty they are taken as {mu_i > 0}. Throws "not_in_U_ad".
ControlReport control_energy(const std::vector<ScalarField>& h_controls, const std::vector<ForceField>& forces,
                             const std::vector<PhaseMask>& supports = {});

struct CgResult {
  ScalarField x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// -lap_h x = rhs on `mask` (interior nodes only), x = 0 elsewhere.
CgResult solve_masked_poisson(const PhaseMask& mask, const ScalarField& rhs, double rel_tol = 1e-10,
                              int max_iter = 20000);

}  // namespace mpqd
