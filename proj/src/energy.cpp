#include "mpqd/energy.hpp"

#include <algorithm>
#include <cmath>

#include "mpqd/error.hpp"

namespace mpqd {

namespace {

void check_inputs(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces) {
  if (fields.size() != forces.size()) throw Error("phase_mismatch", "need one force per field");
  if (fields.empty()) return;
  const Grid& g = fields.front().grid();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    require_same_grid(g, fields[i].grid());
    require_same_grid(g, forces[i].grid());
  }
}

// Sum over edges of (pos(a) - pos(b))^2 for a transform pos.
template <class F>
double edge_sum(const ScalarField& u, F part) {
  const Grid& g = u.grid();
  double s = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double c = part(u(i, j));
      if (i + 1 < g.nx()) {
        const double d = part(u(i + 1, j)) - c;
        s += d * d;
      }
      if (j + 1 < g.ny()) {
        const double d = part(u(i, j + 1)) - c;
        s += d * d;
      }
    }
  }
  return s;
}

}  // namespace

double dirichlet_energy(const ScalarField& u) {
  return 0.5 * edge_sum(u, [](double v) { return v; });
}

EnergyBreakdown energy_J(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces) {
  check_inputs(fields, forces);
  EnergyBreakdown out;
  for (std::size_t p = 0; p < fields.size(); ++p) {
    const ScalarField& u = fields[p];
    for (double v : u.values())
      if (v < 0.0) throw Error("constraint_violation", "phase " + std::to_string(p + 1) + " has a negative node");
    PhaseEnergy e;
    e.dirichlet = dirichlet_energy(u);
    double s = 0.0;
    for (std::size_t k = 0; k < u.grid().size(); ++k) s += forces[p].f[k] * u[k];
    e.force = s * u.grid().cell_area();
    out.per_phase.push_back(e);
  }
  for (const auto& e : out.per_phase) out.total += e.dirichlet - e.force;
  return out;
}

double energy_scalar(const ScalarField& u, const ForceField& f, const ForceField& h) {
  require_same_grid(u.grid(), f.grid());
  require_same_grid(u.grid(), h.grid());
  const double dir = 0.5 * edge_sum(u, [](double v) { return std::max(v, 0.0); }) +
                     0.5 * edge_sum(u, [](double v) { return std::max(-v, 0.0); });
  double fp = 0.0, hm = 0.0;
  for (std::size_t k = 0; k < u.grid().size(); ++k) {
    fp += f.f[k] * std::max(u[k], 0.0);
    hm += h.f[k] * std::min(u[k], 0.0);
  }
  const double h2 = u.grid().cell_area();
  return (dir - fp * h2) - hm * h2;
}

std::vector<ScalarField> energy_gradient(const std::vector<ScalarField>& fields,
                                         const std::vector<ForceField>& forces) {
  check_inputs(fields, forces);
  std::vector<ScalarField> out;
  for (std::size_t p = 0; p < fields.size(); ++p) {
    for (double v : fields[p].values())
      if (v < 0.0) throw Error("constraint_violation", "phase " + std::to_string(p + 1) + " has a negative node");
    ScalarField g = laplacian(fields[p]);
    const Grid& grid = g.grid();
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i)
        g(i, j) = grid.is_boundary(i, j) ? 0.0 : -g(i, j) - forces[p].f(i, j);
    out.push_back(std::move(g));
  }
  return out;
}

CgResult solve_masked_poisson(const PhaseMask& mask, const ScalarField& rhs, double rel_tol, int max_iter) {
  require_same_grid(mask.grid(), rhs.grid());
  const Grid& g = mask.grid();
  const double inv_h2 = 1.0 / g.cell_area();
  std::vector<std::size_t> idx;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i)
      if (mask(i, j)) idx.push_back(g.index(i, j));

  ScalarField active(g);
  for (auto k : idx) active[k] = 1.0;
  const std::ptrdiff_t nx = g.nx();
  auto apply = [&](const ScalarField& x, ScalarField& y) {
    for (auto k : idx) {
      const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(k);
      const double s = (active[c + 1] * x[c + 1] + active[c - 1] * x[c - 1]) +
                       (active[c + nx] * x[c + nx] + active[c - nx] * x[c - nx]);
      y[k] = (4.0 * x[k] - s) * inv_h2;
    }
  };
  auto dot = [&](const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (auto k : idx) s += a[k] * b[k];
    return s;
  };

  CgResult res{ScalarField(g), 0, 0.0};
  ScalarField r(g), z(g), p(g), ap(g);
  const double diag = 4.0 * inv_h2;
  for (auto k : idx) r[k] = rhs[k];
  const double bnorm = std::sqrt(dot(r, r));
  if (idx.empty() || bnorm == 0.0) return res;
  for (auto k : idx) z[k] = r[k] / diag;
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double alpha = rz / dot(p, ap);
    for (auto k : idx) {
      res.x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    res.iterations = it;
    res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    if (res.relative_residual <= rel_tol) break;
    for (auto k : idx) z[k] = r[k] / diag;
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (auto k : idx) p[k] = z[k] + beta * p[k];
  }
  return res;
}

std::optional<std::string> control_admissibility(const std::vector<ScalarField>& h_controls,
                                                 const std::vector<ForceField>& forces,
                                                 const std::vector<PhaseMask>& supports) {
  const std::size_t m = h_controls.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double lam = forces[i].lambda;
    for (double v : h_controls[i].values())
      if (v < 0.0 || v > lam * (1.0 + 1e-12)) return std::string("bounds");
  }
  const std::size_t n = m ? h_controls[0].grid().size() : 0;
  for (std::size_t k = 0; k < n; ++k) {
    int positive = 0;
    for (std::size_t i = 0; i < m; ++i) positive += h_controls[i][k] > 0.0;
    if (positive > 1) return std::string("segregation");
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (supports[i][k] && !(h_controls[i][k] > 0.0)) return std::string("support");
  return std::nullopt;
}

ControlReport control_energy(const std::vector<ScalarField>& h_controls, const std::vector<ForceField>& forces,
                             const std::vector<PhaseMask>& supports) {
  check_inputs(h_controls, forces);
  if (h_controls.empty()) throw Error("phase_mismatch", "no phases");
  const Grid& g = h_controls.front().grid();
  std::vector<PhaseMask> supp = supports;
  if (supp.empty()) {
    for (const auto& f : forces) supp.push_back(PhaseMask::from_field(f.mu, 0.0));
  }
  if (supp.size() != h_controls.size()) throw Error("phase_mismatch", "need one support mask per phase");
  if (auto clause = control_admissibility(h_controls, forces, supp))
    throw Error("not_in_U_ad", "admissibility clause '" + *clause + "' fails");

  ControlReport rep;
  double lam_max = 0.0;
  const double h2 = g.cell_area();
  for (std::size_t i = 0; i < h_controls.size(); ++i) {
    const ScalarField& h = h_controls[i];
    const ForceField& F = forces[i];
    lam_max = std::max(lam_max, F.lambda);
    const PhaseMask omega = PhaseMask::from_field(h, 0.0);
    ScalarField rhs(g);
    for (std::size_t k = 0; k < g.size(); ++k) rhs[k] = F.mu[k] - h[k];
    CgResult cg = solve_masked_poisson(omega, rhs);
    ControlPhase ph;
    ph.cg_iterations = cg.iterations;
    ph.cg_residual = cg.relative_residual;
    ph.dirichlet = 2.0 * dirichlet_energy(cg.x);
    double lt = 0.0, mt = 0.0, neg = 0.0, ident = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double v = cg.x[k];
      const double vp = std::max(v, 0.0), vm = std::max(-v, 0.0);
      lt += F.lambda * vp;
      mt += F.mu[k] * v;
      neg += vm;
      ident += vp * (F.lambda - h[k]) + h[k] * vm;
    }
    ph.lambda_term = lt * h2;
    ph.measure_term = mt * h2;
    ph.negative_mass = neg * h2;
    rep.I += ph.dirichlet + ph.lambda_term - ph.measure_term;
    rep.I_identity += ident * h2;
    rep.phases.push_back(ph);
    rep.v.push_back(std::move(cg.x));
  }
  rep.tol_num = 1e-8 * g.box_area() * lam_max * lam_max;
  rep.nonnegative = rep.I >= -rep.tol_num;
  return rep;
}

}  // namespace mpqd
