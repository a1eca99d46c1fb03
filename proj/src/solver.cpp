#include "mpqd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "mpqd/energy.hpp"
#include "mpqd/error.hpp"

namespace mpqd {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct RunParams {
  double omega = 1.7;
  double tol_energy = 1e-10;
  double tol_residual = 1e-8;
  int max_sweeps = 1000;
  int check_every = 10;
  SegRule rule = SegRule::lowest_index;
  std::uint64_t seed = 0;
};

struct RunStats {
  int sweeps = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> trace;
};

// First i >= 1 with (i + j) % 2 == color.
inline int first_i(int j, int color) { return ((j + 1) % 2 == color) ? 1 : 2; }

inline double nbr_sum(const double* u, std::size_t c, std::size_t nx) {
  return (u[c + 1] + u[c - 1]) + (u[c + nx] + u[c - nx]);
}

double edge_energy(const Grid& g, const std::vector<double>& u) {
  const std::size_t nx = g.nx(), ny = g.ny();
  double s = 0.0;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = j * nx + i;
      if (i + 1 < nx) {
        const double d = u[c + 1] - u[c];
        s += d * d;
      }
      if (j + 1 < ny) {
        const double d = u[c + nx] - u[c];
        s += d * d;
      }
    }
  return 0.5 * s;
}

double phase_energy(const Grid& g, const std::vector<double>& u, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += f[k] * u[k];
  return edge_energy(g, u) - s * g.cell_area();
}

double relative_drop(double prev, double cur) {
  return (prev - cur) / std::max(std::abs(cur), 1e-300);
}

// ---------------------------------------------------------------- obstacle

double obstacle_residual_raw(const Grid& g, const std::vector<double>& u, const std::vector<double>& f,
                             const std::uint8_t* fixed) {
  const std::size_t nx = g.nx();
  const double inv_h2 = 1.0 / g.cell_area();
  double worst = 0.0;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) {
      const std::size_t c = g.index(i, j);
      if (fixed && fixed[c]) continue;
      const double gr = (4.0 * u[c] - nbr_sum(u.data(), c, nx)) * inv_h2 - f[c];
      worst = std::max(worst, u[c] > 0.0 ? std::abs(gr) : std::max(0.0, -gr));
    }
  return worst;
}

RunStats run_obstacle(const Grid& g, const std::vector<double>& f, std::vector<double>& u,
                      const std::uint8_t* fixed, const RunParams& rp) {
  const std::size_t nx = g.nx();
  const double h2 = g.cell_area();
  const double w = rp.omega;
  RunStats st;
  double e_prev = phase_energy(g, u, f);
  st.trace.push_back(e_prev);
  for (int sweep = 1; sweep <= rp.max_sweeps; ++sweep) {
    for (int color = 0; color < 2; ++color)
      for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = first_i(j, color); i < g.nx() - 1; i += 2) {
          const std::size_t c = g.index(i, j);
          if (fixed && fixed[c]) continue;
          const double star = 0.25 * (nbr_sum(u.data(), c, nx) + f[c] * h2);
          u[c] = std::max(0.0, u[c] + w * (star - u[c]));
        }
    st.sweeps = sweep;
    if (sweep % rp.check_every == 0 || sweep == rp.max_sweeps) {
      const double e = phase_energy(g, u, f);
      st.trace.push_back(e);
      st.residual = obstacle_residual_raw(g, u, f, fixed);
      if (relative_drop(e_prev, e) <= rp.tol_energy && st.residual <= rp.tol_residual) {
        st.converged = true;
        break;
      }
      e_prev = e;
    }
  }
  if (rp.max_sweeps <= 0) st.residual = obstacle_residual_raw(g, u, f, fixed);
  return st;
}

// -------------------------------------------------------------- segregated

int pick_winner(const double* cand, int m, int active, SegRule rule, std::uint64_t seed, std::uint64_t key) {
  double best = 0.0;
  for (int p = 0; p < m; ++p) best = std::max(best, cand[p]);
  if (best <= 0.0) return -1;
  if (active >= 0 && cand[active] == best) return active;
  int ties[16];
  int nt = 0;
  for (int p = 0; p < m && nt < 16; ++p)
    if (cand[p] == best) ties[nt++] = p;
  if (nt == 1 || rule == SegRule::lowest_index) return ties[0];
  return ties[splitmix(seed ^ splitmix(key)) % static_cast<std::uint64_t>(nt)];
}

double segregated_residual_raw(const Grid& g, const std::vector<std::vector<double>>& u,
                               const std::vector<std::vector<double>>& f) {
  const std::size_t nx = g.nx();
  const int m = static_cast<int>(u.size());
  const double inv_h2 = 1.0 / g.cell_area();
  double worst = 0.0;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) {
      const std::size_t c = g.index(i, j);
      int active = -1;
      for (int p = 0; p < m; ++p)
        if (u[p][c] > 0.0) active = p;
      for (int p = 0; p < m; ++p) {
        const double gr = (4.0 * u[p][c] - nbr_sum(u[p].data(), c, nx)) * inv_h2 - f[p][c];
        double r;
        if (p == active) {
          r = std::abs(gr);
        } else if (active >= 0) {
          r = std::max(0.0, -gr - 4.0 * u[active][c] * inv_h2);
        } else {
          r = std::max(0.0, -gr);
        }
        worst = std::max(worst, r);
      }
    }
  return worst;
}

double total_energy(const Grid& g, const std::vector<std::vector<double>>& u,
                    const std::vector<std::vector<double>>& f) {
  double e = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p) e += phase_energy(g, u[p], f[p]);
  return e;
}

RunStats run_segregated(const Grid& g, const std::vector<std::vector<double>>& f, std::vector<std::vector<double>>& u,
                        const RunParams& rp) {
  const std::size_t nx = g.nx();
  const int m = static_cast<int>(u.size());
  const double h2 = g.cell_area();
  const double w = rp.omega;
  std::vector<double> star(m), cand(m);
  RunStats st;
  double e_prev = total_energy(g, u, f);
  st.trace.push_back(e_prev);
  for (int sweep = 1; sweep <= rp.max_sweeps; ++sweep) {
    for (int color = 0; color < 2; ++color)
      for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = first_i(j, color); i < g.nx() - 1; i += 2) {
          const std::size_t c = g.index(i, j);
          int active = -1;
          for (int p = 0; p < m; ++p) {
            if (u[p][c] > 0.0) active = p;
            star[p] = 0.25 * (nbr_sum(u[p].data(), c, nx) + f[p][c] * h2);
            cand[p] = std::max(0.0, star[p]);
          }
          const int win = pick_winner(cand.data(), m, active, rp.rule, rp.seed, c);
          if (active < 0) {
            if (win >= 0) u[win][c] = w * star[win];
          } else if (win < 0 || win == active) {
            u[active][c] = std::max(0.0, u[active][c] + w * (star[active] - u[active][c]));
          } else {
            // Phase change: exact local minimizer for the winner.
            u[active][c] = 0.0;
            u[win][c] = star[win];
          }
        }
    st.sweeps = sweep;
    if (sweep % rp.check_every == 0 || sweep == rp.max_sweeps) {
      const double e = total_energy(g, u, f);
      st.trace.push_back(e);
      st.residual = segregated_residual_raw(g, u, f);
      if (relative_drop(e_prev, e) <= rp.tol_energy && st.residual <= rp.tol_residual) {
        st.converged = true;
        break;
      }
      e_prev = e;
    }
  }
  if (rp.max_sweeps <= 0) st.residual = segregated_residual_raw(g, u, f);
  return st;
}

// ------------------------------------------------------------------ scalar

double scalar_energy(const Grid& g, const std::vector<double>& u, const std::vector<double>& f,
                     const std::vector<double>& h) {
  std::vector<double> pos(u.size()), neg(u.size());
  double src = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    pos[k] = std::max(u[k], 0.0);
    neg[k] = std::max(-u[k], 0.0);
    src += f[k] * pos[k] - h[k] * neg[k];
  }
  return edge_energy(g, pos) + edge_energy(g, neg) - src * g.cell_area();
}

double scalar_residual_raw(const Grid& g, const std::vector<double>& u, const std::vector<double>& f,
                           const std::vector<double>& h) {
  const std::size_t nx = g.nx();
  const double inv_h2 = 1.0 / g.cell_area();
  double worst = 0.0;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) {
      const std::size_t c = g.index(i, j);
      double sp = 0.0, sn = 0.0;
      for (std::size_t n : {c + 1, c - 1, c + nx, c - nx}) {
        sp += std::max(u[n], 0.0);
        sn += std::max(-u[n], 0.0);
      }
      const double up = std::max(u[c], 0.0), un = std::max(-u[c], 0.0);
      const double gp = (4.0 * up - sp) * inv_h2 - f[c];
      const double gn = (4.0 * un - sn) * inv_h2 + h[c];
      double r;
      if (u[c] > 0.0) {
        r = std::max(std::abs(gp), std::max(0.0, -gn - 4.0 * up * inv_h2));
      } else if (u[c] < 0.0) {
        r = std::max(std::abs(gn), std::max(0.0, -gp - 4.0 * un * inv_h2));
      } else {
        r = std::max(std::max(0.0, -gp), std::max(0.0, -gn));
      }
      worst = std::max(worst, r);
    }
  return worst;
}

RunStats run_scalar(const Grid& g, const std::vector<double>& f, const std::vector<double>& h, std::vector<double>& u,
                    const RunParams& rp) {
  const std::size_t nx = g.nx();
  const double h2 = g.cell_area();
  const double w = rp.omega;
  RunStats st;
  double e_prev = scalar_energy(g, u, f, h);
  st.trace.push_back(e_prev);
  for (int sweep = 1; sweep <= rp.max_sweeps; ++sweep) {
    for (int color = 0; color < 2; ++color)
      for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = first_i(j, color); i < g.nx() - 1; i += 2) {
          const std::size_t c = g.index(i, j);
          double sp = 0.0, sn = 0.0;
          for (std::size_t n : {c + 1, c - 1, c + nx, c - nx}) {
            sp += std::max(u[n], 0.0);
            sn += std::max(-u[n], 0.0);
          }
          // Optimal magnitudes for the positive and the negative branch.
          const double p = 0.25 * (sp + f[c] * h2);
          const double q = 0.25 * (sn - h[c] * h2);
          const double cur = u[c];
          if (cur > 0.0) {
            if (q > p && q > 0.0) u[c] = -q;
            else u[c] = std::max(0.0, cur + w * (p - cur));
          } else if (cur < 0.0) {
            if (p > q && p > 0.0) u[c] = p;
            else u[c] = -std::max(0.0, -cur + w * (q + cur));
          } else if (p > 0.0 || q > 0.0) {
            u[c] = p >= q ? w * p : -w * q;
          }
        }
    st.sweeps = sweep;
    if (sweep % rp.check_every == 0 || sweep == rp.max_sweeps) {
      const double e = scalar_energy(g, u, f, h);
      st.trace.push_back(e);
      st.residual = scalar_residual_raw(g, u, f, h);
      if (relative_drop(e_prev, e) <= rp.tol_energy && st.residual <= rp.tol_residual) {
        st.converged = true;
        break;
      }
      e_prev = e;
    }
  }
  return st;
}

// ----------------------------------------------------------------- helpers

RunParams run_params(const SolverParams& p, const Grid& g, double tol_r, bool coarse) {
  RunParams rp;
  rp.omega = resolve_omega(p, g);
  rp.tol_energy = coarse ? std::max(p.tol_energy, 1e-8) : p.tol_energy;
  rp.tol_residual = coarse ? 100.0 * tol_r : tol_r;
  rp.max_sweeps = p.max_sweeps;
  rp.check_every = std::max(1, p.check_every);
  rp.rule = p.seg_rule;
  rp.seed = p.seed;
  return rp;
}

PhaseMask restrict_mask(const PhaseMask& fine, const Grid& coarse) {
  PhaseMask out(coarse);
  for (int j = 0; j < coarse.ny(); ++j)
    for (int i = 0; i < coarse.nx(); ++i) out.set(i, j, fine(2 * i, 2 * j));
  return out;
}

std::vector<std::uint8_t> mask_bytes(const PhaseMask& m) {
  std::vector<std::uint8_t> out(m.grid().size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = m[k] ? 1 : 0;
  return out;
}

void zero_boundary(const Grid& g, std::vector<double>& u) {
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (g.is_boundary(i, j)) u[g.index(i, j)] = 0.0;
}

void project_nodes(std::vector<std::vector<double>>& u, SegRule rule, std::uint64_t seed) {
  if (u.empty()) return;
  const std::size_t n = u[0].size();
  std::vector<double> c(u.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t p = 0; p < u.size(); ++p) c[p] = std::max(0.0, u[p][k]);
    c = seg_project(c, rule, seed, k);
    for (std::size_t p = 0; p < u.size(); ++p) u[p][k] = c[p];
  }
}

bool all_forces_nonpositive(const std::vector<ForceField>& forces) {
  for (const auto& f : forces)
    if (f.f.max() > 0.0) return false;
  return true;
}

void check_forces(const std::vector<ForceField>& forces) {
  if (forces.empty()) throw Error("no_phases", "need at least one phase");
  for (const auto& f : forces) {
    require_same_grid(forces.front().grid(), f.grid());
    if (!f.f.all_finite()) throw Error("invalid_force", "force has non-finite values");
  }
}

// Window [i0, i1] x [j0, j1] of interior nodes around a trial move.
struct Window {
  int i0, i1, j0, j1;
  Window(const Grid& g, int i, int j, int r)
      : i0(std::max(1, i - r)), i1(std::min(g.nx() - 2, i + r)), j0(std::max(1, j - r)), j1(std::min(g.ny() - 2, j + r)) {}
};

// Edges with an end in the window plus the source term of window nodes; the
// only part of the energy a change inside the window can touch.
double window_energy(const Grid& g, const Window& w, const std::vector<double>& u, const std::vector<double>& f) {
  const std::size_t nx = g.nx();
  double e = 0.0, s = 0.0;
  for (int j = w.j0; j <= w.j1; ++j)
    for (int i = w.i0; i <= w.i1; ++i) {
      const std::size_t c = g.index(i, j);
      const double a = u[c];
      double d = u[c + 1] - a;
      e += d * d;
      d = u[c + nx] - a;
      e += d * d;
      if (i == w.i0) {
        d = u[c - 1] - a;
        e += d * d;
      }
      if (j == w.j0) {
        d = u[c - nx] - a;
        e += d * d;
      }
      s += f[c] * a;
    }
  return 0.5 * e - s * g.cell_area();
}

// Interface nodes are handed to a neighbouring phase or emptied one at a time;
// the window around the node is then relaxed by exact coordinate descent with
// the node held. Every kept move lowers the energy.
bool node_moves(const Grid& g, const std::vector<std::vector<double>>& f, std::vector<std::vector<double>>& u) {
  constexpr int radius = 8, sweeps = 60, passes = 20;
  const std::size_t m = u.size(), nx = g.nx();
  const double h2 = g.cell_area();
  double scale = 0.0;
  for (const auto& x : f)
    for (double v : x) scale = std::max(scale, std::abs(v));
  scale *= h2 * 1e-15;
  std::vector<double> star(m);
  std::vector<std::vector<double>> saved(m);
  bool any = false;
  for (int pass = 0; pass < passes; ++pass) {
    bool moved = false;
    for (int j = 1; j < g.ny() - 1; ++j)
      for (int i = 1; i < g.nx() - 1; ++i) {
        const std::size_t c = g.index(i, j);
        std::size_t q = m;
        for (std::size_t p = 0; p < m; ++p)
          if (u[p][c] > 0.0) q = p;
        if (q == m) continue;
        for (std::size_t p = 0; p <= m; ++p) {
          if (p == q || !(u[q][c] > 0.0)) continue;
          if (p < m && !(u[p][c + 1] > 0.0 || u[p][c - 1] > 0.0 || u[p][c + nx] > 0.0 || u[p][c - nx] > 0.0))
            continue;
          const Window w(g, i, j, radius);
          double before = 0.0;
          for (std::size_t r = 0; r < m; ++r) {
            before += window_energy(g, w, u[r], f[r]);
            saved[r].clear();
            for (int jj = w.j0; jj <= w.j1; ++jj)
              for (int ii = w.i0; ii <= w.i1; ++ii) saved[r].push_back(u[r][g.index(ii, jj)]);
          }
          u[q][c] = 0.0;
          for (int s = 0; s < sweeps; ++s)
            for (int jj = w.j0; jj <= w.j1; ++jj)
              for (int ii = w.i0; ii <= w.i1; ++ii) {
                const std::size_t k = g.index(ii, jj);
                if (k == c) {
                  if (p < m) u[p][k] = std::max(0.0, 0.25 * (nbr_sum(u[p].data(), k, nx) + f[p][k] * h2));
                  continue;
                }
                std::size_t best = m;
                double bv = 0.0;
                for (std::size_t r = 0; r < m; ++r) {
                  star[r] = 0.25 * (nbr_sum(u[r].data(), k, nx) + f[r][k] * h2);
                  if (star[r] > bv) {
                    bv = star[r];
                    best = r;
                  }
                }
                for (std::size_t r = 0; r < m; ++r) u[r][k] = r == best ? bv : 0.0;
              }
          double after = 0.0;
          for (std::size_t r = 0; r < m; ++r) after += window_energy(g, w, u[r], f[r]);
          if (after < before - scale) {
            moved = true;
            break;
          }
          for (std::size_t r = 0; r < m; ++r) {
            std::size_t n = 0;
            for (int jj = w.j0; jj <= w.j1; ++jj)
              for (int ii = w.i0; ii <= w.i1; ++ii) u[r][g.index(ii, jj)] = saved[r][n++];
          }
        }
      }
    if (!moved) break;
    any = true;
  }
  return any;
}

double scalar_window_energy(const Grid& g, const Window& w, const std::vector<double>& u,
                            const std::vector<double>& f, const std::vector<double>& h) {
  const std::size_t nx = g.nx();
  auto edge = [](double a, double b) {
    const double dp = std::max(a, 0.0) - std::max(b, 0.0), dn = std::max(-a, 0.0) - std::max(-b, 0.0);
    return dp * dp + dn * dn;
  };
  double e = 0.0, s = 0.0;
  for (int j = w.j0; j <= w.j1; ++j)
    for (int i = w.i0; i <= w.i1; ++i) {
      const std::size_t c = g.index(i, j);
      e += edge(u[c], u[c + 1]) + edge(u[c], u[c + nx]);
      if (i == w.i0) e += edge(u[c], u[c - 1]);
      if (j == w.j0) e += edge(u[c], u[c - nx]);
      s += f[c] * std::max(u[c], 0.0) - h[c] * std::max(-u[c], 0.0);
    }
  return 0.5 * e - s * g.cell_area();
}

// Scalar counterpart of node_moves: a node next to a sign change takes the
// other sign or is zeroed, and its window is relaxed with the node held.
bool scalar_node_moves(const Grid& g, const std::vector<double>& f, const std::vector<double>& h,
                       std::vector<double>& u) {
  constexpr int radius = 4, sweeps = 12, passes = 20;
  const std::size_t nx = g.nx();
  const double h2 = g.cell_area();
  double scale = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) scale = std::max({scale, std::abs(f[k]), std::abs(h[k])});
  scale *= h2 * 1e-15;
  auto branches = [&](std::size_t k, double& p, double& q) {
    double sp = 0.0, sn = 0.0;
    for (std::size_t n : {k + 1, k - 1, k + nx, k - nx}) {
      sp += std::max(u[n], 0.0);
      sn += std::max(-u[n], 0.0);
    }
    p = 0.25 * (sp + f[k] * h2);
    q = 0.25 * (sn - h[k] * h2);
  };
  std::vector<double> saved;
  bool any = false;
  for (int pass = 0; pass < passes; ++pass) {
    bool moved = false;
    for (int j = 1; j < g.ny() - 1; ++j)
      for (int i = 1; i < g.nx() - 1; ++i) {
        const std::size_t c = g.index(i, j);
        const double sgn = u[c] > 0.0 ? 1.0 : u[c] < 0.0 ? -1.0 : 0.0;
        if (sgn == 0.0) continue;
        bool contact = false;
        for (std::size_t n : {c + 1, c - 1, c + nx, c - nx}) contact |= sgn * u[n] < 0.0;
        for (int mode = 0; mode < 2; ++mode) {
          if (mode == 0 && !contact) continue;
          const Window w(g, i, j, radius);
          const double before = scalar_window_energy(g, w, u, f, h);
          saved.clear();
          for (int jj = w.j0; jj <= w.j1; ++jj)
            for (int ii = w.i0; ii <= w.i1; ++ii) saved.push_back(u[g.index(ii, jj)]);
          for (int s = 0; s < sweeps; ++s)
            for (int jj = w.j0; jj <= w.j1; ++jj)
              for (int ii = w.i0; ii <= w.i1; ++ii) {
                const std::size_t k = g.index(ii, jj);
                double p, q;
                branches(k, p, q);
                if (k == c) {
                  u[k] = mode == 1 ? 0.0 : sgn > 0.0 ? -std::max(q, 0.0) : std::max(p, 0.0);
                } else if (p >= q && p > 0.0) {
                  u[k] = p;
                } else {
                  u[k] = q > 0.0 ? -q : 0.0;
                }
              }
          if (scalar_window_energy(g, w, u, f, h) < before - scale) {
            moved = true;
            break;
          }
          std::size_t n = 0;
          for (int jj = w.j0; jj <= w.j1; ++jj)
            for (int ii = w.i0; ii <= w.i1; ++ii) u[g.index(ii, jj)] = saved[n++];
        }
      }
    if (!moved) break;
    any = true;
  }
  return any;
}

// One phase takes the layer of another phase next to it (mode 0) or that layer
// is emptied (mode 1); the state is relaxed and kept when the energy drops.
void polish_interfaces(const std::vector<ForceField>& forces, const SolverParams& params, double tol_r,
                       std::vector<std::vector<double>>& u, RunStats& st) {
  const Grid& g = forces.front().grid();
  const std::size_t m = forces.size(), nx = g.nx();
  std::vector<std::vector<double>> ff;
  for (const auto& x : forces) ff.push_back(x.f.data());
  double best = total_energy(g, u, ff);
  for (int round = 0; round < params.polish_rounds; ++round) {
    bool improved = false;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q)
        for (int mode = 0; mode < 2 && p != q; ++mode) {
          std::vector<std::vector<double>> w = u;
          bool moved = false;
          for (int j = 1; j < g.ny() - 1; ++j)
            for (int i = 1; i < g.nx() - 1; ++i) {
              const std::size_t c = g.index(i, j);
              if (!(u[q][c] > 0.0)) continue;
              if (u[p][c + 1] > 0.0 || u[p][c - 1] > 0.0 || u[p][c + nx] > 0.0 || u[p][c - nx] > 0.0) {
                if (mode == 0) w[p][c] = u[q][c];
                w[q][c] = 0.0;
                moved = true;
              }
            }
          if (!moved) continue;
          RunStats cst = run_segregated(g, ff, w, run_params(params, g, tol_r, false));
          if (cst.trace.back() < best - 1e-14 * std::abs(best)) {
            best = cst.trace.back();
            u = std::move(w);
            st = std::move(cst);
            improved = true;
          }
        }
    // drop a phase, settle the rest without it, then relax everything
    for (std::size_t p = 0; p < m && m > 1; ++p) {
      if (std::none_of(u[p].begin(), u[p].end(), [](double x) { return x > 0.0; })) continue;
      std::vector<std::vector<double>> w = u, fw = ff;
      std::fill(w[p].begin(), w[p].end(), 0.0);
      std::fill(fw[p].begin(), fw[p].end(), 0.0);
      run_segregated(g, fw, w, run_params(params, g, tol_r, false));
      RunStats cst = run_segregated(g, ff, w, run_params(params, g, tol_r, false));
      if (cst.trace.back() < best - 1e-14 * std::abs(best)) {
        best = cst.trace.back();
        u = std::move(w);
        st = std::move(cst);
        improved = true;
      }
    }
    std::vector<std::vector<double>> w = u;
    if (node_moves(g, ff, w)) {
      RunStats cst = run_segregated(g, ff, w, run_params(params, g, tol_r, false));
      if (cst.trace.back() < best - 1e-14 * std::abs(best)) {
        best = cst.trace.back();
        u = std::move(w);
        st = std::move(cst);
        improved = true;
      }
    }
    if (!improved) break;
  }
}

}  // namespace

std::string to_string(SegRule r) { return r == SegRule::lowest_index ? "lowest_index" : "random"; }

SegRule parse_seg_rule(const std::string& name) {
  if (name == "lowest_index") return SegRule::lowest_index;
  if (name == "random") return SegRule::random;
  throw Error("invalid_params", "unknown seg_rule '" + name + "'");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::ok:
      return "ok";
    case SolveStatus::max_sweeps_exceeded:
      return "max_sweeps_exceeded";
    case SolveStatus::support_touches_boundary:
      return "support_touches_boundary";
  }
  return "ok";
}

void SolverParams::validate() const {
  if (!(omega > 0.0 && omega < 2.0)) throw Error("invalid_params", "omega must lie in (0, 2)");
  if (!(tol_energy > 0.0)) throw Error("invalid_params", "tol_energy must be positive");
  if (max_sweeps < 1) throw Error("invalid_params", "max_sweeps must be >= 1");
  if (check_every < 1) throw Error("invalid_params", "check_every must be >= 1");
  if (threads < 1) throw Error("invalid_params", "threads must be >= 1");
  if (polish_rounds < 0) throw Error("invalid_params", "polish_rounds must be >= 0");
}

double resolve_tol_residual(const SolverParams& p, const std::vector<ForceField>& forces) {
  if (p.tol_residual > 0.0) return p.tol_residual;
  double lam = 0.0;
  for (const auto& f : forces) lam = std::max(lam, f.lambda);
  return 1e-8 * lam;
}

double resolve_supp_threshold(const SolverParams& p, const std::vector<ForceField>& forces) {
  if (p.supp_threshold > 0.0) return p.supp_threshold;
  double lam = 0.0;
  for (const auto& f : forces) lam = std::max(lam, f.lambda);
  const double d = forces.empty() ? 1.0 : forces.front().grid().diameter();
  return 1e-8 * lam * d * d;
}

double resolve_omega(const SolverParams& p, const Grid& g) {
  if (!p.omega_auto) return p.omega;
  const double L = std::max(g.width(), g.height());
  return 2.0 / (1.0 + std::sin(std::numbers::pi * g.h() / L));
}

std::vector<double> seg_project(std::vector<double> c, SegRule rule, std::uint64_t seed, std::uint64_t key) {
  const int win = pick_winner(c.data(), static_cast<int>(c.size()), -1, rule, seed, key);
  for (int p = 0; p < static_cast<int>(c.size()); ++p)
    if (p != win) c[p] = 0.0;
  return c;
}

std::vector<Grid> level_grids(const Grid& fine, int levels) {
  const int cap = levels > 0 ? levels : 6;
  std::vector<Grid> out{fine};
  while (static_cast<int>(out.size()) < cap) {
    const Grid& g = out.back();
    if ((g.nx() - 1) % 2 || (g.ny() - 1) % 2) break;
    const int cx = (g.nx() - 1) / 2 + 1, cy = (g.ny() - 1) / 2 + 1;
    if (cx < 17 || cy < 17) break;
    out.emplace_back(g.origin(), 2.0 * g.h(), cx, cy);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

ScalarField restrict_full_weighting(const ScalarField& fine, const Grid& coarse) {
  ScalarField out(coarse);
  for (int j = 0; j < coarse.ny(); ++j)
    for (int i = 0; i < coarse.nx(); ++i) {
      const int fi = 2 * i, fj = 2 * j;
      if (coarse.is_boundary(i, j)) {
        out(i, j) = fine(fi, fj);
        continue;
      }
      const double corners = (fine(fi - 1, fj - 1) + fine(fi + 1, fj - 1)) + (fine(fi - 1, fj + 1) + fine(fi + 1, fj + 1));
      const double edges = (fine(fi - 1, fj) + fine(fi + 1, fj)) + (fine(fi, fj - 1) + fine(fi, fj + 1));
      out(i, j) = (corners + 2.0 * edges + 4.0 * fine(fi, fj)) / 16.0;
    }
  return out;
}

ScalarField prolong_bilinear(const ScalarField& coarse, const Grid& fine) {
  ScalarField out(fine);
  for (int j = 0; j < fine.ny(); ++j)
    for (int i = 0; i < fine.nx(); ++i) {
      const int ci = i / 2, cj = j / 2;
      const bool ox = i % 2, oy = j % 2;
      double v;
      if (!ox && !oy) v = coarse(ci, cj);
      else if (ox && !oy) v = 0.5 * (coarse(ci, cj) + coarse(ci + 1, cj));
      else if (!ox && oy) v = 0.5 * (coarse(ci, cj) + coarse(ci, cj + 1));
      else v = 0.25 * ((coarse(ci, cj) + coarse(ci + 1, cj)) + (coarse(ci, cj + 1) + coarse(ci + 1, cj + 1)));
      out(i, j) = v;
    }
  return out;
}

double obstacle_residual(const ScalarField& u, const ForceField& force, const PhaseMask* fixed_zero) {
  require_same_grid(u.grid(), force.grid());
  std::vector<std::uint8_t> fixed;
  if (fixed_zero) fixed = mask_bytes(*fixed_zero);
  return obstacle_residual_raw(u.grid(), u.data(), force.f.data(), fixed_zero ? fixed.data() : nullptr);
}

double segregated_residual(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces) {
  std::vector<std::vector<double>> u, f;
  for (const auto& x : fields) u.push_back(x.data());
  for (const auto& x : forces) f.push_back(x.f.data());
  return segregated_residual_raw(fields.front().grid(), u, f);
}

ObstacleResult minimize_obstacle(const ForceField& force, const SolverParams& params, const PhaseMask* fixed_zero,
                                 const ScalarField* init) {
  params.validate();
  const Grid& fine = force.grid();
  const double tol_r = resolve_tol_residual(params, {force});
  ObstacleResult res;
  if (force.f.max() <= 0.0 && !init) {
    res.u = ScalarField(fine);
    res.converged = true;
    res.energy_trace = {0.0};
    return res;
  }
  std::vector<Grid> grids = init ? std::vector<Grid>{fine} : level_grids(fine, params.levels);
  const std::size_t L = grids.size();
  std::vector<std::vector<double>> fs(L);
  std::vector<PhaseMask> fixed(L);
  fs[L - 1] = force.f.data();
  if (fixed_zero) fixed[L - 1] = *fixed_zero;
  for (std::size_t l = L - 1; l > 0; --l) {
    fs[l - 1] = restrict_full_weighting(ScalarField(grids[l], fs[l]), grids[l - 1]).data();
    if (fixed_zero) fixed[l - 1] = restrict_mask(fixed[l], grids[l - 1]);
  }
  std::vector<double> u;
  if (init) {
    require_same_grid(init->grid(), fine);
    u = init->data();
    for (double& x : u) x = std::max(0.0, x);
  } else {
    u.assign(grids[0].size(), 0.0);
  }
  RunStats st;
  for (std::size_t l = 0; l < L; ++l) {
    const Grid& g = grids[l];
    if (l > 0) {
      u = prolong_bilinear(ScalarField(grids[l - 1], u), g).data();
      for (double& x : u) x = std::max(0.0, x);
    }
    std::vector<std::uint8_t> fx;
    if (fixed_zero) {
      fx = mask_bytes(fixed[l]);
      for (std::size_t k = 0; k < u.size(); ++k)
        if (fx[k]) u[k] = 0.0;
    }
    zero_boundary(g, u);
    st = run_obstacle(g, fs[l], u, fixed_zero ? fx.data() : nullptr, run_params(params, g, tol_r, l + 1 < L));
  }
  res.u = ScalarField(fine, std::move(u));
  res.sweeps = st.sweeps;
  res.residual = st.residual;
  res.converged = st.converged;
  res.energy_trace = std::move(st.trace);
  return res;
}

std::vector<ScalarField> minimize_K(const std::vector<ForceField>& forces, const SolverParams& params,
                                    const std::vector<ScalarField>* init) {
  check_forces(forces);
  if (init && init->size() != forces.size()) throw Error("invalid_init", "init needs one field per phase");
  std::vector<ScalarField> out;
  for (std::size_t p = 0; p < forces.size(); ++p) {
    ObstacleResult r = minimize_obstacle(forces[p], params, nullptr, init ? &(*init)[p] : nullptr);
    if (!r.converged) {
      std::ostringstream os;
      os << "phase " << p + 1 << " stopped after " << r.sweeps << " sweeps with residual " << r.residual;
      throw Error("max_sweeps_exceeded", os.str());
    }
    out.push_back(std::move(r.u));
  }
  return out;
}

SolveResult minimize_S(const std::vector<ForceField>& forces, const SolverParams& params,
                       const std::vector<ScalarField>* init) {
  check_forces(forces);
  params.validate();
  const Grid& fine = forces.front().grid();
  const std::size_t m = forces.size();
  const double tol_r = resolve_tol_residual(params, forces);
  SolveResult res;
  res.seed = params.seed;
  res.supp_threshold = resolve_supp_threshold(params, forces);

  auto finish_masks = [&] {
    res.masks.clear();
    res.v_masks.clear();
    res.inclusion_violations = 0;
    for (std::size_t p = 0; p < m; ++p) {
      res.masks.push_back(PhaseMask::from_field(res.ubar[p], res.supp_threshold));
      res.v_masks.push_back(PhaseMask::from_field(res.v[p], res.supp_threshold));
      res.inclusion_violations += mask_difference(res.masks[p], dilate(res.v_masks[p], 1)).count();
    }
    for (const auto& u : res.ubar)
      for (int j = 1; j < fine.ny() - 1; ++j)
        for (int i = 1; i < fine.nx() - 1; ++i) {
          const bool rim = i == 1 || j == 1 || i == fine.nx() - 2 || j == fine.ny() - 2;
          if (rim && u(i, j) > 0.0 && res.status == SolveStatus::ok) res.status = SolveStatus::support_touches_boundary;
        }
  };

  if (!init && all_forces_nonpositive(forces)) {
    for (std::size_t p = 0; p < m; ++p) {
      res.ubar.emplace_back(fine);
      res.v.emplace_back(fine);
    }
    res.energy_trace = {0.0};
    res.converged = true;
    finish_masks();
    return res;
  }

  res.v = minimize_K(forces, params);

  if (m == 1 && !init) {
    res.ubar = res.v;
    res.energy_trace = {energy_J(res.ubar, forces).total};
    res.residual = obstacle_residual(res.ubar[0], forces[0]);
    res.converged = true;
    finish_masks();
    return res;
  }

  std::vector<std::vector<double>> u(m);
  RunStats st;
  if (init) {
    if (init->size() != m) throw Error("invalid_init", "init needs one field per phase");
    for (std::size_t p = 0; p < m; ++p) {
      require_same_grid((*init)[p].grid(), fine);
      u[p] = (*init)[p].data();
      for (double x : u[p])
        if (x < 0.0) throw Error("invalid_init", "init fields must be nonnegative");
    }
    for (std::size_t k = 0; k < fine.size(); ++k) {
      int pos = 0;
      for (std::size_t p = 0; p < m; ++p) pos += u[p][k] > 0.0;
      if (pos > 1) throw Error("invalid_init", "init fields must be segregated");
    }
    for (auto& x : u) zero_boundary(fine, x);
    res.start = "init";
    st = run_segregated(fine, [&] {
      std::vector<std::vector<double>> f;
      for (const auto& x : forces) f.push_back(x.f.data());
      return f;
    }(), u, run_params(params, fine, tol_r, false));
  } else {
    const std::vector<Grid> grids = level_grids(fine, params.levels);
    const std::size_t L = grids.size();
    std::vector<std::vector<std::vector<double>>> fs(L, std::vector<std::vector<double>>(m));
    for (std::size_t p = 0; p < m; ++p) {
      fs[L - 1][p] = forces[p].f.data();
      for (std::size_t l = L - 1; l > 0; --l)
        fs[l - 1][p] = restrict_full_weighting(ScalarField(grids[l], fs[l][p]), grids[l - 1]).data();
    }
    std::vector<std::vector<double>> coarse_v(m);
    for (std::size_t p = 0; p < m; ++p) {
      if (L == 1) {
        coarse_v[p] = res.v[p].data();
      } else {
        coarse_v[p].assign(grids[0].size(), 0.0);
        run_obstacle(grids[0], fs[0][p], coarse_v[p], nullptr, run_params(params, grids[0], tol_r, true));
      }
    }
    auto nested = [&](std::vector<std::vector<double>> w) {
      RunStats s;
      for (std::size_t l = 0; l < L; ++l) {
        const Grid& g = grids[l];
        if (l > 0) {
          for (auto& x : w) x = prolong_bilinear(ScalarField(grids[l - 1], x), g).data();
          project_nodes(w, params.seg_rule, params.seed);
        }
        for (auto& x : w) zero_boundary(g, x);
        s = run_segregated(g, fs[l], w, run_params(params, g, tol_r, l + 1 < L));
      }
      return std::make_pair(std::move(w), std::move(s));
    };

    // Start 0: the K-minimizer with the pointwise largest phase kept.
    u = coarse_v;
    project_nodes(u, params.seg_rule, params.seed);
    std::tie(u, st) = nested(std::move(u));
    res.start = "projected";
    if (params.multistart) {
      // Priority starts: a node goes to the first phase in the order whose
      // K-minimizer is positive there.
      std::vector<std::size_t> order(m);
      for (std::size_t p = 0; p < m; ++p) order[p] = p;
      std::vector<std::vector<std::size_t>> orders;
      if (m <= 4) {
        do orders.push_back(order);
        while (std::next_permutation(order.begin(), order.end()));
      } else {
        for (std::size_t s = 0; s < m; ++s) {
          std::vector<std::size_t> o(m);
          for (std::size_t p = 0; p < m; ++p) o[p] = (p + s) % m;
          orders.push_back(o);
        }
      }
      double best = st.trace.back();
      for (const auto& o : orders) {
        std::vector<std::vector<double>> w(m, std::vector<double>(grids[0].size(), 0.0));
        for (std::size_t k = 0; k < grids[0].size(); ++k)
          for (std::size_t q : o)
            if (coarse_v[q][k] > 0.0) {
              w[q][k] = coarse_v[q][k];
              break;
            }
        auto [cand, cst] = nested(std::move(w));
        if (cst.trace.back() < best) {
          best = cst.trace.back();
          u = std::move(cand);
          st = std::move(cst);
          res.start = "priority";
          for (std::size_t q : o) res.start += " " + std::to_string(q + 1);
        }
      }
    }
  }
  if (m > 1 && params.polish_rounds > 0) polish_interfaces(forces, params, tol_r, u, st);
  for (std::size_t p = 0; p < m; ++p) res.ubar.emplace_back(fine, std::move(u[p]));
  res.energy_trace = std::move(st.trace);
  res.sweeps_used = st.sweeps;
  res.residual = st.residual;
  res.converged = st.converged;
  if (!st.converged) res.status = SolveStatus::max_sweeps_exceeded;
  finish_masks();
  return res;
}

ScalarSolveResult solve_two_phase_scalar(const ForceField& f, const ForceField& h, const SolverParams& params) {
  params.validate();
  require_same_grid(f.grid(), h.grid());
  const Grid& fine = f.grid();
  const double tol_r = resolve_tol_residual(params, {f, h});
  ScalarSolveResult res;
  if (f.f.max() <= 0.0 && h.f.min() >= 0.0) {
    res.u = ScalarField(fine);
    res.converged = true;
    res.energy_trace = {0.0};
    return res;
  }
  const std::vector<Grid> grids = level_grids(fine, params.levels);
  const std::size_t L = grids.size();
  std::vector<std::vector<double>> fs(L), hs(L);
  fs[L - 1] = f.f.data();
  hs[L - 1] = h.f.data();
  for (std::size_t l = L - 1; l > 0; --l) {
    fs[l - 1] = restrict_full_weighting(ScalarField(grids[l], fs[l]), grids[l - 1]).data();
    hs[l - 1] = restrict_full_weighting(ScalarField(grids[l], hs[l]), grids[l - 1]).data();
  }
  auto nested = [&](std::vector<double> u) {
    RunStats s;
    for (std::size_t l = 0; l < L; ++l) {
      const Grid& g = grids[l];
      if (l > 0) u = prolong_bilinear(ScalarField(grids[l - 1], u), g).data();
      zero_boundary(g, u);
      s = run_scalar(g, fs[l], hs[l], u, run_params(params, g, tol_r, l + 1 < L));
    }
    const std::vector<double>& ff = fs[L - 1];
    const std::vector<double>& hh = hs[L - 1];
    const std::size_t nx = fine.nx();
    auto attempt = [&](std::vector<double>& w) {
      RunStats cs = run_scalar(fine, ff, hh, w, run_params(params, fine, tol_r, false));
      if (!(cs.trace.back() < s.trace.back() - 1e-14 * std::abs(s.trace.back()))) return false;
      u = std::move(w);
      s = std::move(cs);
      return true;
    };
    for (int round = 0; s.converged && round < params.polish_rounds; ++round) {
      bool improved = false;
      // layer moves: the sign next to the interface is flipped or zeroed
      for (double sgn : {1.0, -1.0})
        for (int mode = 0; mode < 2; ++mode) {
          std::vector<double> w = u;
          bool moved = false;
          for (int j = 1; j < fine.ny() - 1; ++j)
            for (int i = 1; i < fine.nx() - 1; ++i) {
              const std::size_t c = fine.index(i, j);
              if (!(sgn * u[c] < 0.0)) continue;
              if (sgn * u[c + 1] > 0.0 || sgn * u[c - 1] > 0.0 || sgn * u[c + nx] > 0.0 || sgn * u[c - nx] > 0.0) {
                w[c] = mode == 0 ? -u[c] : 0.0;
                moved = true;
              }
            }
          if (moved) improved |= attempt(w);
        }
      // drop one sign, settle the other alone, then relax both
      for (double sgn : {1.0, -1.0}) {
        if (std::none_of(u.begin(), u.end(), [&](double x) { return sgn * x > 0.0; })) continue;
        std::vector<double> v(u.size()), force(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) {
          v[k] = std::max(-sgn * u[k], 0.0);
          force[k] = sgn > 0.0 ? -hh[k] : ff[k];
        }
        run_obstacle(fine, force, v, nullptr, run_params(params, fine, tol_r, false));
        std::vector<double> w(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) w[k] = -sgn * v[k];
        improved |= attempt(w);
      }
      std::vector<double> w = u;
      if (scalar_node_moves(fine, ff, hh, w)) improved |= attempt(w);
      if (!improved) break;
    }
    return std::make_pair(std::move(u), std::move(s));
  };
  std::vector<double> u(grids[0].size(), 0.0);
  RunStats st;
  std::tie(u, st) = nested(std::move(u));
  if (params.multistart) {
    // starts built from the two decoupled obstacle problems on the coarse grid
    const Grid& g0 = grids[0];
    std::vector<double> vp(g0.size(), 0.0), vn(g0.size(), 0.0), mh(g0.size());
    for (std::size_t k = 0; k < g0.size(); ++k) mh[k] = -hs[0][k];
    run_obstacle(g0, fs[0], vp, nullptr, run_params(params, g0, tol_r, true));
    run_obstacle(g0, mh, vn, nullptr, run_params(params, g0, tol_r, true));
    for (int mode = 0; mode < 3; ++mode) {
      std::vector<double> w(g0.size(), 0.0);
      for (std::size_t k = 0; k < g0.size(); ++k) {
        const bool pos = mode == 0 ? vp[k] >= vn[k] : mode == 1 ? vp[k] > 0.0 : !(vn[k] > 0.0);
        w[k] = pos ? vp[k] : -vn[k];
      }
      auto [cand, cst] = nested(std::move(w));
      if (cst.trace.back() < st.trace.back()) {
        u = std::move(cand);
        st = std::move(cst);
      }
    }
  }
  if (!st.converged) {
    std::ostringstream os;
    os << "stopped after " << st.sweeps << " sweeps with residual " << st.residual;
    throw Error("max_sweeps_exceeded", os.str());
  }
  res.u = ScalarField(fine, std::move(u));
  res.sweeps = st.sweeps;
  res.residual = st.residual;
  res.converged = true;
  res.energy_trace = std::move(st.trace);
  return res;
}

}  // namespace mpqd
