#include "mpqd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "mpqd/error.hpp"

namespace mpqd {

namespace {

constexpr double pi = std::numbers::pi;

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_simpson(const std::function<double(double)>& g, double a, double b, double tol) {
  const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
  return adaptive_simpson(g, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 50);
}

void check_basis(const PhaseMask& region, const std::vector<HarmonicTestFn>& basis) {
  for (const auto& fn : basis) {
    // Wedge modes are singular at the apex, where the stencil test means nothing.
    if (fn.kind == HarmonicTestFn::Kind::wedge) continue;
    if (!passes_harmonic_check(fn.sample(region.grid()), region))
      throw Error("basis_not_harmonic", fn.describe() + " fails the discrete harmonicity check");
  }
}

double masked_abs_integral(const ScalarField& phi, const PhaseMask& mask) {
  double s = 0.0;
  for (std::size_t k = 0; k < phi.grid().size(); ++k)
    if (mask[k]) s += std::abs(phi[k]);
  return s * phi.grid().cell_area();
}

// Mask nodes with a 4-neighbour that is an interior node outside the mask.
std::vector<std::size_t> free_boundary_nodes(const PhaseMask& mask) {
  const Grid& g = mask.grid();
  std::vector<std::size_t> out;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) {
      if (!mask(i, j)) continue;
      const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
      for (const auto& q : nb) {
        if (g.is_boundary(q[0], q[1])) continue;
        if (!mask(q[0], q[1])) {
          out.push_back(g.index(i, j));
          break;
        }
      }
    }
  return out;
}

bool axis_plane(const Plane& p) {
  return (std::abs(p.n.x) == 1.0 && p.n.y == 0.0) || (p.n.x == 0.0 && std::abs(p.n.y) == 1.0);
}

// Node reflection across an axis-aligned plane whose coordinate is a whole or
// half grid step. Returns false if the image leaves the grid.
struct Reflector {
  const Grid& g;
  bool along_x;
  long twice;  // 2 * plane index

  Reflector(const Grid& grid, const Plane& p) : g(grid), along_x(p.n.x != 0.0) {
    const double coord = p.t * (along_x ? p.n.x : p.n.y);
    const double origin = along_x ? g.origin().x : g.origin().y;
    twice = std::lround(2.0 * (coord - origin) / g.h());
  }
  bool map(int i, int j, int& ri, int& rj) const {
    ri = i;
    rj = j;
    if (along_x) ri = static_cast<int>(twice - i);
    else rj = static_cast<int>(twice - j);
    return ri >= 0 && rj >= 0 && ri < g.nx() && rj < g.ny();
  }
};

double plane_coord(const Grid& g, const Plane& p, int i, int j) {
  const Point x = g.node(i, j);
  return x.x * p.n.x + x.y * p.n.y;
}

ScalarField difference_field(const std::vector<ScalarField>& fields) {
  if (fields.size() != 2) throw Error("phase_mismatch", "geometric checks need exactly two phases");
  require_same_grid(fields[0].grid(), fields[1].grid());
  return fields[0] - fields[1];
}

// Corner values of the cell containing p; false outside the grid.
bool cell_corners(const ScalarField& f, Point p, double out[4]) {
  const Grid& g = f.grid();
  const double fx = (p.x - g.origin().x) / g.h(), fy = (p.y - g.origin().y) / g.h();
  if (fx < 0 || fy < 0 || fx > g.nx() - 1 || fy > g.ny() - 1) return false;
  const int i = std::min(static_cast<int>(fx), g.nx() - 2), j = std::min(static_cast<int>(fy), g.ny() - 2);
  out[0] = f(i, j);
  out[1] = f(i + 1, j);
  out[2] = f(i, j + 1);
  out[3] = f(i + 1, j + 1);
  return true;
}

// Bilinear interpolation error bound on the cell containing p, from discrete
// second differences at its corners.
double interpolation_bound(const ScalarField& f, Point p) {
  const Grid& g = f.grid();
  const double fx = (p.x - g.origin().x) / g.h(), fy = (p.y - g.origin().y) / g.h();
  const int i0 = std::clamp(static_cast<int>(fx), 0, g.nx() - 2), j0 = std::clamp(static_cast<int>(fy), 0, g.ny() - 2);
  double d = 0.0;
  for (int j = j0; j <= j0 + 1; ++j)
    for (int i = i0; i <= i0 + 1; ++i) {
      const int ic = std::clamp(i, 1, g.nx() - 2), jc = std::clamp(j, 1, g.ny() - 2);
      const double dxx = std::abs(f(ic + 1, jc) - 2.0 * f(ic, jc) + f(ic - 1, jc));
      const double dyy = std::abs(f(ic, jc + 1) - 2.0 * f(ic, jc) + f(ic, jc - 1));
      d = std::max(d, dxx + dyy);
    }
  return d / 8.0;
}

}  // namespace

double sample_at(const ScalarField& field, Point p, double outside) {
  const Grid& g = field.grid();
  const double fx = (p.x - g.origin().x) / g.h(), fy = (p.y - g.origin().y) / g.h();
  const double rx = std::round(fx), ry = std::round(fy);
  if (std::abs(fx - rx) < 1e-7 && std::abs(fy - ry) < 1e-7) {
    const int i = static_cast<int>(rx), j = static_cast<int>(ry);
    if (i < 0 || j < 0 || i >= g.nx() || j >= g.ny()) return outside;
    return field(i, j);
  }
  return field.interpolate(p, outside);
}

double measure_integral(const MeasureSpec& mu, const HarmonicTestFn& phi) {
  double s = 0.0;
  for (const auto& b : mu.balls) s += b.mass() * phi(b.center);
  for (const auto& p : mu.points) s += p.mass * phi(p.center);
  for (const auto& seg : mu.segments) {
    const double L = seg.length();
    auto g = [&](double t) { return seg.density_at(t) * phi(seg.at(t)); };
    const double tol = 1e-9 * std::max(seg.mass(), 1e-300);
    s += integrate_simpson(g, 0.0, 0.5 * L, 0.5 * tol) + integrate_simpson(g, 0.5 * L, L, 0.5 * tol);
  }
  return s;
}

QuadratureReport verify_qi_one_phase(const PhaseMask& mask, const MeasureSpec& mu, double lambda,
                                     const std::vector<HarmonicTestFn>& basis) {
  check_basis(mask, basis);
  QuadratureReport rep;
  for (const auto& fn : basis) {
    const ScalarField phi = fn.sample(mask.grid());
    QuadratureRow row;
    row.basis = fn.describe();
    row.lhs = lambda * integrate(phi, mask);
    row.rhs = measure_integral(mu, fn);
    row.abs_err = std::abs(row.lhs - row.rhs);
    const double scale = std::max(std::abs(row.rhs), lambda * masked_abs_integral(phi, mask));
    row.rel_err = scale > 0.0 ? row.abs_err / scale : row.abs_err;
    rep.worst_rel_err = std::max(rep.worst_rel_err, row.rel_err);
    rep.rows.push_back(row);
  }
  return rep;
}

QuadratureReport verify_qi_pair(const std::vector<PhaseMask>& masks, std::size_t i, std::size_t j,
                                const std::vector<MeasureSpec>& measures, const std::vector<double>& lambdas,
                                const std::vector<HarmonicTestFn>& basis) {
  const std::size_t m = masks.size();
  if (i >= m || j >= m || i == j || measures.size() != m || lambdas.size() != m)
    throw Error("phase_mismatch", "bad phase pair or list sizes");
  if (!mask_intersection(masks[i], masks[j]).empty()) throw Error("masks_overlap", "pair masks are not disjoint");
  const PhaseMask both = mask_union(masks[i], masks[j]);
  check_basis(both, basis);
  QuadratureReport rep;
  for (const auto& fn : basis) {
    const ScalarField phi = fn.sample(both.grid());
    double ref = 0.0;
    for (std::size_t k = 0; k < phi.grid().size(); ++k)
      if (both[k]) ref = std::max(ref, std::abs(phi[k]));
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i || k == j || masks[k].empty()) continue;
      for (auto node : free_boundary_nodes(masks[k])) {
        if (std::abs(phi[node]) > 0.05 * ref) {
          throw Error("h_nonzero_on_other_boundaries",
                      fn.describe() + " does not vanish on the boundary of phase " + std::to_string(k + 1));
        }
      }
    }
    QuadratureRow row;
    row.basis = fn.describe();
    row.lhs = lambdas[i] * integrate(phi, masks[i]) - lambdas[j] * integrate(phi, masks[j]);
    row.rhs = measure_integral(measures[i], fn) - measure_integral(measures[j], fn);
    row.abs_err = std::abs(row.lhs - row.rhs);
    const double scale = std::max(std::abs(row.rhs), lambdas[i] * masked_abs_integral(phi, masks[i]) +
                                                         lambdas[j] * masked_abs_integral(phi, masks[j]));
    row.rel_err = scale > 0.0 ? row.abs_err / scale : row.abs_err;
    rep.worst_rel_err = std::max(rep.worst_rel_err, row.rel_err);
    rep.rows.push_back(row);
  }
  return rep;
}

ResidualReport pde_residual(const std::vector<ScalarField>& fields, const std::vector<PhaseMask>& masks,
                            const std::vector<ForceField>& forces, std::size_t i, std::size_t j) {
  const std::size_t m = fields.size();
  if (masks.size() != m || forces.size() != m || i >= m || j >= m || i == j)
    throw Error("phase_mismatch", "bad phase pair or list sizes");
  const Grid& g = fields[i].grid();
  const ScalarField lap = laplacian(fields[i] - fields[j]);

  PhaseMask excluded(g);
  PhaseMask fb(g);
  for (std::size_t k = 0; k < m; ++k) {
    const PhaseMask closure = dilate(masks[k], 1);
    if (k != i && k != j) excluded = mask_union(excluded, closure);
    // Both sides of every free boundary.
    fb = mask_union(fb, mask_difference(closure, masks[k]));
    for (auto node : free_boundary_nodes(masks[k])) fb.set(node, true);
  }
  const PhaseMask band = dilate(fb, 2);

  ResidualReport rep;
  for (int jj = 1; jj < g.ny() - 1; ++jj)
    for (int ii = 1; ii < g.nx() - 1; ++ii) {
      const std::size_t k = g.index(ii, jj);
      if (excluded[k]) continue;
      const double r = lap[k] + (masks[i][k] ? forces[i].f[k] : 0.0) - (masks[j][k] ? forces[j].f[k] : 0.0);
      const double a = std::abs(r);
      if (band[k]) {
        rep.band_sup = std::max(rep.band_sup, a);
        rep.band_l1 += a;
        ++rep.band_nodes;
      } else {
        rep.sup = std::max(rep.sup, a);
        rep.l1 += a;
        ++rep.nodes;
      }
    }
  rep.l1 *= g.cell_area();
  rep.band_l1 *= g.cell_area();
  return rep;
}

GeometryReport check_reflection(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces,
                                Plane plane, int t_samples) {
  if (!axis_plane(plane)) throw Error("plane_not_axis_aligned", "reflection planes must be axis-aligned");
  const ScalarField w = difference_field(fields);
  const Grid& g = w.grid();
  GeometryReport rep;
  rep.check = "reflection_monotone";
  const double scale = std::max(w.max_abs(), 1e-300);
  rep.tolerance = 1e-6 * scale;
  double fscale = 0.0;
  for (const auto& f : forces) fscale = std::max(fscale, f.f.max_abs());
  const double ftol = 1e-12 * fscale;

  // Grid-aligned t values from t0 to the far side of the box.
  double t_max = -1e300;
  for (int j = 0; j < g.ny(); j += g.ny() - 1)
    for (int i = 0; i < g.nx(); i += g.nx() - 1) t_max = std::max(t_max, plane_coord(g, plane, i, j));
  std::vector<double> ts;
  const double half = 0.5 * g.h();
  const int n = std::max(1, t_samples);
  for (int k = 0; k < n; ++k) {
    const double raw = plane.t + (t_max - g.h() - plane.t) * k / std::max(1, n - 1);
    const double snapped = plane.t + std::round((raw - plane.t) / half) * half;
    if (ts.empty() || snapped > ts.back()) ts.push_back(snapped);
  }

  const PhaseMask omega = PhaseMask::from_field(fields[0], 0.0);
  const PhaseMask omega_slack = dilate(omega, 1);
  const ScalarField& f1 = forces[0].f;
  const ScalarField& f2 = forces[1].f;
  for (double t : ts) {
    const Plane pt{plane.n, t};
    const Reflector refl(g, pt);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        if (plane_coord(g, pt, i, j) <= t + 1e-12 * g.h()) continue;
        int ri, rj;
        if (!refl.map(i, j, ri, rj)) {
          if (omega(i, j)) ++rep.support_violations;
          continue;
        }
        if (f1(i, j) > f1(ri, rj) + ftol || f2(i, j) < f2(ri, rj) - ftol) rep.hypothesis_ok = false;
        ++rep.samples;
        const double v = w(i, j) - w(ri, rj);
        if (v > rep.worst_violation) {
          rep.worst_violation = v;
          rep.witness = g.node(i, j);
        }
        if (omega(i, j) && !omega_slack(ri, rj)) ++rep.support_violations;
      }
  }
  // n . grad w <= 0 in the part of the phase beyond t0.
  const int di = static_cast<int>(plane.n.x), dj = static_cast<int>(plane.n.y);
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) {
      if (!omega(i, j) || plane_coord(g, plane, i, j) <= plane.t) continue;
      const double v = w(i + di, j + dj) - w(i, j);
      if (v > rep.worst_violation) {
        rep.worst_violation = v;
        rep.witness = g.node(i, j);
      }
    }
  rep.passed = rep.hypothesis_ok && rep.worst_violation <= rep.tolerance && rep.support_violations == 0;
  return rep;
}

GeometryReport check_symmetric(const std::vector<ScalarField>& fields, Plane plane) {
  if (!axis_plane(plane)) throw Error("plane_not_axis_aligned", "reflection planes must be axis-aligned");
  const ScalarField w = difference_field(fields);
  const Grid& g = w.grid();
  GeometryReport rep;
  rep.check = "symmetric";
  rep.tolerance = 1e-6 * std::max(w.max_abs(), 1e-300);
  const Reflector refl(g, plane);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      int ri, rj;
      if (!refl.map(i, j, ri, rj)) continue;
      ++rep.samples;
      const double v = std::abs(w(i, j) - w(ri, rj));
      if (v > rep.worst_violation) {
        rep.worst_violation = v;
        rep.witness = g.node(i, j);
      }
    }
  rep.passed = rep.worst_violation <= rep.tolerance;
  return rep;
}

GeometryReport check_starshaped(const std::vector<ScalarField>& fields, const std::vector<ForceField>& forces,
                                double alpha, double supp_threshold, int rays) {
  const ScalarField w = difference_field(fields);
  const Grid& g = w.grid();
  if (!g.contains({0.0, 0.0}) || g.inside_margin({0.0, 0.0}) <= 0.0)
    throw Error("origin_outside", "the origin must lie inside the box");
  GeometryReport rep;
  rep.check = "starshaped";
  const double scale = std::max(w.max_abs(), 1e-300);
  rep.tolerance = 1e-6 * scale;
  double fscale = 0.0;
  for (const auto& f : forces) fscale = std::max(fscale, f.f.max_abs());
  const double ftol = 1e-12 * fscale;

  const double ts[] = {0.5, 0.75, 0.9};
  for (double t : ts) {
    const double ta = std::pow(t, alpha), ta2 = std::pow(t, alpha + 2.0);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const Point x = g.node(i, j);
        if (norm(x) < 0.5 * g.h()) continue;
        const Point y = (1.0 / t) * x;
        double c1[4], c2[4];
        if (cell_corners(forces[0].f, y, c1) && cell_corners(forces[1].f, y, c2)) {
          const double lo = *std::min_element(c1, c1 + 4), hi = *std::max_element(c2, c2 + 4);
          if (ta * lo > forces[0].f(i, j) + ftol || ta * hi < forces[1].f(i, j) - ftol) rep.hypothesis_ok = false;
        }
        ++rep.samples;
        const double lhs = ta2 * sample_at(w, y);
        const double slack = rep.tolerance + (g.contains(y) ? ta2 * interpolation_bound(w, y) : 0.0);
        const double v = lhs - w(i, j) - slack;
        rep.scaling_violation = std::max(rep.scaling_violation, lhs - w(i, j));
        if (v > rep.worst_violation) {
          rep.worst_violation = v;
          rep.witness = x;
        }
      }
  }

  const PhaseMask mask = PhaseMask::from_field(fields[0], supp_threshold);
  auto inside = [&](Point p) {
    const int i = static_cast<int>(std::lround((p.x - g.origin().x) / g.h()));
    const int j = static_cast<int>(std::lround((p.y - g.origin().y) / g.h()));
    if (i < 0 || j < 0 || i >= g.nx() || j >= g.ny()) return false;
    return mask(i, j);
  };
  const double step = 0.5 * g.h();
  for (int k = 0; k < rays; ++k) {
    const double th = 2.0 * pi * k / rays;
    const Point dir{std::cos(th), std::sin(th)};
    int intervals = 0;
    bool in = false;
    double gap = 0.0;
    for (double s = 0.0; g.contains(s * dir); s += step) {
      const bool cur = inside(s * dir);
      if (cur) {
        if (!in && (intervals == 0 || gap > g.h() + 1e-12)) ++intervals;
        in = true;
        gap = 0.0;
      } else {
        if (in) gap = 0.0;
        in = false;
        gap += step;
      }
    }
    if (intervals > 1) {
      ++rep.support_violations;
      rep.witness = dir;
    }
  }
  rep.passed = rep.hypothesis_ok && rep.worst_violation <= 0.0 && rep.support_violations == 0;
  return rep;
}

int JunctionReport::max_degree() const {
  int d = 0;
  for (const auto& p : points) d = std::max(d, p.degree);
  return d;
}

JunctionReport detect_junctions(const std::vector<PhaseMask>& masks, int radius_cells,
                                const std::vector<PhaseMask>& supports) {
  JunctionReport rep;
  rep.radius_cells = radius_cells;
  if (masks.empty()) return rep;
  const Grid& g = masks.front().grid();
  const std::size_t m = masks.size();
  std::vector<int> owner(g.size(), -1);
  for (std::size_t p = 0; p < m; ++p) {
    require_same_grid(g, masks[p].grid());
    for (std::size_t k = 0; k < g.size(); ++k)
      if (masks[p][k]) owner[k] = static_cast<int>(p);
  }
  PhaseMask support(g);
  for (const auto& s : supports) support = mask_union(support, s);

  std::vector<std::pair<int, int>> disc;
  for (int dj = -radius_cells; dj <= radius_cells; ++dj)
    for (int di = -radius_cells; di <= radius_cells; ++di)
      if (di * di + dj * dj <= radius_cells * radius_cells) disc.emplace_back(di, dj);

  std::vector<int> degree(g.size(), 0);
  std::vector<char> touches(g.size(), 0);
  std::vector<char> seen(m);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      bool candidate = owner[k] < 0;
      if (!candidate) {
        const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
        for (const auto& q : nb) {
          if (q[0] < 0 || q[1] < 0 || q[0] >= g.nx() || q[1] >= g.ny()) continue;
          const int o = owner[g.index(q[0], q[1])];
          if (o >= 0 && o != owner[k]) candidate = true;
        }
      }
      if (!candidate) continue;
      std::fill(seen.begin(), seen.end(), 0);
      int count = 0;
      bool on = false;
      for (const auto& [di, dj] : disc) {
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= g.nx() || b >= g.ny()) continue;
        const std::size_t q = g.index(a, b);
        if (owner[q] >= 0 && !seen[owner[q]]) {
          seen[owner[q]] = 1;
          ++count;
        }
        if (support[q]) on = true;
      }
      degree[k] = count;
      touches[k] = on;
    }

  std::vector<char> visited(g.size(), 0);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k0 = g.index(i, j);
      if (degree[k0] < 3 || visited[k0]) continue;
      JunctionPoint jp;
      double sx = 0.0, sy = 0.0;
      std::vector<std::pair<int, int>> stack{{i, j}};
      visited[k0] = 1;
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        const std::size_t k = g.index(a, b);
        sx += g.x(a);
        sy += g.y(b);
        ++jp.nodes;
        jp.degree = std::max(jp.degree, degree[k]);
        jp.on_measure = jp.on_measure || touches[k];
        for (int db = -1; db <= 1; ++db)
          for (int da = -1; da <= 1; ++da) {
            const int c = a + da, d = b + db;
            if (c < 0 || d < 0 || c >= g.nx() || d >= g.ny()) continue;
            const std::size_t q = g.index(c, d);
            if (degree[q] >= 3 && !visited[q]) {
              visited[q] = 1;
              stack.emplace_back(c, d);
            }
          }
      }
      jp.location = {sx / jp.nodes, sy / jp.nodes};
      rep.points.push_back(jp);
    }
  return rep;
}

std::vector<NondegeneracyRow> nondegeneracy_at(const ScalarField& u, double lambda, Point x0,
                                               const MeasureSpec& measure, double r_max, double measure_pad,
                                               double tol) {
  if (measure.distance_to_support(x0) <= measure_pad) {
    std::ostringstream os;
    os << "point (" << x0.x << ", " << x0.y << ") lies on the measure support";
    throw Error("on_measure_support", os.str());
  }
  const Grid& g = u.grid();
  if (tol < 0.0) tol = lambda * g.cell_area();
  std::vector<NondegeneracyRow> rows;
  for (double r = 4.0 * g.h(); r <= r_max * (1.0 + 1e-12); r *= 2.0) {
    NondegeneracyRow row;
    row.x0 = x0;
    row.r = r;
    row.bound = lambda * r * r / 4.0;
    const int R = static_cast<int>(std::ceil(r / g.h())) + 1;
    const int ci = static_cast<int>(std::lround((x0.x - g.origin().x) / g.h()));
    const int cj = static_cast<int>(std::lround((x0.y - g.origin().y) / g.h()));
    for (int j = std::max(0, cj - R); j <= std::min(g.ny() - 1, cj + R); ++j)
      for (int i = std::max(0, ci - R); i <= std::min(g.nx() - 1, ci + R); ++i)
        if (distance(g.node(i, j), x0) < r) row.sup = std::max(row.sup, u(i, j));
    row.passes = row.sup >= row.bound - tol;
    rows.push_back(row);
  }
  return rows;
}

NondegeneracyReport check_nondegeneracy(const ScalarField& u, double lambda, const std::vector<Point>& points,
                                        const MeasureSpec& measure, double r_max, double measure_pad, double tol) {
  NondegeneracyReport rep;
  for (const Point& p : points) {
    try {
      for (const auto& row : nondegeneracy_at(u, lambda, p, measure, r_max, measure_pad, tol)) {
        rep.passed = rep.passed && row.passes;
        rep.rows.push_back(row);
      }
    } catch (const Error& e) {
      if (e.code() != "on_measure_support") throw;
      ++rep.skipped_on_measure;
    }
  }
  return rep;
}

std::size_t inclusion_violations(const PhaseMask& a, const PhaseMask& b, int cells) {
  return mask_difference(a, dilate(b, cells)).count();
}

double segregation_defect(const std::vector<ScalarField>& fields) {
  double s = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (i == j) continue;
      for (std::size_t k = 0; k < fields[i].grid().size(); ++k) s += fields[i][k] * fields[j][k];
    }
  return s;
}

}  // namespace mpqd
