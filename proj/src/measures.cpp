#include "mpqd/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mpqd/error.hpp"

namespace mpqd {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 == 0.0) return distance(p, a);
  double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool segments_intersect(Point a, Point b, Point c, Point d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return false;
}

double segment_segment_distance(Point a, Point b, Point c, Point d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d), point_segment_distance(c, a, b),
                   point_segment_distance(d, a, b)});
}

// Distance between two "shapes": a segment [a,b] thickened by radius r.
struct Capsule {
  Point a, b;
  double r;
};

std::vector<Capsule> capsules(const MeasureSpec& m) {
  std::vector<Capsule> out;
  for (const auto& ball : m.balls) out.push_back({ball.center, ball.center, ball.radius});
  for (const auto& p : m.points) out.push_back({p.center, p.center, 0.0});
  for (const auto& s : m.segments) out.push_back({s.a, s.b, 0.0});
  return out;
}

bool axis_aligned(Point a, Point b) { return a.x == b.x || a.y == b.y; }

void add_scaled_atom(ScalarField& total, ScalarField& atom, double exact_mass) {
  const double h2 = atom.grid().cell_area();
  double sum = 0.0;
  for (double v : atom.values()) sum += v;
  sum *= h2;
  if (sum <= 0.0) return;
  const double s = exact_mass / sum;
  for (std::size_t k = 0; k < atom.grid().size(); ++k) total[k] += s * atom[k];
}

void deposit_ball(ScalarField& out, Point c, double radius, double density) {
  const Grid& g = out.grid();
  const double h = g.h();
  const int i0 = std::max(0, static_cast<int>(std::floor((c.x - radius - g.origin().x) / h)) - 1);
  const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((c.x + radius - g.origin().x) / h)) + 1);
  const int j0 = std::max(0, static_cast<int>(std::floor((c.y - radius - g.origin().y) / h)) - 1);
  const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((c.y + radius - g.origin().y) / h)) + 1);
  constexpr int sub = 8;
  const double half_diag = h * std::numbers::sqrt2 / 2.0;
  bool any = false;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Point p = g.node(i, j);
      const double d = distance(p, c);
      double cov;
      if (d + half_diag <= radius) {
        cov = 1.0;
      } else if (d - half_diag >= radius) {
        cov = 0.0;
      } else {
        int hits = 0;
        for (int b = 0; b < sub; ++b)
          for (int a = 0; a < sub; ++a) {
            const Point q{p.x + ((a + 0.5) / sub - 0.5) * h, p.y + ((b + 0.5) / sub - 0.5) * h};
            if (distance(q, c) < radius) ++hits;
          }
        cov = static_cast<double>(hits) / (sub * sub);
      }
      if (cov > 0.0) {
        out(i, j) += density * cov;
        any = true;
      }
    }
  }
  if (!any) {
    // Ball smaller than a cell: put it on the nearest node.
    const int i = std::clamp(static_cast<int>(std::lround((c.x - g.origin().x) / h)), 0, g.nx() - 1);
    const int j = std::clamp(static_cast<int>(std::lround((c.y - g.origin().y) / h)), 0, g.ny() - 1);
    out(i, j) += 1.0;
  }
}

void deposit_segment(ScalarField& out, const SegmentAtom& s) {
  const Grid& g = out.grid();
  const double h = g.h();
  const double L = s.length();
  const int n = std::max(2048, static_cast<int>(std::ceil(16.0 * L / h)));
  const double ds = L / n;
  const double inv_h2 = 1.0 / (h * h);
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) * ds;
    const double w = s.density_at(t) * ds;
    if (w == 0.0) continue;
    const Point p = s.at(t);
    const double fx = (p.x - g.origin().x) / h, fy = (p.y - g.origin().y) / h;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx() - 2);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny() - 2);
    const double tx = std::clamp(fx - i, 0.0, 1.0), ty = std::clamp(fy - j, 0.0, 1.0);
    out(i, j) += w * (1 - tx) * (1 - ty) * inv_h2;
    out(i + 1, j) += w * tx * (1 - ty) * inv_h2;
    out(i, j + 1) += w * (1 - tx) * ty * inv_h2;
    out(i + 1, j + 1) += w * tx * ty * inv_h2;
  }
}

}  // namespace

double BallAtom::mass() const { return density * pi * radius * radius; }

double SegmentAtom::length() const { return distance(a, b); }

double SegmentAtom::density_at(double s) const {
  const double L = length();
  if (s < 0.0 || s > L) return 0.0;
  switch (profile) {
    case SegmentProfile::constant:
      return amplitude;
    case SegmentProfile::sqrt_tent: {
      const double half = 0.5 * L;
      return amplitude * (1.0 - std::sqrt(std::abs(s - half) / half));
    }
  }
  return 0.0;
}

Point SegmentAtom::at(double s) const {
  const double L = length();
  return a + (s / L) * (b - a);
}

double SegmentAtom::mass() const {
  const double L = length();
  return profile == SegmentProfile::constant ? amplitude * L : amplitude * L / 3.0;
}

std::string to_string(SegmentProfile p) { return p == SegmentProfile::constant ? "constant" : "sqrt_tent"; }

SegmentProfile parse_segment_profile(const std::string& name) {
  if (name == "constant") return SegmentProfile::constant;
  if (name == "sqrt_tent") return SegmentProfile::sqrt_tent;
  throw Error("invalid_measure", "unknown segment profile '" + name + "'");
}

double MeasureSpec::total_mass() const {
  double m = 0.0;
  for (const auto& b : balls) m += b.mass();
  for (const auto& p : points) m += p.mass;
  for (const auto& s : segments) m += s.mass();
  return m;
}

void MeasureSpec::validate() const {
  for (const auto& b : balls) {
    if (!(b.radius > 0.0) || !(b.density >= 0.0) || !std::isfinite(b.density))
      throw Error("invalid_measure", "ball needs radius > 0 and density >= 0");
  }
  for (const auto& p : points) {
    if (!(p.mass >= 0.0) || !std::isfinite(p.mass)) throw Error("invalid_measure", "point mass must be >= 0");
  }
  for (const auto& s : segments) {
    if (!(s.length() > 0.0)) throw Error("invalid_measure", "segment has zero length");
    if (!axis_aligned(s.a, s.b)) throw Error("invalid_measure", "segments must be axis-aligned");
    if (!(s.amplitude >= 0.0) || !std::isfinite(s.amplitude))
      throw Error("invalid_measure", "segment amplitude must be >= 0");
  }
}

MeasureSpec MeasureSpec::mapped(const std::function<Point(Point)>& map) const {
  MeasureSpec out;
  for (auto b : balls) {
    b.center = map(b.center);
    out.balls.push_back(b);
  }
  for (auto p : points) {
    p.center = map(p.center);
    out.points.push_back(p);
  }
  for (auto s : segments) {
    s.a = map(s.a);
    s.b = map(s.b);
    // Snap round-off from rotations so axis alignment survives.
    if (std::abs(s.a.x - s.b.x) < 1e-12) s.b.x = s.a.x;
    if (std::abs(s.a.y - s.b.y) < 1e-12) s.b.y = s.a.y;
    out.segments.push_back(s);
  }
  out.validate();
  return out;
}

MeasureSpec MeasureSpec::scaled(double s) const {
  MeasureSpec out = *this;
  for (auto& b : out.balls) b.density *= s;
  for (auto& p : out.points) p.mass *= s;
  for (auto& g : out.segments) g.amplitude *= s;
  return out;
}

double MeasureSpec::distance_to_support(Point p) const {
  double d = inf;
  for (const auto& c : capsules(*this)) d = std::min(d, std::max(0.0, point_segment_distance(p, c.a, c.b) - c.r));
  return d;
}

PhaseMask MeasureSpec::support_mask(const Grid& grid, double pad) const {
  return PhaseMask::from_predicate(grid, [&](Point p) { return distance_to_support(p) <= pad; });
}

double MeasureSpec::support_radius_about(Point center) const {
  double r = 0.0;
  for (const auto& c : capsules(*this))
    r = std::max({r, distance(c.a, center) + c.r, distance(c.b, center) + c.r});
  return r;
}

double support_distance(const MeasureSpec& a, const MeasureSpec& b) {
  double d = inf;
  for (const auto& p : capsules(a))
    for (const auto& q : capsules(b)) d = std::min(d, std::max(0.0, segment_segment_distance(p.a, p.b, q.a, q.b) - p.r - q.r));
  return d;
}

bool supports_disjoint(const std::vector<MeasureSpec>& measures, double min_dist) {
  for (std::size_t i = 0; i < measures.size(); ++i)
    for (std::size_t j = i + 1; j < measures.size(); ++j)
      if (support_distance(measures[i], measures[j]) < min_dist) return false;
  return true;
}

double Mollifier::profile(double rho) const {
  if (rho >= radius) return 0.0;
  const double norm = radius * radius * (pi - 4.0 / pi);
  return (1.0 + std::cos(pi * rho / radius)) / norm;
}

ScalarField rasterize(const MeasureSpec& measure, const Grid& grid) {
  measure.validate();
  ScalarField total(grid);
  ScalarField atom(grid);
  auto reset = [&] { std::fill(atom.data().begin(), atom.data().end(), 0.0); };
  for (const auto& b : measure.balls) {
    reset();
    deposit_ball(atom, b.center, b.radius, b.density);
    add_scaled_atom(total, atom, b.mass());
  }
  const double r_point = 2.0 * grid.h();
  for (const auto& p : measure.points) {
    reset();
    deposit_ball(atom, p.center, r_point, p.mass / (pi * r_point * r_point));
    add_scaled_atom(total, atom, p.mass);
  }
  for (const auto& s : measure.segments) {
    reset();
    deposit_segment(atom, s);
    add_scaled_atom(total, atom, s.mass());
  }
  return total;
}

ScalarField mollify(const MeasureSpec& measure, const Mollifier& psi, const Grid& grid) {
  const double h = grid.h();
  if (!(psi.radius >= h)) {
    std::ostringstream os;
    os << "mollifier radius " << psi.radius << " is below the grid spacing " << h;
    throw Error("mollifier_underresolved", os.str());
  }
  const double need = psi.radius + 2.0 * h;
  for (const auto& c : capsules(measure)) {
    if (grid.inside_margin(c.a) - c.r < need || grid.inside_margin(c.b) - c.r < need)
      throw Error("measure_outside_box", "measure support must stay one mollifier radius inside the box");
  }
  const ScalarField dep = rasterize(measure, grid);

  const int R = static_cast<int>(std::ceil(psi.radius / h));
  std::vector<double> kernel;
  std::vector<std::pair<int, int>> offsets;
  double ksum = 0.0;
  for (int dj = -R; dj <= R; ++dj)
    for (int di = -R; di <= R; ++di) {
      const double w = psi.profile(h * std::hypot(di, dj));
      if (w <= 0.0) continue;
      kernel.push_back(w);
      offsets.emplace_back(di, dj);
      ksum += w;
    }
  for (double& w : kernel) w /= ksum;  // now sum(w) = 1, i.e. sum(psi_h) h^2 = 1

  ScalarField out(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const double m = dep(i, j);
      if (m == 0.0) continue;
      for (std::size_t k = 0; k < kernel.size(); ++k) {
        const int a = i + offsets[k].first, b = j + offsets[k].second;
        if (a < 0 || b < 0 || a >= grid.nx() || b >= grid.ny()) continue;
        out(a, b) += m * kernel[k];
      }
    }
  return out;
}

ForceField ForceField::from_values(ScalarField f, double lambda) {
  if (!(lambda > 0.0)) throw Error("lambda_nonpositive", "lambda must be positive");
  ForceField out;
  out.lambda = lambda;
  out.mu = f;
  for (double& v : out.mu.values()) v += lambda;
  out.f = std::move(f);
  return out;
}

ForceField ForceField::constant(const Grid& grid, double lambda) {
  return from_values(ScalarField(grid, -lambda), lambda);
}

bool ForceField::satisfies_condition_a(int margin_cells) const {
  const Grid& g = f.grid();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const bool near = i < margin_cells || j < margin_cells || i >= g.nx() - margin_cells || j >= g.ny() - margin_cells;
      if (near && !(f(i, j) < 0.0)) return false;
    }
  return true;
}

ForceField build_force(const MeasureSpec& measure, double lambda, const Mollifier& psi, const Grid& grid) {
  if (!(lambda > 0.0)) throw Error("lambda_nonpositive", "lambda must be positive");
  ForceField out;
  out.lambda = lambda;
  out.mu = measure.empty() ? ScalarField(grid) : mollify(measure, psi, grid);
  out.f = out.mu;
  for (double& v : out.f.values()) v -= lambda;
  return out;
}

// Density limsup of mu at x, from the atoms alone.
static double sakai_density(const MeasureSpec& m, Point x) {
  constexpr double tol = 1e-12;
  double d = 0.0;
  for (const auto& b : m.balls) {
    if (distance(x, b.center) < b.radius - tol) d += b.density;
  }
  for (const auto& p : m.points)
    if (p.mass > 0.0 && distance(x, p.center) <= tol) return inf;
  for (const auto& s : m.segments) {
    if (s.amplitude <= 0.0 || point_segment_distance(x, s.a, s.b) > tol) continue;
    const double L = s.length();
    const double t = std::clamp(std::hypot(x.x - s.a.x, x.y - s.a.y), 0.0, L);
    const bool endpoint = t <= tol || t >= L - tol;
    if (!endpoint) {
      if (s.density_at(t) > 0.0) return inf;
      continue;
    }
    if (s.profile == SegmentProfile::constant) return inf;
    // rho grows like A * dist / L near an end, so mu(B_r) ~ A r^2 / (2L).
    d += s.amplitude / (2.0 * pi * L);
  }
  return d;
}

std::vector<SakaiSample> sakai_check(const MeasureSpec& measure, double lambda) {
  std::vector<Point> samples;
  for (const auto& b : measure.balls) {
    samples.push_back(b.center);
    for (int k = 0; k < 4; ++k) {
      const double a = k * pi / 2;
      samples.push_back({b.center.x + 0.5 * b.radius * std::cos(a), b.center.y + 0.5 * b.radius * std::sin(a)});
    }
  }
  for (const auto& p : measure.points) samples.push_back(p.center);
  for (const auto& s : measure.segments)
    for (int k = 0; k <= 4; ++k) samples.push_back(s.at(k * s.length() / 4.0));

  const double need = 4.0 * lambda;
  std::vector<SakaiSample> out;
  for (const Point& x : samples) {
    SakaiSample row;
    row.location = x;
    row.density = sakai_density(measure, x);
    row.passes = row.density >= need;
    out.push_back(row);
  }
  return out;
}

bool sakai_holds(const MeasureSpec& measure, double lambda) {
  const auto rows = sakai_check(measure, lambda);
  return std::all_of(rows.begin(), rows.end(), [](const SakaiSample& s) { return s.passes; });
}

bool concentration_check(const MeasureSpec& measure, Point center, double R, double b, double c) {
  if (b + c == 0.0) throw Error("degenerate_constants", "b + c must be positive");
  if (measure.support_radius_about(center) > R) return false;
  const double area = pi * R * R;
  return measure.total_mass() > (b + 2.0 * c / (3.0 * R)) * 36.0 * area;
}

}  // namespace mpqd
