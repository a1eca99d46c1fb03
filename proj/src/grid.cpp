#include "mpqd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mpqd/error.hpp"

namespace mpqd {

double norm(Point p) { return std::hypot(p.x, p.y); }
double distance(Point a, Point b) { return norm(a - b); }

Grid::Grid(Point origin, double h, int nx, int ny) : origin_(origin), h_(h), nx_(nx), ny_(ny) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error("invalid_grid", "spacing must be positive");
  }
  if (nx < 3 || ny < 3) {
    std::ostringstream os;
    os << "need at least 3x3 nodes, got " << nx << "x" << ny;
    throw Error("grid_underflow", os.str());
  }
}

Grid Grid::from_box(Point origin, double width, double height, double h) {
  if (!(h > 0.0)) throw Error("invalid_grid", "spacing must be positive");
  const int nx = static_cast<int>(std::lround(width / h)) + 1;
  const int ny = static_cast<int>(std::lround(height / h)) + 1;
  return Grid(origin, h, nx, ny);
}

double Grid::diameter() const { return std::hypot(width(), height()); }

bool Grid::contains(Point p) const {
  return p.x >= origin_.x && p.x <= x_max() && p.y >= origin_.y && p.y <= y_max();
}

double Grid::inside_margin(Point p) const {
  return std::min({p.x - origin_.x, x_max() - p.x, p.y - origin_.y, y_max() - p.y});
}

bool Grid::operator==(const Grid& other) const {
  return nx_ == other.nx_ && ny_ == other.ny_ && h_ == other.h_ && origin_.x == other.origin_.x &&
         origin_.y == other.origin_.y;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) throw Error("grid_mismatch", "operands live on different grids");
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw Error("grid_mismatch", "value count does not match grid");
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(Point)>& fn) {
  ScalarField out(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out(i, j) = fn(grid.node(i, j));
  return out;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::max() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double ScalarField::interpolate(Point p, double outside) const {
  const double fx = (p.x - grid_.origin().x) / grid_.h();
  const double fy = (p.y - grid_.origin().y) / grid_.h();
  constexpr double eps = 1e-9;
  if (fx < -eps || fy < -eps || fx > grid_.nx() - 1 + eps || fy > grid_.ny() - 1 + eps) return outside;
  int i = std::clamp(static_cast<int>(std::floor(fx)), 0, grid_.nx() - 2);
  int j = std::clamp(static_cast<int>(std::floor(fy)), 0, grid_.ny() - 2);
  const double tx = std::clamp(fx - i, 0.0, 1.0);
  const double ty = std::clamp(fy - j, 0.0, 1.0);
  const auto& v = *this;
  return (1 - tx) * (1 - ty) * v(i, j) + tx * (1 - ty) * v(i + 1, j) + (1 - tx) * ty * v(i, j + 1) +
         tx * ty * v(i + 1, j + 1);
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

// ---------------------------------------------------------------------------

PhaseMask::PhaseMask(const Grid& grid, bool fill) : grid_(grid), flags_(grid.size(), fill ? 1 : 0) {}

PhaseMask PhaseMask::from_field(const ScalarField& field, double threshold) {
  PhaseMask m(field.grid());
  for (std::size_t k = 0; k < field.grid().size(); ++k) m.flags_[k] = field[k] > threshold ? 1 : 0;
  return m;
}

PhaseMask PhaseMask::from_predicate(const Grid& grid, const std::function<bool(Point)>& pred) {
  PhaseMask m(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) m.set(i, j, pred(grid.node(i, j)));
  return m;
}

std::size_t PhaseMask::count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

PhaseMask PhaseMask::boundary() const {
  PhaseMask out(grid_);
  const int nx = grid_.nx(), ny = grid_.ny();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!(*this)(i, j)) continue;
      const bool edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1 || !(*this)(i - 1, j) ||
                        !(*this)(i + 1, j) || !(*this)(i, j - 1) || !(*this)(i, j + 1);
      out.set(i, j, edge);
    }
  }
  return out;
}

PhaseMask dilate(const PhaseMask& mask, int cells) {
  PhaseMask cur = mask;
  const Grid& g = mask.grid();
  for (int step = 0; step < cells; ++step) {
    PhaseMask next = cur;
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.nx(); ++i) {
        if (!cur(i, j)) continue;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int a = i + di, b = j + dj;
            if (a >= 0 && b >= 0 && a < g.nx() && b < g.ny()) next.set(a, b, true);
          }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

PhaseMask mask_union(const PhaseMask& a, const PhaseMask& b) {
  require_same_grid(a.grid(), b.grid());
  PhaseMask out(a.grid());
  for (std::size_t k = 0; k < a.grid().size(); ++k) out.set(k, a[k] || b[k]);
  return out;
}

PhaseMask mask_intersection(const PhaseMask& a, const PhaseMask& b) {
  require_same_grid(a.grid(), b.grid());
  PhaseMask out(a.grid());
  for (std::size_t k = 0; k < a.grid().size(); ++k) out.set(k, a[k] && b[k]);
  return out;
}

PhaseMask mask_difference(const PhaseMask& a, const PhaseMask& b) {
  require_same_grid(a.grid(), b.grid());
  PhaseMask out(a.grid());
  for (std::size_t k = 0; k < a.grid().size(); ++k) out.set(k, a[k] && !b[k]);
  return out;
}

// ---------------------------------------------------------------------------

ScalarField laplacian(const ScalarField& field) {
  const Grid& g = field.grid();
  if (g.nx() < 3 || g.ny() < 3) throw Error("grid_underflow", "laplacian needs 3x3 nodes");
  ScalarField out(g);
  const double inv_h2 = 1.0 / (g.h() * g.h());
  for (int j = 1; j < g.ny() - 1; ++j) {
    for (int i = 1; i < g.nx() - 1; ++i) {
      const double s = (field(i + 1, j) + field(i - 1, j)) + (field(i, j + 1) + field(i, j - 1));
      out(i, j) = (s - 4.0 * field(i, j)) * inv_h2;
    }
  }
  return out;
}

double integrate(const ScalarField& field) {
  double sum = 0.0;
  for (double v : field.values()) sum += v;
  return sum * field.grid().cell_area();
}

double integrate(const ScalarField& field, const PhaseMask& mask) {
  require_same_grid(field.grid(), mask.grid());
  double sum = 0.0;
  for (std::size_t k = 0; k < field.grid().size(); ++k)
    if (mask[k]) sum += field[k];
  return sum * field.grid().cell_area();
}

}  // namespace mpqd
