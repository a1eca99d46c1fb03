#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mpqd {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
double norm(Point p);
double distance(Point a, Point b);

/// Uniform 2-D node grid with square cells. Node (i, j) sits at
/// (x0 + i*h, y0 + j*h); values are stored row-major with rows along y.
class Grid {
 public:
  Grid() = default;
  Grid(Point origin, double h, int nx, int ny);

  /// Grid covering [x0, x0 + width] x [y0, y0 + height] with spacing h
  /// (width and height are rounded to a whole number of cells).
  static Grid from_box(Point origin, double width, double height, double h);

  Point origin() const { return origin_; }
  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
  double cell_area() const { return h_ * h_; }

  double x(int i) const { return origin_.x + i * h_; }
  double y(int j) const { return origin_.y + j * h_; }
  Point node(int i, int j) const { return {x(i), y(j)}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }

  double x_max() const { return x(nx_ - 1); }
  double y_max() const { return y(ny_ - 1); }
  double width() const { return (nx_ - 1) * h_; }
  double height() const { return (ny_ - 1) * h_; }
  double diameter() const;
  double box_area() const { return width() * height(); }

  bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1; }
  bool contains(Point p) const;
  /// Signed distance from p to the box boundary (positive inside).
  double inside_margin(Point p) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  Point origin_{};
  double h_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
};

/// Real-valued nodal function on a grid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  static ScalarField sample(const Grid& grid, const std::function<double(Point)>& fn);

  const Grid& grid() const { return grid_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  bool all_finite() const;
  double max_abs() const;
  double max() const;
  double min() const;

  /// Bilinear interpolation; points outside the box evaluate to `outside`.
  double interpolate(Point p, double outside = 0.0) const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Boolean per-node set, typically {u > threshold}.
class PhaseMask {
 public:
  PhaseMask() = default;
  explicit PhaseMask(const Grid& grid, bool fill = false);

  static PhaseMask from_field(const ScalarField& field, double threshold);
  static PhaseMask from_predicate(const Grid& grid, const std::function<bool(Point)>& pred);

  const Grid& grid() const { return grid_; }
  bool operator()(int i, int j) const { return flags_[grid_.index(i, j)] != 0; }
  bool operator[](std::size_t k) const { return flags_[k] != 0; }
  void set(int i, int j, bool v) { flags_[grid_.index(i, j)] = v ? 1 : 0; }
  void set(std::size_t k, bool v) { flags_[k] = v ? 1 : 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  double area() const { return static_cast<double>(count()) * grid_.cell_area(); }

  /// Nodes of the mask with at least one 4-neighbour outside it.
  PhaseMask boundary() const;

 private:
  Grid grid_;
  std::vector<std::uint8_t> flags_;
};

/// Chebyshev (3x3 per step) dilation by `cells` steps.
PhaseMask dilate(const PhaseMask& mask, int cells);
PhaseMask mask_union(const PhaseMask& a, const PhaseMask& b);
PhaseMask mask_intersection(const PhaseMask& a, const PhaseMask& b);
/// Nodes in `a` but not in `b`.
PhaseMask mask_difference(const PhaseMask& a, const PhaseMask& b);

/// Five-point Laplacian on interior nodes; boundary nodes are set to 0 and
/// carry no information.
ScalarField laplacian(const ScalarField& field);

/// Midpoint rule: sum of values * h^2 over all nodes, or over masked nodes.
double integrate(const ScalarField& field);
double integrate(const ScalarField& field, const PhaseMask& mask);

void require_same_grid(const Grid& a, const Grid& b);

}  // namespace mpqd
