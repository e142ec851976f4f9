#ifndef ANISOLAB_LATTICE_H_
#define ANISOLAB_LATTICE_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "anisolab/exponents.h"
#include "anisolab/report.h"

namespace anisolab {

// Axis-aligned box prod_j (center_j - half_width_j, center_j + half_width_j).
struct Box {
  Box(Point center, std::vector<double> half_widths);

  // Cube of equal half-widths rho around `center`.
  static Box cube(Point center, double rho);

  std::size_t dim() const { return center.size(); }
  double lo(std::size_t j) const { return center[j] - half_widths[j]; }
  double hi(std::size_t j) const { return center[j] + half_widths[j]; }
  double volume() const;

  // Same center, every half-width multiplied by `factor`.
  Box scaled(double factor) const;

  // True when `other` lies inside this box, up to a relative slack.
  bool contains(const Box& other, double rel_tol = 1e-12) const;
  bool contains(std::span<const double> x, double rel_tol = 1e-12) const;

  Point center;
  std::vector<double> half_widths;
};

// Uniform tensor-product lattice over a box. Node values are stored
// row-major: axis 0 varies slowest.
class Grid {
 public:
  Grid(Box box, std::vector<std::size_t> nodes_per_axis);

  std::size_t dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  std::size_t nodes(std::size_t axis) const { return nodes_[axis]; }
  std::span<const std::size_t> nodes_per_axis() const { return nodes_; }
  std::size_t size() const { return size_; }
  double spacing(std::size_t axis) const { return spacing_[axis]; }
  double max_spacing() const;
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  double coordinate(std::size_t axis, std::size_t index) const;
  std::vector<std::size_t> multi_index(std::size_t linear) const;
  std::size_t linear_index(std::span<const std::size_t> multi) const;
  Point node(std::size_t linear) const;

  bool on_boundary(std::size_t linear) const;

  // Trapezoid weight of node `index` on `axis` over the full axis.
  double trapezoid_weight(std::size_t axis, std::size_t index) const;

  // Per-axis weights w_i = integral over [lo, hi] of the piecewise-linear
  // hat function of node i. Summing f_i * prod_j w_{j,i_j} integrates the
  // multilinear interpolant of f over the region exactly.
  std::vector<double> axis_weights(std::size_t axis, double lo,
                                   double hi) const;

  bool same_layout(const Grid& other) const;

 private:
  Box box_;
  std::vector<std::size_t> nodes_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
};

// Node values on a grid. Values are finite; operations return new objects.
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values);
  GridFunction(Grid grid, double constant);

  static GridFunction sample(const Grid& grid,
                             const std::function<double(const Point&)>& f);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  GridFunction map(const std::function<double(double)>& f) const;
  GridFunction with_values(std::vector<double> values) const;

  double max() const;
  double min() const;
  double sup_abs() const;

  // Multilinear interpolation at an arbitrary point inside the grid box.
  double interpolate(std::span<const double> x) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

enum class Sign { kPlus, kMinus };
enum class Direction { kAbove, kBelow };

// Tensor-product quadrature weights of a grid restricted to a region.
class RegionWeights {
 public:
  RegionWeights(const Grid& grid, const Box& region);

  // Calls visit(linear_index, weight) for every node with weight > 0, in
  // increasing linear order.
  void for_each(const std::function<void(std::size_t, double)>& visit) const;
  double total() const;

 private:
  const Grid* grid_;
  std::vector<std::size_t> first_;
  std::vector<std::vector<double>> weights_;
};

double integrate(const GridFunction& f, const Box& region);
double integrate(const GridFunction& f);

GridFunction partial_difference(const GridFunction& f, std::size_t axis);

GridFunction truncate(const GridFunction& f, double k, Sign sign);

// Cell-counting measure of {f > k} (kAbove) or {f < k} (kBelow) inside
// region: each node carries its quadrature weight.
double level_set_measure(const GridFunction& f, double k, Direction direction,
                         const Box& region);
double level_set_measure_equal(const GridFunction& f, double k,
                               const Box& region);

struct Oscillation {
  double mu_plus;
  double mu_minus;
  double omega;
};

// Max, min and their difference over nodes lying in region. Throws
// std::invalid_argument when the region contains no node.
Oscillation oscillation(const GridFunction& f, const Box& region);

// Number of nodes of `grid` lying in `region` along each axis.
std::vector<std::size_t> nodes_inside(const Grid& grid, const Box& region);

// Calls visit(linear_index) for every node in the closed region, in
// increasing order. Returns the number of nodes visited.
std::size_t for_each_node_in(const Grid& grid, const Box& region,
                             const std::function<void(std::size_t)>& visit);

// zeta = prod_j zeta_j^{p_j} with zeta_j piecewise linear: 1 on the inner
// box, 0 outside the outer box, linear in between.
class CutoffProfile {
 public:
  CutoffProfile(Box outer, Box inner, ExponentVector powers);

  double axis_value(std::size_t axis, double x) const;
  // Largest slope of zeta_j. Equals [(1 - sigma) rho_j]^{-1} for concentric
  // boxes with inner = sigma * outer.
  double slope_bound(std::size_t axis) const;
  // prod_j zeta_j^{p_j * s}
  double value(std::span<const double> x, double s = 1.0) const;
  GridFunction sample(const Grid& grid, double s = 1.0) const;

  const Box& outer() const { return outer_; }
  const Box& inner() const { return inner_; }
  const ExponentVector& powers() const { return powers_; }

 private:
  Box outer_;
  Box inner_;
  ExponentVector powers_;
};

GridFunction cutoff(const Grid& grid, const Box& outer, const Box& inner,
                    const ExponentVector& powers);

// (integral over region of |f|^exponent)^{1/exponent}, evaluated with a
// max-rescaling so large exponents do not overflow.
double lp_norm(const GridFunction& f, double exponent, const Box& region);
// Same quantity divided by |region|^{1/exponent}.
double lp_mean(const GridFunction& f, double exponent, const Box& region);

double lp_seminorm(const GridFunction& f, std::size_t axis, double exponent,
                   const Box& region);

// ||f||_{p_*}^N against prod_i ||f_{x_i}||_{p_i} for f vanishing on the grid
// boundary. Throws std::domain_error when pbar >= N and
// std::invalid_argument when the boundary trace is not zero.
InequalityReport troisi_check(const GridFunction& f, const ExponentVector& p);

nlohmann::json grid_meta(const Grid& grid);

}  // namespace anisolab

#endif  // ANISOLAB_LATTICE_H_
