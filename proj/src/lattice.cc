#include "anisolab/lattice.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anisolab {

Box::Box(Point center_in, std::vector<double> half_widths_in)
    : center(std::move(center_in)), half_widths(std::move(half_widths_in)) {
  if (center.empty() || center.size() != half_widths.size()) {
    throw std::invalid_argument("Box: center/half_widths dimension mismatch");
  }
  for (double hw : half_widths) {
    if (!(hw > 0.0) || !std::isfinite(hw)) {
      throw std::invalid_argument("Box: half-widths must be positive");
    }
  }
}

Box Box::cube(Point center, double rho) {
  std::vector<double> hw(center.size(), rho);
  return Box(std::move(center), std::move(hw));
}

double Box::volume() const {
  double v = 1.0;
  for (double hw : half_widths) v *= 2.0 * hw;
  return v;
}

Box Box::scaled(double factor) const {
  std::vector<double> hw = half_widths;
  for (double& h : hw) h *= factor;
  return Box(center, std::move(hw));
}

bool Box::contains(const Box& other, double rel_tol) const {
  if (other.dim() != dim()) return false;
  for (std::size_t j = 0; j < dim(); ++j) {
    const double slack = rel_tol * half_widths[j];
    if (other.lo(j) < lo(j) - slack || other.hi(j) > hi(j) + slack) {
      return false;
    }
  }
  return true;
}

bool Box::contains(std::span<const double> x, double rel_tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t j = 0; j < dim(); ++j) {
    const double slack = rel_tol * half_widths[j];
    if (x[j] < lo(j) - slack || x[j] > hi(j) + slack) return false;
  }
  return true;
}

Grid::Grid(Box box, std::vector<std::size_t> nodes_per_axis)
    : box_(std::move(box)), nodes_(std::move(nodes_per_axis)) {
  if (nodes_.size() != box_.dim()) {
    throw std::invalid_argument("Grid: nodes_per_axis dimension mismatch");
  }
  spacing_.resize(nodes_.size());
  strides_.resize(nodes_.size());
  size_ = 1;
  for (std::size_t j = nodes_.size(); j-- > 0;) {
    if (nodes_[j] < 2) {
      throw std::invalid_argument("Grid: need at least 2 nodes per axis");
    }
    spacing_[j] = 2.0 * box_.half_widths[j] / static_cast<double>(nodes_[j] - 1);
    strides_[j] = size_;
    size_ *= nodes_[j];
  }
}

double Grid::max_spacing() const {
  return *std::max_element(spacing_.begin(), spacing_.end());
}

double Grid::coordinate(std::size_t axis, std::size_t index) const {
  if (index + 1 == nodes_[axis]) return box_.hi(axis);
  return box_.lo(axis) + static_cast<double>(index) * spacing_[axis];
}

std::vector<std::size_t> Grid::multi_index(std::size_t linear) const {
  std::vector<std::size_t> m(dim());
  for (std::size_t j = 0; j < dim(); ++j) {
    m[j] = linear / strides_[j];
    linear %= strides_[j];
  }
  return m;
}

std::size_t Grid::linear_index(std::span<const std::size_t> multi) const {
  std::size_t linear = 0;
  for (std::size_t j = 0; j < dim(); ++j) linear += multi[j] * strides_[j];
  return linear;
}

Point Grid::node(std::size_t linear) const {
  Point x(dim());
  for (std::size_t j = 0; j < dim(); ++j) {
    x[j] = coordinate(j, linear / strides_[j]);
    linear %= strides_[j];
  }
  return x;
}

bool Grid::on_boundary(std::size_t linear) const {
  for (std::size_t j = 0; j < dim(); ++j) {
    const std::size_t i = linear / strides_[j];
    linear %= strides_[j];
    if (i == 0 || i + 1 == nodes_[j]) return true;
  }
  return false;
}

double Grid::trapezoid_weight(std::size_t axis, std::size_t index) const {
  const bool end = index == 0 || index + 1 == nodes_[axis];
  return end ? 0.5 * spacing_[axis] : spacing_[axis];
}

namespace {

// Integral over [a, b] of (t - t0) / h.
double ramp_integral(double a, double b, double t0, double h) {
  if (b <= a) return 0.0;
  return ((b - t0) * (b - t0) - (a - t0) * (a - t0)) / (2.0 * h);
}

}  // namespace

std::vector<double> Grid::axis_weights(std::size_t axis, double lo,
                                       double hi) const {
  const double h = spacing_[axis];
  const double a = std::max(lo, box_.lo(axis));
  const double b = std::min(hi, box_.hi(axis));
  std::vector<double> w(nodes_[axis], 0.0);
  if (!(b > a)) return w;
  const std::size_t n = nodes_[axis];
  // Only nodes within one spacing of [a, b] can have nonzero weight.
  const double first_f = std::floor((a - box_.lo(axis)) / h) - 1.0;
  const double last_f = std::ceil((b - box_.lo(axis)) / h) + 1.0;
  const std::size_t first =
      static_cast<std::size_t>(std::max(0.0, first_f));
  const std::size_t last = static_cast<std::size_t>(
      std::min(static_cast<double>(n - 1), std::max(0.0, last_f)));
  for (std::size_t i = first; i <= last; ++i) {
    const double xi = coordinate(axis, i);
    double wi = 0.0;
    if (i > 0) {
      const double left = xi - h;
      wi += ramp_integral(std::max(a, left), std::min(b, xi), left, h);
    }
    if (i + 1 < n) {
      const double right = xi + h;
      // integral of (right - t)/h = integral of (s - 0)/h after s = right - t
      const double lo_t = std::max(a, xi);
      const double hi_t = std::min(b, right);
      if (hi_t > lo_t) {
        wi += ramp_integral(right - hi_t, right - lo_t, 0.0, h);
      }
    }
    w[i] = wi;
  }
  return w;
}

bool Grid::same_layout(const Grid& other) const {
  if (dim() != other.dim()) return false;
  for (std::size_t j = 0; j < dim(); ++j) {
    if (nodes_[j] != other.nodes_[j] ||
        box_.center[j] != other.box_.center[j] ||
        box_.half_widths[j] != other.box_.half_widths[j]) {
      return false;
    }
  }
  return true;
}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("GridFunction: value count != node count");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("GridFunction: non-finite value");
    }
  }
}

GridFunction::GridFunction(Grid grid, double constant)
    : GridFunction(grid, std::vector<double>(grid.size(), constant)) {}

GridFunction GridFunction::sample(
    const Grid& grid, const std::function<double(const Point&)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
  return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::map(const std::function<double(double)>& f) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), f);
  return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::with_values(std::vector<double> values) const {
  return GridFunction(grid_, std::move(values));
}

double GridFunction::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

double GridFunction::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

double GridFunction::sup_abs() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double GridFunction::interpolate(std::span<const double> x) const {
  const std::size_t n = grid_.dim();
  if (x.size() != n) {
    throw std::invalid_argument("interpolate: point dimension mismatch");
  }
  if (!grid_.box().contains(x, 1e-12)) {
    throw std::out_of_range("interpolate: point outside grid box");
  }
  std::vector<std::size_t> base(n);
  std::vector<double> frac(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (x[j] - grid_.box().lo(j)) / grid_.spacing(j);
    const double cell = std::clamp(std::floor(t), 0.0,
                                   static_cast<double>(grid_.nodes(j) - 2));
    base[j] = static_cast<std::size_t>(cell);
    frac[j] = std::clamp(t - cell, 0.0, 1.0);
  }
  double result = 0.0;
  const std::size_t corners = std::size_t{1} << n;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t linear = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool up = (c >> j) & 1U;
      w *= up ? frac[j] : 1.0 - frac[j];
      linear += (base[j] + (up ? 1 : 0)) * grid_.stride(j);
    }
    if (w != 0.0) result += w * values_[linear];
  }
  return result;
}

RegionWeights::RegionWeights(const Grid& grid, const Box& region)
    : grid_(&grid) {
  if (region.dim() != grid.dim()) {
    throw std::invalid_argument("region dimension does not match grid");
  }
  if (!grid.box().contains(region, 1e-9)) {
    throw std::out_of_range("region escapes the grid box");
  }
  first_.resize(grid.dim());
  weights_.resize(grid.dim());
  for (std::size_t j = 0; j < grid.dim(); ++j) {
    std::vector<double> w = grid.axis_weights(j, region.lo(j), region.hi(j));
    std::size_t a = 0;
    while (a < w.size() && w[a] == 0.0) ++a;
    std::size_t b = w.size();
    while (b > a && w[b - 1] == 0.0) --b;
    first_[j] = a;
    weights_[j].assign(w.begin() + static_cast<std::ptrdiff_t>(a),
                       w.begin() + static_cast<std::ptrdiff_t>(b));
  }
}

void RegionWeights::for_each(
    const std::function<void(std::size_t, double)>& visit) const {
  const std::size_t n = weights_.size();
  for (const auto& w : weights_) {
    if (w.empty()) return;
  }
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    double w = 1.0;
    std::size_t linear = 0;
    for (std::size_t j = 0; j < n; ++j) {
      w *= weights_[j][idx[j]];
      linear += (first_[j] + idx[j]) * grid_->stride(j);
    }
    if (w > 0.0) visit(linear, w);
    std::size_t j = n;
    while (j-- > 0) {
      if (++idx[j] < weights_[j].size()) break;
      idx[j] = 0;
      if (j == 0) return;
    }
  }
}

double RegionWeights::total() const {
  double t = 1.0;
  for (const auto& w : weights_) {
    double s = 0.0;
    for (double v : w) s += v;
    t *= s;
  }
  return t;
}

double integrate(const GridFunction& f, const Box& region) {
  RegionWeights weights(f.grid(), region);
  const auto values = f.values();
  double sum = 0.0;
  weights.for_each([&](std::size_t i, double w) { sum += w * values[i]; });
  return sum;
}

double integrate(const GridFunction& f) {
  return integrate(f, f.grid().box());
}

GridFunction partial_difference(const GridFunction& f, std::size_t axis) {
  const Grid& g = f.grid();
  if (axis >= g.dim()) throw std::invalid_argument("axis out of range");
  const std::size_t n = g.nodes(axis);
  const std::size_t s = g.stride(axis);
  const double h = g.spacing(axis);
  const auto u = f.values();
  std::vector<double> d(u.size());
  for (std::size_t lin = 0; lin < u.size(); ++lin) {
    const std::size_t i = (lin / s) % n;
    if (n == 2) {
      const std::size_t base = lin - i * s;
      d[lin] = (u[base + s] - u[base]) / h;
    } else if (i == 0) {
      d[lin] = (-3.0 * u[lin] + 4.0 * u[lin + s] - u[lin + 2 * s]) / (2.0 * h);
    } else if (i + 1 == n) {
      d[lin] = (3.0 * u[lin] - 4.0 * u[lin - s] + u[lin - 2 * s]) / (2.0 * h);
    } else {
      d[lin] = (u[lin + s] - u[lin - s]) / (2.0 * h);
    }
  }
  return GridFunction(g, std::move(d));
}

GridFunction truncate(const GridFunction& f, double k, Sign sign) {
  if (sign == Sign::kPlus) {
    return f.map([k](double v) { return std::max(v - k, 0.0); });
  }
  return f.map([k](double v) { return std::max(k - v, 0.0); });
}

double level_set_measure(const GridFunction& f, double k, Direction direction,
                         const Box& region) {
  RegionWeights weights(f.grid(), region);
  const auto values = f.values();
  double m = 0.0;
  weights.for_each([&](std::size_t i, double w) {
    const bool in = direction == Direction::kAbove ? values[i] > k
                                                   : values[i] < k;
    if (in) m += w;
  });
  return m;
}

double level_set_measure_equal(const GridFunction& f, double k,
                               const Box& region) {
  RegionWeights weights(f.grid(), region);
  const auto values = f.values();
  double m = 0.0;
  weights.for_each([&](std::size_t i, double w) {
    if (values[i] == k) m += w;
  });
  return m;
}

namespace {

// Index range [first, last] of nodes of `axis` inside [lo, hi].
bool axis_node_range(const Grid& g, std::size_t axis, double lo, double hi,
                     std::size_t& first, std::size_t& last) {
  const double h = g.spacing(axis);
  const double tol = 1e-9 * h;
  const double x0 = g.box().lo(axis);
  const double a = std::ceil((lo - x0 - tol) / h);
  const double b = std::floor((hi - x0 + tol) / h);
  const double n = static_cast<double>(g.nodes(axis) - 1);
  const double af = std::max(a, 0.0);
  const double bf = std::min(b, n);
  if (bf < af) return false;
  first = static_cast<std::size_t>(af);
  last = static_cast<std::size_t>(bf);
  return true;
}

}  // namespace

std::vector<std::size_t> nodes_inside(const Grid& grid, const Box& region) {
  std::vector<std::size_t> count(grid.dim(), 0);
  for (std::size_t j = 0; j < grid.dim(); ++j) {
    std::size_t a = 0;
    std::size_t b = 0;
    if (axis_node_range(grid, j, region.lo(j), region.hi(j), a, b)) {
      count[j] = b - a + 1;
    }
  }
  return count;
}

std::size_t for_each_node_in(const Grid& g, const Box& region,
                             const std::function<void(std::size_t)>& visit) {
  const std::size_t n = g.dim();
  std::vector<std::size_t> first(n);
  std::vector<std::size_t> last(n);
  std::size_t count = 1;
  for (std::size_t j = 0; j < n; ++j) {
    if (!axis_node_range(g, j, region.lo(j), region.hi(j), first[j],
                         last[j])) {
      return 0;
    }
    count *= last[j] - first[j] + 1;
  }
  std::vector<std::size_t> idx = first;
  while (true) {
    visit(g.linear_index(idx));
    std::size_t j = n;
    bool done = true;
    while (j-- > 0) {
      if (++idx[j] <= last[j]) {
        done = false;
        break;
      }
      idx[j] = first[j];
    }
    if (done) break;
  }
  return count;
}

Oscillation oscillation(const GridFunction& f, const Box& region) {
  const auto values = f.values();
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  const std::size_t count =
      for_each_node_in(f.grid(), region, [&](std::size_t i) {
        hi = std::max(hi, values[i]);
        lo = std::min(lo, values[i]);
      });
  if (count == 0) {
    throw std::invalid_argument("oscillation: region contains no node");
  }
  return {hi, lo, hi - lo};
}

CutoffProfile::CutoffProfile(Box outer, Box inner, ExponentVector powers)
    : outer_(std::move(outer)),
      inner_(std::move(inner)),
      powers_(std::move(powers)) {
  if (outer_.dim() != inner_.dim() || outer_.dim() != powers_.dim()) {
    throw std::invalid_argument("CutoffProfile: dimension mismatch");
  }
  for (std::size_t j = 0; j < outer_.dim(); ++j) {
    if (!(inner_.lo(j) > outer_.lo(j)) || !(inner_.hi(j) < outer_.hi(j))) {
      throw std::invalid_argument(
          "CutoffProfile: inner box must lie strictly inside the outer box");
    }
  }
}

double CutoffProfile::axis_value(std::size_t axis, double x) const {
  const double olo = outer_.lo(axis);
  const double ohi = outer_.hi(axis);
  const double ilo = inner_.lo(axis);
  const double ihi = inner_.hi(axis);
  if (x <= olo || x >= ohi) return 0.0;
  if (x >= ilo && x <= ihi) return 1.0;
  if (x < ilo) return (x - olo) / (ilo - olo);
  return (ohi - x) / (ohi - ihi);
}

double CutoffProfile::slope_bound(std::size_t axis) const {
  const double left = inner_.lo(axis) - outer_.lo(axis);
  const double right = outer_.hi(axis) - inner_.hi(axis);
  return 1.0 / std::min(left, right);
}

double CutoffProfile::value(std::span<const double> x, double s) const {
  double z = 1.0;
  for (std::size_t j = 0; j < outer_.dim(); ++j) {
    const double zj = axis_value(j, x[j]);
    if (zj == 0.0) return 0.0;
    if (zj != 1.0) z *= std::pow(zj, powers_[j] * s);
  }
  return z;
}

GridFunction CutoffProfile::sample(const Grid& grid, double s) const {
  const std::size_t n = grid.dim();
  if (n != outer_.dim()) {
    throw std::invalid_argument("CutoffProfile: grid dimension mismatch");
  }
  // Tensor structure: evaluate per-axis factors once.
  std::vector<std::vector<double>> factors(n);
  for (std::size_t j = 0; j < n; ++j) {
    factors[j].resize(grid.nodes(j));
    for (std::size_t i = 0; i < grid.nodes(j); ++i) {
      const double zj = axis_value(j, grid.coordinate(j, i));
      factors[j][i] = (zj == 0.0 || zj == 1.0) ? zj
                                               : std::pow(zj, powers_[j] * s);
    }
  }
  std::vector<double> v(grid.size());
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    double z = 1.0;
    std::size_t rest = lin;
    for (std::size_t j = 0; j < n && z != 0.0; ++j) {
      z *= factors[j][rest / grid.stride(j)];
      rest %= grid.stride(j);
    }
    v[lin] = z;
  }
  return GridFunction(grid, std::move(v));
}

GridFunction cutoff(const Grid& grid, const Box& outer, const Box& inner,
                    const ExponentVector& powers) {
  if (!grid.box().contains(outer, 1e-9)) {
    throw std::out_of_range("cutoff: outer box escapes the grid box");
  }
  return CutoffProfile(outer, inner, powers).sample(grid);
}

double lp_norm(const GridFunction& f, double exponent, const Box& region) {
  if (!(exponent >= 1.0)) {
    throw std::invalid_argument("lp_norm: exponent must be >= 1");
  }
  RegionWeights weights(f.grid(), region);
  const auto values = f.values();
  double scale = 0.0;
  weights.for_each(
      [&](std::size_t i, double) { scale = std::max(scale, std::abs(values[i])); });
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  weights.for_each([&](std::size_t i, double w) {
    const double v = std::abs(values[i]) / scale;
    if (v > 0.0) sum += w * std::pow(v, exponent);
  });
  return scale * std::pow(sum, 1.0 / exponent);
}

double lp_mean(const GridFunction& f, double exponent, const Box& region) {
  return lp_norm(f, exponent, region) /
         std::pow(region.volume(), 1.0 / exponent);
}

double lp_seminorm(const GridFunction& f, std::size_t axis, double exponent,
                   const Box& region) {
  return lp_norm(partial_difference(f, axis), exponent, region);
}

InequalityReport troisi_check(const GridFunction& f, const ExponentVector& p) {
  const Grid& g = f.grid();
  if (p.dim() != g.dim()) {
    throw std::invalid_argument("troisi_check: exponent/grid dimension mismatch");
  }
  const double pstar = sobolev_exponent(p);
  const double sup = f.sup_abs();
  double trace = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.on_boundary(i)) trace = std::max(trace, std::abs(f[i]));
  }
  if (trace > 1e-12 * sup) {
    std::ostringstream msg;
    msg << "troisi_check: field must vanish on the grid boundary (max |f| on "
           "boundary = "
        << trace << ")";
    throw std::invalid_argument(msg.str());
  }

  InequalityReport r;
  r.check_name = "troisi";
  r.anchor = "sobolev-troisi-embedding";
  const Box& box = g.box();
  const double norm = lp_norm(f, pstar, box);
  r.lhs = std::pow(norm, static_cast<double>(g.dim()));
  double rhs = 1.0;
  nlohmann::json seminorms = nlohmann::json::array();
  for (std::size_t i = 0; i < g.dim(); ++i) {
    const double s = lp_seminorm(f, i, p[i], box);
    seminorms.push_back(s);
    rhs *= s;
  }
  r.rhs = rhs;
  r.details["pstar"] = pstar;
  r.details["seminorms"] = seminorms;
  r.details["grid_meta"] = grid_meta(g);
  if (rhs == 0.0) {
    r.state = CheckState::kDegenerate;
    return r;
  }
  r.ratio = r.lhs / r.rhs;
  r.state = std::isfinite(r.ratio) ? CheckState::kPass : CheckState::kFail;
  return r;
}

nlohmann::json grid_meta(const Grid& grid) {
  nlohmann::json j;
  j["dims"] = grid.dim();
  j["nodes_per_axis"] = std::vector<std::size_t>(grid.nodes_per_axis().begin(),
                                                 grid.nodes_per_axis().end());
  j["box"] = {{"center", grid.box().center},
              {"half_widths", grid.box().half_widths}};
  return j;
}

}  // namespace anisolab
