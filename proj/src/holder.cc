#include "anisolab/holder.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace anisolab {

IntrinsicCylinder intrinsic_cylinder(double omega, int q, double alpha,
                                     double rho, const ExponentVector& p,
                                     const Point& center) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("intrinsic_cylinder: rho must be positive");
  }
  if (q < 0) throw std::invalid_argument("intrinsic_cylinder: q must be >= 0");
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("intrinsic_cylinder: omega must be >= 0");
  }
  if (!(alpha >= p.pmax())) {
    throw std::invalid_argument("intrinsic_cylinder: alpha must be >= pmax");
  }
  if (center.size() != p.dim()) {
    throw std::invalid_argument("intrinsic_cylinder: center dimension");
  }
  IntrinsicCylinder c;
  c.omega = omega;
  c.q = q;
  c.alpha = alpha;
  c.rho = rho;
  const double prefactor = std::ldexp(omega, -q);
  for (std::size_t j = 0; j < p.dim(); ++j) {
    c.radii.push_back(prefactor * std::pow(rho, alpha / p[j]));
  }
  if (omega > 0.0) c.box = Box(center, c.radii);
  return c;
}

double p_distance_to_boundary(const Box& inner, const Box& outer,
                              const IntrinsicMetricContext& ctx) {
  const auto& p = ctx.exponents;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.dim(); ++j) {
    const double gap =
        std::min(inner.lo(j) - outer.lo(j), outer.hi(j) - inner.hi(j));
    if (gap < 0.0) {
      throw std::invalid_argument("p_distance_to_boundary: box not enclosed");
    }
    best = std::min(best, ctx.axis_weight(j) * std::pow(gap, p[j] / p.pmax()));
  }
  return best;
}

bool DecayTrace::degenerate() const {
  return std::any_of(omega.begin(), omega.end(),
                     [](double w) { return w == 0.0; });
}

DecayTrace oscillation_decay(const GridFunction& u, const ExponentVector& p,
                             const Point& center, std::size_t levels,
                             const DecayOptions& options) {
  const Grid& g = u.grid();
  if (p.dim() != g.dim()) {
    throw std::invalid_argument("oscillation_decay: dimension mismatch");
  }
  const double alpha = options.alpha.value_or(p.pmax());
  const IntrinsicCylinder first =
      intrinsic_cylinder(1.0, options.q, alpha, options.rho0, p, center);
  if (!g.box().contains(first.box->scaled(2.0), 1e-12)) {
    throw std::out_of_range(
        "oscillation_decay: initial cylinder (with margin 2x) escapes the "
        "domain");
  }
  DecayTrace trace;
  trace.sup_norm = u.sup_abs();
  const IntrinsicMetricContext ctx(trace.sup_norm, p);
  trace.boundary_distance = p_distance_to_boundary(*first.box, g.box(), ctx);
  trace.initial_box = first.box;
  double rho = options.rho0;
  for (std::size_t m = 0; m < levels; ++m, rho *= 0.5) {
    const IntrinsicCylinder cyl =
        intrinsic_cylinder(1.0, options.q, alpha, rho, p, center);
    const auto counts = nodes_inside(g, *cyl.box);
    if (*std::min_element(counts.begin(), counts.end()) < options.min_nodes) {
      trace.under_resolved = true;
      break;
    }
    Point corner = center;
    for (std::size_t j = 0; j < corner.size(); ++j) corner[j] += cyl.radii[j];
    trace.rho.push_back(rho);
    trace.omega.push_back(oscillation(u, *cyl.box).omega);
    trace.distance.push_back(p_distance(center, corner, ctx));
  }
  return trace;
}

HolderFit holder_fit(const DecayTrace& trace) {
  const std::size_t n = trace.omega.size();
  if (n < 3 || trace.distance.size() != n) {
    throw std::invalid_argument("holder_fit: need at least 3 trace points");
  }
  if (trace.degenerate()) {
    throw std::invalid_argument("holder_fit: degenerate trace (zero oscillation)");
  }
  std::vector<double> x(n);
  std::vector<double> y(n);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(trace.distance[i] / trace.boundary_distance);
    y[i] = std::log(trace.omega[i] / trace.sup_norm);
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("holder_fit: distances do not vary");
  }
  HolderFit fit;
  fit.alpha = sxy / sxx;
  const double intercept = my - fit.alpha * mx;
  fit.gamma = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (intercept + fit.alpha * x[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  fit.alpha_effective = std::min(fit.alpha, 1.0);
  // Envelope of the capped-slope line over the trace, not its mean.
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    shift = std::max(shift, y[i] - fit.alpha_effective * x[i]);
  }
  fit.gamma_effective = std::exp(shift);
  return fit;
}

namespace {

struct ModulusScale {
  double sup;
  double boundary;
};

ModulusScale modulus_scale(const GridFunction& u, const ExponentVector& p,
                           const Box& k_box) {
  const double sup = u.sup_abs();
  const IntrinsicMetricContext ctx(sup, p);
  return {sup, p_distance_to_boundary(k_box, u.grid().box(), ctx)};
}

ModulusPair evaluate_pair(const GridFunction& u, const ExponentVector& p,
                          const Point& x1, const Point& x2,
                          const ModulusScale& scale, const HolderFit& fit) {
  ModulusPair r;
  r.difference = std::abs(u.interpolate(x1) - u.interpolate(x2));
  const double d = p_distance(x1, x2, IntrinsicMetricContext(scale.sup, p));
  if (d == 0.0) {
    r.bound = 0.0;
  } else if (scale.boundary == 0.0) {
    r.bound = std::numeric_limits<double>::infinity();
  } else {
    r.bound = fit.gamma_effective * scale.sup *
              std::pow(d / scale.boundary, fit.alpha_effective);
  }
  return r;
}

}  // namespace

ModulusPair modulus_pair(const GridFunction& u, const ExponentVector& p,
                         const Point& x1, const Point& x2, const Box& k_box,
                         const HolderFit& fit) {
  if (!k_box.contains(x1, 1e-12) || !k_box.contains(x2, 1e-12)) {
    throw std::invalid_argument("modulus_pair: point outside K");
  }
  return evaluate_pair(u, p, x1, x2, modulus_scale(u, p, k_box), fit);
}

InequalityReport modulus_check(const GridFunction& u, const ExponentVector& p,
                               const Box& k_box, const HolderFit& fit,
                               std::size_t pairs, double required_fraction,
                               std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("modulus_check: pairs >= 1");
  std::mt19937_64 rng(seed);
  const std::size_t n = k_box.dim();
  std::vector<std::uniform_real_distribution<double>> axis;
  for (std::size_t j = 0; j < n; ++j) axis.emplace_back(k_box.lo(j), k_box.hi(j));
  const ModulusScale scale = modulus_scale(u, p, k_box);
  Point x1(n);
  Point x2(n);
  std::size_t holding = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    for (std::size_t j = 0; j < n; ++j) x1[j] = axis[j](rng);
    for (std::size_t j = 0; j < n; ++j) x2[j] = axis[j](rng);
    const ModulusPair r = evaluate_pair(u, p, x1, x2, scale, fit);
    if (r.holds()) ++holding;
    if (r.bound > 0.0) worst = std::max(worst, r.difference / r.bound);
  }
  InequalityReport rep;
  rep.check_name = "modulus";
  rep.anchor = "holder-modulus";
  rep.seed = seed;
  rep.lhs = worst;
  rep.rhs = 1.0;
  rep.ratio = fit.gamma_effective;
  const double fraction =
      static_cast<double>(holding) / static_cast<double>(pairs);
  rep.details["pairs"] = pairs;
  rep.details["fraction_holding"] = fraction;
  rep.details["required_fraction"] = required_fraction;
  rep.details["alpha"] = fit.alpha;
  rep.details["alpha_effective"] = fit.alpha_effective;
  rep.details["gamma"] = fit.gamma;
  rep.details["gamma_effective"] = fit.gamma_effective;
  rep.details["grid_meta"] = grid_meta(u.grid());
  rep.state = fraction >= required_fraction ? CheckState::kPass
                                            : CheckState::kFail;
  return rep;
}

}  // namespace anisolab
