#include "anisolab/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anisolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_critical(const ExponentVector& p, double pstar) {
  return std::abs(p.pmax() - pstar) <= 1e-12;
}

double positive_sup(const GridFunction& u, const Box& region) {
  double m = 0.0;
  const auto values = u.values();
  for_each_node_in(u.grid(), region,
                   [&](std::size_t i) { m = std::max(m, values[i]); });
  return m;
}

nlohmann::json geometry_json(const BoundsGeometry& g, const ExponentVector& p) {
  nlohmann::json j;
  j["center"] = g.center;
  j["rho"] = g.rho;
  j["alpha"] = g.resolved_alpha(p);
  j["radii"] = g.radii(p);
  return j;
}

}  // namespace

double BoundsGeometry::resolved_alpha(const ExponentVector& p) const {
  const double a = alpha.value_or(p.pmax());
  if (!(a > 0.0)) throw std::invalid_argument("BoundsGeometry: alpha > 0");
  return a;
}

std::vector<double> BoundsGeometry::radii(const ExponentVector& p) const {
  if (!(rho > 0.0)) throw std::invalid_argument("BoundsGeometry: rho > 0");
  const double a = resolved_alpha(p);
  std::vector<double> r;
  for (std::size_t j = 0; j < p.dim(); ++j) r.push_back(std::pow(rho, a / p[j]));
  return r;
}

Box BoundsGeometry::box(const ExponentVector& p, std::size_t n) const {
  if (center.size() != p.dim()) {
    throw std::invalid_argument("BoundsGeometry: center dimension");
  }
  std::vector<double> r = radii(p);
  const double f = 0.5 * (1.0 + std::ldexp(1.0, -static_cast<int>(n)));
  for (double& x : r) x *= f;
  return Box(center, std::move(r));
}

Box BoundsGeometry::half_box(const ExponentVector& p) const {
  return box(p).scaled(0.5);
}

double bounds_level(double k, std::size_t n, BoundsBranch branch) {
  const int e = static_cast<int>(n) + (branch == BoundsBranch::kCritical ? 1 : 0);
  return (1.0 - std::ldexp(1.0, -e)) * k;
}

double normalized_tail(const GridFunction& u, const ExponentVector& p,
                       const BoundsGeometry& geom, double k, std::size_t n,
                       BoundsBranch branch) {
  const double pstar = sobolev_exponent(p);
  const double kn = bounds_level(k, n, branch);
  return lp_mean(truncate(u, kn, Sign::kPlus), pstar, geom.box(p, n)) / k;
}

std::string to_string(BoundsBranch branch) {
  return branch == BoundsBranch::kCritical ? "critical" : "subcritical";
}

RecursionReport recursion_report(const GridFunction& u,
                                 const ExponentVector& p,
                                 const BoundsGeometry& geom, double k,
                                 std::size_t n_max) {
  const double pstar = sobolev_exponent(p);
  if (!(k >= 1.0)) {
    throw std::invalid_argument("recursion_report: the level k must be >= 1");
  }
  const Box q0 = geom.box(p);
  if (!u.grid().box().contains(q0, 1e-9)) {
    throw std::out_of_range("recursion_report: Q_rho escapes the grid box");
  }
  RecursionReport rep;
  rep.k = k;
  rep.branch = is_critical(p, pstar) ? BoundsBranch::kCritical
                                     : BoundsBranch::kSubcritical;
  const double pbar = p.pbar();
  const double n_dim = static_cast<double>(p.dim());
  const double kappa = (pstar - pbar) / pbar;
  const std::vector<double> radii = geom.radii(p);
  double s = 0.0;
  for (std::size_t l = 0; l < p.dim(); ++l) {
    s += std::pow(k, p[l] - pbar) / std::pow(radii[l], p[l]);
  }
  rep.bracket = std::pow(std::pow(q0.volume(), pbar / n_dim) * s, 1.0 / pbar);

  for (std::size_t n = 0; n <= n_max; ++n) {
    rep.y.push_back(normalized_tail(u, p, geom, k, n, rep.branch));
  }
  auto factor = [&](std::size_t n) {
    return std::exp2(pstar / pbar * static_cast<double>(n)) * rep.bracket;
  };
  double gmax = kNaN;
  for (std::size_t n = 0; n < n_max; ++n) {
    if (rep.y[n] == 0.0) continue;
    const double r = rep.y[n + 1] / (factor(n) * std::pow(rep.y[n], 1.0 + kappa));
    rep.step_ratio.push_back(r);
    gmax = std::isnan(gmax) ? r : std::max(gmax, r);
  }
  rep.gamma_empirical = gmax;
  rep.gamma_used = std::isnan(gmax) ? 0.0 : 2.0 * gmax;
  rep.bound.push_back(rep.y.front());
  for (std::size_t n = 0; n < n_max; ++n) {
    rep.bound.push_back(rep.gamma_used * factor(n) *
                        std::pow(rep.bound[n], 1.0 + kappa));
  }
  bool dominated = true;
  double worst = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (rep.y[n] > rep.bound[n] * (1.0 + 1e-12)) dominated = false;
    if (rep.bound[n] > 0.0) worst = std::max(worst, rep.y[n] / rep.bound[n]);
  }
  InequalityReport& r = rep.report;
  r.check_name = "recursion";
  r.anchor = "boundedness-recursion";
  r.lhs = worst;
  r.rhs = 1.0;
  r.ratio = rep.gamma_empirical;
  r.details = geometry_json(geom, p);
  r.details["k"] = k;
  r.details["branch"] = to_string(rep.branch);
  r.details["pstar"] = pstar;
  r.details["kappa"] = kappa;
  r.details["bracket"] = rep.bracket;
  nlohmann::json ys = nlohmann::json::array();
  nlohmann::json bs = nlohmann::json::array();
  for (double v : rep.y) ys.push_back(finite_or_null(v));
  for (double v : rep.bound) bs.push_back(finite_or_null(v));
  r.details["y"] = ys;
  r.details["bound"] = bs;
  r.details["gamma_used"] = rep.gamma_used;
  r.details["grid_meta"] = grid_meta(u.grid());
  if (rep.y.front() == 0.0) {
    r.state = CheckState::kDegenerate;
  } else {
    r.state = dominated ? CheckState::kPass : CheckState::kFail;
  }
  return rep;
}

double recursion_gamma(const GridFunction& u, const ExponentVector& p,
                       const BoundsGeometry& geom, BoundsBranch branch,
                       std::size_t n_max) {
  const double pstar = sobolev_exponent(p);
  const double pbar = p.pbar();
  const double kappa = (pstar - pbar) / pbar;
  const double k_exp =
      branch == BoundsBranch::kCritical ? 0.0 : (p.pmax() - pbar) / pbar;
  const double top = std::max(1.0, 2.0 * positive_sup(u, geom.box(p)));
  double g = kNaN;
  // The constant must not depend on k >= 1; sample levels up to the data
  // scale.
  constexpr int kLevels = 12;
  for (int i = 0; i < kLevels; ++i) {
    const double k = std::pow(top, static_cast<double>(i) / (kLevels - 1));
    std::vector<double> y;
    for (std::size_t n = 0; n <= n_max; ++n) {
      y.push_back(normalized_tail(u, p, geom, k, n, branch));
    }
    for (std::size_t n = 0; n < n_max; ++n) {
      if (y[n] == 0.0) continue;
      const double denom = std::exp2(pstar / pbar * static_cast<double>(n)) *
                           std::pow(k, k_exp) * std::pow(y[n], 1.0 + kappa);
      const double r = y[n + 1] / denom;
      g = std::isnan(g) ? r : std::max(g, r);
    }
  }
  return g;
}

SupEstimateReport sup_bound_subcritical(const GridFunction& u,
                                        const ExponentVector& p,
                                        const BoundsGeometry& geom) {
  const double pstar = sobolev_exponent(p);
  if (!(p.pmax() < pstar) || is_critical(p, pstar)) {
    throw std::domain_error(
        "sup_bound_subcritical: requires pmax < p_*; use the critical branch");
  }
  const Box q0 = geom.box(p);
  if (!u.grid().box().contains(q0, 1e-9)) {
    throw std::out_of_range("sup_bound_subcritical: Q_rho escapes the grid");
  }
  SupEstimateReport rep;
  rep.branch = BoundsBranch::kSubcritical;
  const double pbar = p.pbar();
  const double pmax = p.pmax();
  rep.gamma_empirical = recursion_gamma(u, p, geom, rep.branch);
  rep.gamma_used =
      std::isnan(rep.gamma_empirical) ? 0.0 : 2.0 * rep.gamma_empirical;
  const GridFunction up = truncate(u, 0.0, Sign::kPlus);
  const double average = lp_mean(up, pstar, q0);
  const double e = (pstar - pbar) / (pstar - pmax);
  rep.constant = std::pow(rep.gamma_used, pbar / (pstar - pmax)) *
                 std::exp2(pstar / (pstar - pmax) * pbar / (pstar - pbar));
  const double raw_k = rep.constant * std::pow(average, e);
  rep.k = std::max(1.0, raw_k);
  rep.bound = std::max(1.0, raw_k);
  rep.threshold = kNaN;
  rep.measured_sup = positive_sup(u, geom.half_box(p));

  const double pmax_average = std::pow(lp_mean(up, pmax, q0), pmax);
  const double variant_exponent = e / pbar;
  const double variant_value = std::pow(pmax_average, variant_exponent);

  InequalityReport& r = rep.report;
  r.check_name = "sup_bound_subcritical";
  r.anchor = "local-boundedness-subcritical";
  r.lhs = rep.measured_sup;
  r.rhs = rep.bound;
  r.ratio = rep.gamma_empirical;
  r.details = geometry_json(geom, p);
  r.details["branch"] = to_string(rep.branch);
  r.details["pstar"] = pstar;
  r.details["k"] = rep.k;
  r.details["k_unclamped"] = raw_k;
  r.details["k_clamped"] = raw_k < 1.0;
  r.details["C"] = rep.constant;
  r.details["threshold"] = nullptr;
  r.details["average_pstar"] = average;
  r.details["bracket_exponent"] = e;
  r.details["gamma_used"] = rep.gamma_used;
  r.details["pmax_average_variant"] = {
      {"average", pmax_average},
      {"exponent", variant_exponent},
      {"value", variant_value},
      {"constant_needed",
       variant_value > 0.0 ? finite_or_null(rep.measured_sup / variant_value)
                           : nlohmann::json(nullptr)}};
  r.details["grid_meta"] = grid_meta(u.grid());
  r.state = rep.measured_sup <= rep.bound * (1.0 + 1e-12) ? CheckState::kPass
                                                          : CheckState::kFail;
  return rep;
}

double critical_x0(const GridFunction& u, const ExponentVector& p,
                   const BoundsGeometry& geom, double k) {
  const double pstar = sobolev_exponent(p);
  return lp_mean(truncate(u, 0.5 * k, Sign::kPlus), pstar, geom.box(p));
}

double critical_threshold(const ExponentVector& p, double gamma) {
  const double pstar = sobolev_exponent(p);
  const double pbar = p.pbar();
  const double r = pbar / (pstar - pbar);
  return std::pow(gamma, -r) * std::exp2(-(pstar / pbar) * r * r);
}

SupEstimateReport sup_bound_critical(const GridFunction& u,
                                     const ExponentVector& p,
                                     const BoundsGeometry& geom) {
  const double pstar = sobolev_exponent(p);
  if (!is_critical(p, pstar)) {
    throw std::domain_error("sup_bound_critical: requires pmax = p_*");
  }
  const Box q0 = geom.box(p);
  if (!u.grid().box().contains(q0, 1e-9)) {
    throw std::out_of_range("sup_bound_critical: Q_rho escapes the grid");
  }
  SupEstimateReport rep;
  rep.branch = BoundsBranch::kCritical;
  rep.gamma_empirical = recursion_gamma(u, p, geom, rep.branch);
  rep.gamma_used =
      std::isnan(rep.gamma_empirical) ? 0.0 : 2.0 * rep.gamma_empirical;
  rep.threshold = critical_threshold(p, rep.gamma_used);
  const double scale = std::max(1.0, positive_sup(u, q0));
  const double cap = 1e6 * scale;
  auto small = [&](double k) {
    return critical_x0(u, p, geom, k) <= rep.threshold;
  };
  double k = 1.0;
  std::size_t steps = 0;
  if (!small(1.0)) {
    double lo = 1.0;
    double hi = 2.0;
    while (!small(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > cap) {
        throw std::runtime_error("sup_bound_critical: bisection bracket exhausted");
      }
    }
    while (hi - lo > 1e-10 * hi) {
      const double mid = 0.5 * (lo + hi);
      (small(mid) ? hi : lo) = mid;
      ++steps;
    }
    k = hi;
  }
  rep.k = k;
  rep.bound = std::max(1.0, k);
  rep.constant = kNaN;
  rep.measured_sup = positive_sup(u, geom.half_box(p));

  InequalityReport& r = rep.report;
  r.check_name = "sup_bound_critical";
  r.anchor = "local-boundedness-critical";
  r.lhs = rep.measured_sup;
  r.rhs = rep.bound;
  r.ratio = rep.gamma_empirical;
  r.details = geometry_json(geom, p);
  r.details["branch"] = to_string(rep.branch);
  r.details["pstar"] = pstar;
  r.details["k"] = k;
  r.details["C"] = nullptr;
  r.details["threshold"] = finite_or_null(rep.threshold);
  r.details["x0_at_k"] = critical_x0(u, p, geom, k);
  r.details["bisection_steps"] = steps;
  r.details["gamma_used"] = rep.gamma_used;
  r.details["grid_meta"] = grid_meta(u.grid());
  r.state = rep.measured_sup <= rep.bound * (1.0 + 1e-12) ? CheckState::kPass
                                                          : CheckState::kFail;
  return rep;
}

namespace {

double integrate_over(const GridFunction& f, const std::optional<Box>& region) {
  return region ? integrate(f, *region) : integrate(f);
}

}  // namespace

double chebyshev_level(const GridFunction& f, double q, double p, double eps,
                       const std::optional<Box>& region) {
  if (!(p > 0.0 && p < q)) {
    throw std::invalid_argument("chebyshev_level: need 0 < p < q");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("chebyshev_level: eps > 0");
  if (f.min() < 0.0) {
    throw std::invalid_argument("chebyshev_level: f must be nonnegative");
  }
  const double iq =
      integrate_over(f.map([q](double v) { return std::pow(v, q); }), region);
  if (iq == 0.0) return 0.0;
  return std::pow(p * iq / (eps * (q - p)), 1.0 / (q - p));
}

double chebyshev_tail(const GridFunction& f, double k, double p,
                      const std::optional<Box>& region) {
  return integrate_over(
      f.map([k, p](double v) { return v > k ? std::pow(v - k, p) : 0.0; }),
      region);
}

}  // namespace anisolab
