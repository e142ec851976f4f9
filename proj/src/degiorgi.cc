#include "anisolab/degiorgi.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "anisolab/holder.h"

namespace anisolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

GridFunction product(const GridFunction& a, const GridFunction& b) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return a.with_values(std::move(v));
}

// Per-axis terms int_region |d_j[w zeta^{1/p_j}]|^{p_j}.
std::vector<double> localized_energy(const GridFunction& w,
                                     const CutoffProfile& cut,
                                     const ExponentVector& p,
                                     const Box& region) {
  std::vector<double> terms;
  for (std::size_t j = 0; j < p.dim(); ++j) {
    const GridFunction z = cut.sample(w.grid(), 1.0 / p[j]);
    const GridFunction d = partial_difference(product(w, z), j);
    const double pj = p[j];
    terms.push_back(
        integrate(d.map([pj](double v) { return std::pow(std::abs(v), pj); }),
                  region));
  }
  return terms;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double max_gradient(const GridFunction& u) {
  double m = 0.0;
  for (std::size_t j = 0; j < u.grid().dim(); ++j) {
    m = std::max(m, partial_difference(u, j).sup_abs());
  }
  return m;
}

nlohmann::json box_json(const Box& b) {
  return {{"center", b.center}, {"half_widths", b.half_widths}};
}

nlohmann::json geometry_json(const ResolvedGeometry& g,
                             const IntrinsicGeometry& in) {
  nlohmann::json j;
  j["center"] = in.center;
  j["rho"] = in.rho;
  j["q"] = in.q;
  j["alpha"] = g.alpha;
  j["sigma"] = in.sigma;
  j["scale"] = finite_or_null(g.scale);
  j["mu_plus"] = finite_or_null(g.mu_plus);
  j["mu_minus"] = finite_or_null(g.mu_minus);
  j["omega_normalized"] = g.omega;
  j["radii"] = g.radii;
  j["diagnostic_levels"] = in.levels.has_value();
  return j;
}

}  // namespace

InequalityReport caccioppoli_report(const GridFunction& u,
                                    const CaccioppoliConfig& cfg) {
  if (!(cfg.sigma > 0.0 && cfg.sigma < 1.0)) {
    throw std::invalid_argument("caccioppoli_report: sigma must lie in (0,1)");
  }
  const ExponentVector& p = cfg.exponents;
  if (p.dim() != u.grid().dim() || cfg.outer.dim() != p.dim()) {
    throw std::invalid_argument("caccioppoli_report: dimension mismatch");
  }
  const Box& q = cfg.outer;
  const CutoffProfile cut(q, q.scaled(cfg.sigma), p);
  const GridFunction w = truncate(u, cfg.level, cfg.sign);
  const std::vector<double> lhs_terms = localized_energy(w, cut, p, q);
  std::vector<double> rhs_terms;
  for (std::size_t j = 0; j < p.dim(); ++j) {
    const double pj = p[j];
    const double mass =
        integrate(w.map([pj](double v) { return std::pow(v, pj); }), q);
    rhs_terms.push_back(
        std::pow((1.0 - cfg.sigma) * q.half_widths[j], -pj) * mass);
  }
  InequalityReport r;
  r.check_name = "caccioppoli";
  r.anchor = "energy-inequality";
  r.lhs = sum(lhs_terms);
  r.rhs = sum(rhs_terms);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : kNaN;
  r.state = r.rhs > 0.0 ? CheckState::kPass : CheckState::kDegenerate;
  r.details["lhs_terms"] = lhs_terms;
  r.details["rhs_terms"] = rhs_terms;
  r.details["level"] = cfg.level;
  r.details["sign"] = cfg.sign == Sign::kPlus ? "plus" : "minus";
  r.details["sigma"] = cfg.sigma;
  r.details["box"] = box_json(q);
  r.details["grid_meta"] = grid_meta(u.grid());
  return r;
}

ResolvedGeometry resolve_geometry(const GridFunction& u,
                                  const ExponentVector& p,
                                  const IntrinsicGeometry& geom) {
  const Grid& g = u.grid();
  if (p.dim() != g.dim() || geom.center.size() != g.dim()) {
    throw std::invalid_argument("resolve_geometry: dimension mismatch");
  }
  if (!(geom.rho > 0.0)) {
    throw std::invalid_argument("resolve_geometry: rho must be positive");
  }
  ResolvedGeometry r;
  r.alpha = geom.alpha.value_or(p.pmax());
  const Box k2 = Box::cube(geom.center, 2.0 * geom.rho);
  if (!g.box().contains(k2, 1e-9)) {
    throw std::out_of_range("geometry: K_{2 rho} escapes the grid box");
  }
  double mu_plus = 0.0;
  double omega = 0.0;
  if (geom.levels) {
    mu_plus = geom.levels->first;
    omega = geom.levels->second;
    if (!(omega >= 0.0)) {
      throw std::invalid_argument("geometry: diagnostic omega must be >= 0");
    }
  } else {
    const Oscillation osc = oscillation(u, k2);
    mu_plus = osc.mu_plus;
    omega = osc.omega;
  }
  const double floor = 1e-12 * std::max(1.0, u.sup_abs());
  if (!(omega > floor)) {
    r.scale = 1.0;
    r.mu_plus = mu_plus;
    r.mu_minus = mu_plus - omega;
    r.omega = 0.0;
    // Radii are still reported for the unit-oscillation cylinder.
    r.radii = intrinsic_cylinder(1.0, geom.q, r.alpha, geom.rho, p,
                                 geom.center).radii;
    return r;
  }
  r.scale = 1.0 / omega;
  r.mu_plus = mu_plus * r.scale;
  r.mu_minus = r.mu_plus - 1.0;
  r.omega = 1.0;
  const IntrinsicCylinder cyl =
      intrinsic_cylinder(1.0, geom.q, r.alpha, geom.rho, p, geom.center);
  r.radii = cyl.radii;
  if (!g.box().contains(*cyl.box, 1e-9)) {
    throw std::out_of_range("geometry: Q_rho escapes the grid box");
  }
  r.cylinder = cyl.box;
  return r;
}

InequalityReport specialized_energy_report(const GridFunction& u,
                                           const ExponentVector& p,
                                           const IntrinsicGeometry& geom,
                                           int s, Sign side) {
  if (s < 1) throw std::invalid_argument("specialized_energy_report: s >= 1");
  if (!(geom.sigma > 0.0 && geom.sigma < 1.0)) {
    throw std::invalid_argument("specialized_energy_report: sigma in (0,1)");
  }
  const ResolvedGeometry rg = resolve_geometry(u, p, geom);
  InequalityReport r;
  r.check_name = "specialized_energy";
  r.anchor = "energy-inequality-at-intrinsic-levels";
  r.details = geometry_json(rg, geom);
  r.details["s"] = s;
  r.details["side"] = side == Sign::kPlus ? "plus" : "minus";
  r.details["grid_meta"] = grid_meta(u.grid());
  if (rg.degenerate()) {
    r.state = CheckState::kDegenerate;
    r.lhs = 0.0;
    r.rhs = 0.0;
    return r;
  }
  const Box& q = *rg.cylinder;
  const GridFunction un = u.map([&](double v) { return v * rg.scale; });
  const double step = std::ldexp(1.0, -s);
  const double k = side == Sign::kPlus ? rg.mu_plus - step : rg.mu_minus + step;
  const CutoffProfile cut(q, q.scaled(geom.sigma), p);
  const std::vector<double> lhs_terms =
      localized_energy(truncate(un, k, side), cut, p, q);
  const double measure = level_set_measure(
      un, k, side == Sign::kPlus ? Direction::kAbove : Direction::kBelow, q);
  double weight = 0.0;
  for (std::size_t j = 0; j < p.dim(); ++j) {
    weight += std::pow(rg.radii[j], -p[j]) * std::pow(step, p[j]);
  }
  r.lhs = sum(lhs_terms);
  r.rhs = std::pow(1.0 - geom.sigma, -p.pmax()) * weight * measure;
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : kNaN;
  r.state = r.rhs > 0.0 ? CheckState::kPass : CheckState::kDegenerate;
  r.details["level_normalized"] = k;
  r.details["level_set_measure"] = measure;
  r.details["lhs_terms"] = lhs_terms;
  return r;
}

RecursionParams::RecursionParams(double c, double b, double d)
    : C(c), B(b), delta(d) {
  if (!(C > 0.0) || !(B >= 1.0) || !(delta > 0.0) || !std::isfinite(C) ||
      !std::isfinite(B) || !std::isfinite(delta)) {
    throw std::invalid_argument("RecursionParams: need C > 0, B >= 1, delta > 0");
  }
}

double fast_convergence_threshold(const RecursionParams& params) {
  const double d = params.delta;
  return std::exp(-std::log(params.C) / d - std::log(params.B) / (d * d));
}

RecursionTrace iterate_recursion(const RecursionParams& params, double y0,
                                 std::size_t n) {
  if (!(y0 >= 0.0)) throw std::invalid_argument("iterate_recursion: Y0 >= 0");
  RecursionTrace t;
  t.values.push_back(y0);
  const double log_c = std::log(params.C);
  const double log_b = std::log(params.B);
  const double log_cap = std::log(1e300);
  double y = y0;
  for (std::size_t k = 0; k < n; ++k) {
    if (y == 0.0) {
      t.values.push_back(0.0);
      continue;
    }
    const double next = log_c + static_cast<double>(k) * log_b +
                        (1.0 + params.delta) * std::log(y);
    if (!(next <= log_cap)) {
      t.diverged = true;
      break;
    }
    y = std::exp(next);
    t.values.push_back(y);
  }
  return t;
}

InequalityReport degiorgi_lemma_check(const GridFunction& u,
                                      const ExponentVector& p, Sign side,
                                      const IntrinsicGeometry& geom) {
  const ResolvedGeometry rg = resolve_geometry(u, p, geom);
  InequalityReport r;
  r.check_name = side == Sign::kPlus ? "degiorgi_plus" : "degiorgi_minus";
  r.anchor = side == Sign::kPlus ? "degiorgi-lemma-sup" : "degiorgi-lemma-inf";
  r.details = geometry_json(rg, geom);
  r.details["grid_meta"] = grid_meta(u.grid());
  if (rg.degenerate()) {
    r.state = CheckState::kDegenerate;
    return r;
  }
  const Box& q = *rg.cylinder;
  const InequalityReport energy =
      specialized_energy_report(u, p, geom, geom.q, side);
  const double gamma = energy.ratio;
  const double measure = energy.details.at("level_set_measure").get<double>();
  const double volume = RegionWeights(u.grid(), q).total();
  const double b = std::exp2(p.pmax() / p.pbar());
  double nu = kNaN;
  bool hypothesis = false;
  if (std::isfinite(gamma) && gamma > 0.0) {
    nu = fast_convergence_threshold(RecursionParams(
        2.0 * gamma, 2.0 * b, 1.0 / static_cast<double>(p.dim())));
    hypothesis = measure < nu * volume;
  } else {
    // Empty level set: the hypothesis holds for every nu > 0.
    hypothesis = measure == 0.0;
  }

  const GridFunction un = u.map([&](double v) { return v * rg.scale; });
  const double slack = u.grid().max_spacing() * max_gradient(un);
  const double half_step = std::ldexp(1.0, -(geom.q + 1));
  const auto values = un.values();
  double extreme = side == Sign::kPlus ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
  for_each_node_in(u.grid(), q.scaled(0.5), [&](std::size_t i) {
    extreme = side == Sign::kPlus ? std::max(extreme, values[i])
                                  : std::min(extreme, values[i]);
  });
  const double target = side == Sign::kPlus ? rg.mu_plus - half_step
                                            : rg.mu_minus + half_step;
  const bool conclusion = side == Sign::kPlus ? extreme <= target + slack
                                              : extreme >= target - slack;

  r.lhs = measure;
  r.rhs = std::isfinite(nu) ? nu * volume : kNaN;
  r.ratio = gamma;
  r.details["nu"] = finite_or_null(nu);
  r.details["recursion_C"] = finite_or_null(2.0 * gamma);
  r.details["recursion_B"] = 2.0 * b;
  r.details["cylinder_measure"] = volume;
  r.details["hypothesis_holds"] = hypothesis;
  r.details["conclusion_extreme"] = extreme;
  r.details["conclusion_target"] = target;
  r.details["conclusion_slack"] = slack;
  r.details["conclusion_holds"] = conclusion;
  if (!hypothesis) {
    r.state = CheckState::kHypothesisNotMet;
  } else {
    r.state = conclusion ? CheckState::kPass : CheckState::kFail;
  }
  return r;
}

GridFunction build_vs(const GridFunction& u, double mu_plus, double omega,
                      int s) {
  if (!(omega > 0.0)) throw std::invalid_argument("build_vs: omega > 0");
  if (s < 1) throw std::invalid_argument("build_vs: s >= 1");
  const double low = mu_plus - std::ldexp(omega, -s);
  const double cap = std::ldexp(omega, -(s + 1));
  return u.map([low, cap](double v) { return std::clamp(v - low, 0.0, cap); });
}

InequalityReport poincare_measure_check(const GridFunction& u,
                                        const ExponentVector& p, int s,
                                        const IntrinsicGeometry& geom,
                                        double tolerance) {
  if (s < 1) throw std::invalid_argument("poincare_measure_check: s >= 1");
  const ResolvedGeometry rg = resolve_geometry(u, p, geom);
  InequalityReport r;
  r.check_name = "poincare_measure";
  r.anchor = "measure-shrinking-step";
  r.details = geometry_json(rg, geom);
  r.details["s"] = s;
  r.details["tolerance"] = tolerance;
  r.details["grid_meta"] = grid_meta(u.grid());
  if (rg.degenerate()) {
    r.state = CheckState::kDegenerate;
    return r;
  }
  const Box& q = *rg.cylinder;
  const GridFunction un = u.map([&](double v) { return v * rg.scale; });
  const double volume = RegionWeights(u.grid(), q).total();
  const double lower_half =
      level_set_measure(un, rg.mu_minus + 0.5, Direction::kBelow, q);
  r.details["hypothesis_measure"] = lower_half;
  r.details["cylinder_measure"] = volume;
  if (!(lower_half >= 0.5 * volume)) {
    r.state = CheckState::kHypothesisNotMet;
    return r;
  }
  const GridFunction v = build_vs(un, rg.mu_plus, 1.0, s);
  const double upper = rg.mu_plus - std::ldexp(1.0, -(s + 1));
  const double lower = rg.mu_plus - std::ldexp(1.0, -s);
  const double a_next = level_set_measure(un, upper, Direction::kAbove, q);
  double rhs = 0.0;
  double band_rhs = 0.0;
  const auto values = un.values();
  for (std::size_t j = 0; j < p.dim(); ++j) {
    const GridFunction dv = partial_difference(v, j);
    rhs += rg.radii[j] * integrate(dv.map([](double x) { return std::abs(x); }), q);
    const GridFunction du = partial_difference(un, j);
    std::vector<double> band(du.size());
    for (std::size_t i = 0; i < band.size(); ++i) {
      band[i] = (values[i] > lower && values[i] <= upper) ? std::abs(du[i]) : 0.0;
    }
    band_rhs += rg.radii[j] * integrate(du.with_values(std::move(band)), q);
  }
  r.lhs = std::ldexp(1.0, -(s + 1)) * a_next;
  r.rhs = 4.0 * rhs;
  double margin;
  if (r.rhs > 0.0) {
    margin = 1.0 - r.lhs / r.rhs;
    r.ratio = r.lhs / r.rhs;
  } else {
    margin = r.lhs == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  r.details["margin"] = finite_or_null(margin);
  r.details["measure_next"] = a_next;
  r.details["band_rhs"] = 4.0 * band_rhs;
  r.state = margin >= -tolerance ? CheckState::kPass : CheckState::kFail;
  return r;
}

ShrinkState shrink_chain(const GridFunction& u, const ExponentVector& p, int q,
                         const IntrinsicGeometry& geom) {
  if (q < 2) throw std::invalid_argument("shrink_chain: q must be >= 2");
  if (static_cast<double>(q) * (p.pmax() - p.pmin()) > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "shrink_chain: stipulation q (pmax - pmin) <= 1 violated: " << q
        << " x " << (p.pmax() - p.pmin()) << " > 1";
    throw std::invalid_argument(msg.str());
  }
  const ResolvedGeometry rg = resolve_geometry(u, p, geom);
  ShrinkState st;
  st.q = q;
  InequalityReport& r = st.report;
  r.check_name = "shrink_chain";
  r.anchor = "measure-shrinking-chain";
  r.details = geometry_json(rg, geom);
  r.details["chain_q"] = q;
  r.details["grid_meta"] = grid_meta(u.grid());
  if (rg.degenerate()) {
    st.measures.assign(static_cast<std::size_t>(q) + 1, 0.0);
    r.state = CheckState::kDegenerate;
    return st;
  }
  const Box& box = *rg.cylinder;
  const GridFunction un = u.map([&](double v) { return v * rg.scale; });
  st.cylinder_measure = RegionWeights(u.grid(), box).total();
  for (int s = 0; s <= q; ++s) {
    st.measures.push_back(level_set_measure(
        un, rg.mu_plus - std::ldexp(1.0, -s), Direction::kAbove, box));
  }
  const double pmin = p.pmin();
  const double conj = pmin / (pmin - 1.0);
  const double qroot = std::pow(st.cylinder_measure, 1.0 / pmin);
  for (int s = 1; s < q; ++s) {
    const double next = st.measures[s + 1];
    const double drop = st.measures[s] - next;
    double g;
    if (next == 0.0) {
      g = 0.0;
    } else if (drop <= 0.0) {
      g = std::numeric_limits<double>::infinity();
    } else {
      g = next / (qroot * std::pow(drop, 1.0 - 1.0 / pmin));
    }
    st.step_gamma.push_back(g);
  }
  st.gamma = *std::max_element(st.step_gamma.begin(), st.step_gamma.end());
  const double a_q = st.measures.back();
  st.fraction = a_q / st.cylinder_measure;
  st.summed_lhs = static_cast<double>(q - 1) * std::pow(a_q, conj);
  st.summed_rhs = std::pow(st.gamma, conj) *
                  std::pow(st.cylinder_measure, 1.0 / (pmin - 1.0)) *
                  st.measures.front();
  st.fraction_bound =
      st.gamma / std::pow(static_cast<double>(q - 1), 1.0 / conj);
  r.lhs = st.fraction;
  r.rhs = st.fraction_bound;
  r.ratio = st.gamma;
  r.details["measures"] = st.measures;
  nlohmann::json steps = nlohmann::json::array();
  for (double g : st.step_gamma) steps.push_back(finite_or_null(g));
  r.details["step_gamma"] = steps;
  r.details["summed_lhs"] = st.summed_lhs;
  r.details["summed_rhs"] = finite_or_null(st.summed_rhs);
  r.details["cylinder_measure"] = st.cylinder_measure;
  r.details["gamma_finite"] = std::isfinite(st.gamma);
  const bool ok = st.fraction <= st.fraction_bound &&
                  st.summed_lhs <= st.summed_rhs * (1.0 + 1e-12);
  r.state = ok ? CheckState::kPass : CheckState::kFail;
  return st;
}

int choose_q(double gamma, double nu, double pmin) {
  if (!(gamma > 0.0)) throw std::invalid_argument("choose_q: gamma > 0");
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("choose_q: nu in (0,1)");
  if (!(pmin > 1.0)) throw std::invalid_argument("choose_q: pmin > 1");
  // gamma (q-1)^{-1/p'} <= nu  <=>  q - 1 >= (gamma/nu)^{p'}
  const double t = std::pow(gamma / nu, pmin / (pmin - 1.0));
  if (!(t < 1e9)) throw std::overflow_error("choose_q: q out of range");
  const double q = std::max(2.0, std::ceil(1.0 + t));
  return static_cast<int>(q);
}

}  // namespace anisolab
