#include "anisolab/cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "anisolab/bounds.h"
#include "anisolab/degiorgi.h"
#include "anisolab/expression.h"
#include "anisolab/field_io.h"
#include "anisolab/holder.h"
#include "anisolab/report.h"
#include "anisolab/solver.h"

namespace anisolab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "weak_residual",  "structure",        "caccioppoli",
      "specialized_energy", "degiorgi_plus", "degiorgi_minus",
      "poincare_measure", "shrink_chain",   "recursion",
      "sup_bound",      "troisi",           "holder_fit",
      "modulus"};
  return names;
}

namespace {

bool geometry_check(const std::string& name) {
  return name != "weak_residual" && name != "structure" &&
         name != "holder_fit" && name != "modulus";
}

template <typename T>
T get_as(const json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + what + "' has the wrong type");
  }
}

const json& require(const json& j, const std::string& key,
                    const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError("config: missing '" + key + "' in " + where);
  }
  return j.at(key);
}

// A scalar or a list of scalars; lists must be non-empty.
template <typename T>
std::vector<T> sweep_list(const json& j, const std::string& what) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(get_as<T>(e, what));
  } else {
    out.push_back(get_as<T>(j, what));
  }
  if (out.empty()) throw ConfigError("config: sweep '" + what + "' is empty");
  return out;
}

Point point_of(const json& j, std::size_t dim, const std::string& what) {
  Point p = get_as<Point>(j, what);
  if (p.size() != dim) {
    throw ConfigError("config: '" + what + "' must have " +
                      std::to_string(dim) + " entries");
  }
  return p;
}

Box parse_box(const json& j, std::size_t dim) {
  if (j.contains("lo") || j.contains("hi")) {
    const Point lo = point_of(require(j, "lo", "box"), dim, "box.lo");
    const Point hi = point_of(require(j, "hi", "box"), dim, "box.hi");
    Point c(dim);
    std::vector<double> h(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      c[i] = 0.5 * (lo[i] + hi[i]);
      h[i] = 0.5 * (hi[i] - lo[i]);
    }
    return Box(c, h);
  }
  return Box(point_of(require(j, "center", "box"), dim, "box.center"),
             point_of(require(j, "half_widths", "box"), dim,
                      "box.half_widths"));
}

ProblemSpec parse_problem(const json& j) {
  ProblemSpec s;
  const auto p = get_as<std::vector<double>>(require(j, "exponents", "problem"),
                                             "problem.exponents");
  s.exponents = ExponentVector(p);
  const std::size_t n = p.size();
  s.box = parse_box(require(j, "box", "problem"), n);
  const json& nodes = require(j, "nodes", "problem");
  if (nodes.is_number_integer()) {
    s.nodes.assign(n, get_as<std::size_t>(nodes, "problem.nodes"));
  } else {
    s.nodes = get_as<std::vector<std::size_t>>(nodes, "problem.nodes");
  }
  if (s.nodes.size() != n) {
    throw ConfigError("config: problem.nodes must have one entry per axis");
  }
  const json& b = require(j, "boundary", "problem");
  if (b.is_string()) {
    s.boundary_expression = b.get<std::string>();
    Expression(s.boundary_expression, n);  // fail early on syntax
  } else if (b.is_object() && b.contains("file")) {
    s.boundary_file = get_as<std::string>(b.at("file"), "problem.boundary.file");
  } else if (b.is_object() && b.contains("expression")) {
    s.boundary_expression =
        get_as<std::string>(b.at("expression"), "problem.boundary.expression");
    Expression(s.boundary_expression, n);
  } else {
    throw ConfigError("config: problem.boundary must be an expression or "
                      "{\"file\": path}");
  }
  if (j.contains("epsilon") && !j.at("epsilon").is_null()) {
    s.epsilon = get_as<double>(j.at("epsilon"), "problem.epsilon");
  }
  if (j.contains("tol")) s.tol = get_as<double>(j.at("tol"), "problem.tol");
  if (j.contains("max_iter")) {
    s.max_iter = get_as<std::size_t>(j.at("max_iter"), "problem.max_iter");
  }
  return s;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  try {
    if (j.contains("name")) c.name = get_as<std::string>(j.at("name"), "name");
    c.problem = parse_problem(require(j, "problem", "config"));
    if (c.problem.boundary_file && c.problem.boundary_file->is_relative()) {
      c.problem.boundary_file = base_dir / *c.problem.boundary_file;
    }
    const std::size_t n = c.problem.exponents.dim();

    c.checks = sweep_list<std::string>(require(j, "checks", "config"), "checks");
    std::vector<std::string> unknown;
    for (const auto& name : c.checks) {
      const auto& k = known_checks();
      if (std::find(k.begin(), k.end(), name) == k.end()) {
        unknown.push_back(name);
      }
    }
    if (!unknown.empty()) {
      std::string msg = "config: unknown check(s):";
      for (const auto& u : unknown) msg += " " + u;
      msg += "; known:";
      for (const auto& k : known_checks()) msg += " " + k;
      throw ConfigError(msg);
    }

    c.geometry.center = c.problem.box.center;
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      if (g.contains("center")) {
        c.geometry.center = point_of(g.at("center"), n, "geometry.center");
      }
      if (g.contains("rho")) c.geometry.rho = sweep_list<double>(g.at("rho"), "geometry.rho");
      if (g.contains("q")) c.geometry.q = sweep_list<int>(g.at("q"), "geometry.q");
      if (g.contains("sigma")) {
        c.geometry.sigma = sweep_list<double>(g.at("sigma"), "geometry.sigma");
      }
      if (g.contains("alpha") && !g.at("alpha").is_null()) {
        c.geometry.alpha.clear();
        for (double a : sweep_list<double>(g.at("alpha"), "geometry.alpha")) {
          c.geometry.alpha.emplace_back(a);
        }
      }
      if (g.contains("levels") && !g.at("levels").is_null()) {
        const auto lv = get_as<std::vector<double>>(g.at("levels"), "geometry.levels");
        if (lv.size() != 2) {
          throw ConfigError("config: geometry.levels is [mu_plus, omega]");
        }
        c.geometry.levels = std::make_pair(lv[0], lv[1]);
      }
    }

    c.decay.center = c.problem.box.center;
    if (j.contains("decay")) {
      const json& d = j.at("decay");
      if (d.contains("center")) c.decay.center = point_of(d.at("center"), n, "decay.center");
      if (d.contains("levels")) c.decay.levels = get_as<std::size_t>(d.at("levels"), "decay.levels");
      if (d.contains("rho0")) c.decay.rho0 = get_as<double>(d.at("rho0"), "decay.rho0");
      if (d.contains("q")) c.decay.q = get_as<int>(d.at("q"), "decay.q");
      if (d.contains("min_nodes")) {
        c.decay.min_nodes = get_as<std::size_t>(d.at("min_nodes"), "decay.min_nodes");
      }
      if (d.contains("residual_limit")) {
        c.decay.residual_limit = get_as<double>(d.at("residual_limit"), "decay.residual_limit");
      }
      if (d.contains("pairs")) c.decay.pairs = get_as<std::size_t>(d.at("pairs"), "decay.pairs");
      if (d.contains("required_fraction")) {
        c.decay.required_fraction =
            get_as<double>(d.at("required_fraction"), "decay.required_fraction");
      }
    }

    if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j.at("seed"), "seed");
    if (j.contains("weak_trials")) {
      c.weak_trials = get_as<std::size_t>(j.at("weak_trials"), "weak_trials");
    }
    if (j.contains("weak_factor")) {
      c.weak_factor = get_as<double>(j.at("weak_factor"), "weak_factor");
    }
    if (j.contains("structure_samples")) {
      c.structure_samples =
          get_as<std::size_t>(j.at("structure_samples"), "structure_samples");
    }
    if (j.contains("poincare_tolerance")) {
      c.poincare_tolerance =
          get_as<double>(j.at("poincare_tolerance"), "poincare_tolerance");
    }
    if (j.contains("output") && !j.at("output").is_null()) {
      c.output = get_as<std::string>(j.at("output"), "output");
    }
  } catch (const ExpressionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: unparseable JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

GridFunction boundary_data(const ProblemSpec& problem, const fs::path& base_dir) {
  const Grid grid(problem.box, problem.nodes);
  if (problem.boundary_file) {
    fs::path file = *problem.boundary_file;
    if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
    GridFunction f = [&] {
      try {
        return read_field(file);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config: boundary file: ") + e.what());
      }
    }();
    if (!f.grid().same_layout(grid)) {
      throw ConfigError("config: boundary file grid does not match problem");
    }
    return f;
  }
  const Expression expr(problem.boundary_expression, grid.dim());
  return GridFunction::sample(grid, [&](const Point& x) { return expr(x); });
}

fs::path output_directory(const RunOptions& options,
                          const ExperimentConfig& config) {
  if (options.out) return *options.out;
  const char* env = std::getenv("ANISOLAB_OUTPUT_ROOT");
  const fs::path root = (env != nullptr && *env != '\0') ? fs::path(env)
                                                         : fs::path("anisolab-out");
  return root / config.output.value_or(config.name);
}

namespace {

struct SweepPoint {
  double rho;
  std::optional<double> alpha;
  int q;
  double sigma;
};

json point_json(const SweepPoint& pt) {
  json j;
  j["rho"] = pt.rho;
  j["alpha"] = pt.alpha ? json(*pt.alpha) : json(nullptr);
  j["q"] = pt.q;
  j["sigma"] = pt.sigma;
  return j;
}

struct NamedReport {
  std::string stem;
  InequalityReport report;
};

InequalityReport unmet(const std::string& name, const std::string& anchor,
                       const std::string& reason, CheckState state) {
  InequalityReport r;
  r.check_name = name;
  r.anchor = anchor;
  r.lhs = std::numeric_limits<double>::quiet_NaN();
  r.rhs = std::numeric_limits<double>::quiet_NaN();
  r.state = state;
  r.details["reason"] = reason;
  return r;
}

struct Experiment {
  const ExperimentConfig& config;
  const GridFunction& u;
  const ExponentVector& p;
  double epsilon;
  double tolerance;
  std::uint64_t seed;
};

IntrinsicGeometry intrinsic(const Experiment& ex, const SweepPoint& pt) {
  IntrinsicGeometry g;
  g.center = ex.config.geometry.center;
  g.rho = pt.rho;
  g.alpha = pt.alpha;
  g.q = pt.q;
  g.sigma = pt.sigma;
  g.levels = ex.config.geometry.levels;
  return g;
}

// Largest chain length allowed by the smallness condition, capped at 8.
int chain_length(const ExponentVector& p) {
  const double spread = p.pmax() - p.pmin();
  if (spread <= 0.0) return 8;
  return std::min(8, static_cast<int>(std::floor(1.0 / spread)));
}

InequalityReport caccioppoli_side(const Experiment& ex, const SweepPoint& pt,
                                  Sign side) {
  const std::string name =
      side == Sign::kPlus ? "caccioppoli_plus" : "caccioppoli_minus";
  const ResolvedGeometry rg = resolve_geometry(ex.u, ex.p, intrinsic(ex, pt));
  if (rg.degenerate()) {
    return unmet(name, "energy-inequality", "zero oscillation",
                 CheckState::kDegenerate);
  }
  const GridFunction v = ex.u.map([&](double x) { return x * rg.scale; });
  const CaccioppoliConfig cfg{
      side == Sign::kPlus ? rg.mu_plus - 0.5 : rg.mu_minus + 0.5, side,
      *rg.cylinder, pt.sigma, ex.p};
  InequalityReport r = caccioppoli_report(v, cfg);
  r.check_name = name;
  return r;
}

InequalityReport troisi_local(const Experiment& ex, const SweepPoint& pt) {
  const ResolvedGeometry rg = resolve_geometry(ex.u, ex.p, intrinsic(ex, pt));
  if (rg.degenerate()) {
    return unmet("troisi", "embedding", "zero oscillation",
                 CheckState::kDegenerate);
  }
  const GridFunction v = ex.u.map([&](double x) { return x * rg.scale; });
  const GridFunction w = truncate(v, rg.mu_plus - 0.5, Sign::kPlus);
  const GridFunction z =
      cutoff(ex.u.grid(), *rg.cylinder, rg.cylinder->scaled(pt.sigma), ex.p);
  std::vector<double> f(w.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = w[i] * z[i];
  return troisi_check(w.with_values(std::move(f)), ex.p);
}

InequalityReport sup_bound(const Experiment& ex, const BoundsGeometry& bg) {
  const double pstar = sobolev_exponent(ex.p);
  if (std::abs(ex.p.pmax() - pstar) <= 1e-12) {
    return sup_bound_critical(ex.u, ex.p, bg).report;
  }
  if (ex.p.pmax() > pstar) {
    return unmet("sup_bound", "sup-estimate", "pmax exceeds p_*",
                 CheckState::kHypothesisNotMet);
  }
  return sup_bound_subcritical(ex.u, ex.p, bg).report;
}

InequalityReport geometry_report(const Experiment& ex, const std::string& name,
                                 const SweepPoint& pt) {
  const IntrinsicGeometry geom = intrinsic(ex, pt);
  BoundsGeometry bg;
  bg.center = geom.center;
  bg.rho = pt.rho;
  bg.alpha = pt.alpha;
  try {
    if (name == "specialized_energy") {
      return specialized_energy_report(ex.u, ex.p, geom, pt.q, Sign::kPlus);
    }
    if (name == "degiorgi_plus") {
      return degiorgi_lemma_check(ex.u, ex.p, Sign::kPlus, geom);
    }
    if (name == "degiorgi_minus") {
      return degiorgi_lemma_check(ex.u, ex.p, Sign::kMinus, geom);
    }
    if (name == "poincare_measure") {
      return poincare_measure_check(ex.u, ex.p, 1, geom,
                                    ex.config.poincare_tolerance);
    }
    if (name == "shrink_chain") {
      const int q = chain_length(ex.p);
      if (q < 2) {
        return unmet("shrink_chain", "measure-shrinking",
                     "exponent spread too large for a chain of length 2",
                     CheckState::kHypothesisNotMet);
      }
      return shrink_chain(ex.u, ex.p, q, geom).report;
    }
    if (name == "recursion") {
      const Box q0 = bg.box(ex.p, 0);
      double sup = 0.0;
      for_each_node_in(ex.u.grid(), q0,
                       [&](std::size_t i) { sup = std::max(sup, ex.u[i]); });
      return recursion_report(ex.u, ex.p, bg, std::max(1.0, sup), 8).report;
    }
    if (name == "sup_bound") return sup_bound(ex, bg);
    if (name == "troisi") return troisi_local(ex, pt);
  } catch (const std::domain_error& e) {
    return unmet(name, "", e.what(), CheckState::kHypothesisNotMet);
  }
  throw std::logic_error("unhandled check " + name);
}

std::vector<NamedReport> geometry_reports(const Experiment& ex,
                                          const SweepPoint& pt) {
  std::vector<NamedReport> out;
  for (const auto& name : ex.config.checks) {
    if (!geometry_check(name)) continue;
    if (name == "caccioppoli") {
      out.push_back({"caccioppoli_plus", caccioppoli_side(ex, pt, Sign::kPlus)});
      out.push_back({"caccioppoli_minus", caccioppoli_side(ex, pt, Sign::kMinus)});
    } else {
      out.push_back({name, geometry_report(ex, name, pt)});
    }
  }
  return out;
}

struct DecayArtifacts {
  std::optional<DecayTrace> trace;
  std::optional<HolderFit> fit;
};

std::string svg_decay_plot(const DecayTrace& trace,
                           const std::optional<HolderFit>& fit) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < trace.omega.size(); ++i) {
    if (trace.omega[i] <= 0.0) continue;
    xs.push_back(std::log10(trace.distance[i] / trace.boundary_distance));
    ys.push_back(std::log10(trace.omega[i] / trace.sup_norm));
  }
  const double w = 480.0;
  const double h = 360.0;
  const double m = 50.0;
  double x0 = -1.0, x1 = 0.0, y0 = -1.0, y1 = 0.0;
  if (!xs.empty()) {
    x0 = *std::min_element(xs.begin(), xs.end()) - 0.1;
    x1 = *std::max_element(xs.begin(), xs.end()) + 0.1;
    y0 = *std::min_element(ys.begin(), ys.end()) - 0.1;
    y1 = *std::max_element(ys.begin(), ys.end()) + 0.1;
  }
  auto sx = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto sy = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m
     << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\""
     << h - m << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">log10(d/D)</text>\n"
     << "<text x=\"14\" y=\"" << h / 2
     << "\" font-size=\"12\" transform=\"rotate(-90 14 " << h / 2
     << ")\" text-anchor=\"middle\">log10(omega/sup|u|)</text>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    os << "<circle cx=\"" << sx(xs[i]) << "\" cy=\"" << sy(ys[i])
       << "\" r=\"4\" fill=\"steelblue\"/>\n";
  }
  if (fit && !xs.empty()) {
    const double c = std::log10(fit->gamma);
    os << "<line x1=\"" << sx(x0) << "\" y1=\"" << sy(c + fit->alpha * x0)
       << "\" x2=\"" << sx(x1) << "\" y2=\"" << sy(c + fit->alpha * x1)
       << "\" stroke=\"firebrick\"/>\n"
       << "<text x=\"" << m + 8 << "\" y=\"" << m + 14
       << "\" font-size=\"12\">alpha = " << fit->alpha << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<NamedReport> global_reports(const Experiment& ex,
                                        DecayArtifacts& decay) {
  std::vector<NamedReport> out;
  const auto& checks = ex.config.checks;
  auto wants = [&](const char* n) {
    return std::find(checks.begin(), checks.end(), n) != checks.end();
  };
  if (wants("weak_residual")) {
    const FluxField flux = FluxField::prototype(ex.p, ex.epsilon);
    InequalityReport r;
    r.check_name = "weak_residual";
    r.anchor = "weak-formulation";
    r.seed = ex.seed;
    r.lhs = weak_residual(ex.u, flux, ex.config.weak_trials, ex.seed);
    r.rhs = ex.config.weak_factor * ex.tolerance;
    r.state = r.lhs <= r.rhs ? CheckState::kPass : CheckState::kFail;
    r.details["trials"] = ex.config.weak_trials;
    r.details["solver_tolerance"] = ex.tolerance;
    r.details["grid_meta"] = grid_meta(ex.u.grid());
    out.push_back({"weak_residual", r});
  }
  if (wants("structure")) {
    // The unregularized prototype: epsilon only serves the solver and
    // lowers the coercivity constant below 1 near g = 0.
    out.push_back({"structure",
                   structure_check(FluxField::prototype(ex.p, 0.0),
                                   ex.config.structure_samples, ex.seed + 1)});
  }
  if (!wants("holder_fit") && !wants("modulus")) return out;

  const DecaySpec& d = ex.config.decay;
  DecayOptions opts;
  opts.rho0 = d.rho0;
  opts.q = d.q;
  opts.min_nodes = d.min_nodes;
  decay.trace = oscillation_decay(ex.u, ex.p, d.center, d.levels, opts);
  const DecayTrace& trace = *decay.trace;
  InequalityReport fr;
  fr.check_name = "holder_fit";
  fr.anchor = "holder-decay";
  fr.rhs = d.residual_limit;
  fr.details["points"] = trace.omega.size();
  fr.details["under_resolved"] = trace.under_resolved;
  fr.details["rho"] = trace.rho;
  fr.details["omega"] = trace.omega;
  fr.details["distance"] = trace.distance;
  fr.details["boundary_distance"] = trace.boundary_distance;
  fr.details["grid_meta"] = grid_meta(ex.u.grid());
  std::string unmet_reason;
  CheckState unmet_state = CheckState::kHypothesisNotMet;
  if (trace.degenerate()) {
    unmet_reason = "zero oscillation in the trace";
    unmet_state = CheckState::kDegenerate;
  } else if (trace.omega.size() < 3) {
    unmet_reason = "fewer than 3 resolved cylinders";
  } else {
    decay.fit = holder_fit(trace);
    fr.lhs = decay.fit->residual;
    fr.ratio = decay.fit->alpha;
    fr.details["alpha"] = decay.fit->alpha;
    fr.details["gamma"] = decay.fit->gamma;
    fr.details["alpha_effective"] = decay.fit->alpha_effective;
    fr.details["gamma_effective"] = decay.fit->gamma_effective;
    fr.state = decay.fit->alpha > 0.0 && fr.lhs <= fr.rhs ? CheckState::kPass
                                                          : CheckState::kFail;
  }
  if (!decay.fit) {
    fr.lhs = std::numeric_limits<double>::quiet_NaN();
    fr.state = unmet_state;
    fr.details["reason"] = unmet_reason;
  }
  if (wants("holder_fit")) out.push_back({"holder_fit", fr});
  if (wants("modulus")) {
    if (decay.fit) {
      out.push_back({"modulus",
                     modulus_check(ex.u, ex.p, *trace.initial_box, *decay.fit,
                                   d.pairs, d.required_fraction, ex.seed + 2)});
    } else {
      out.push_back({"modulus", unmet("modulus", "holder-modulus",
                                      unmet_reason, unmet_state)});
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

struct Solved {
  SolveReport report;
  double seconds;
};

Solved solve(const ExperimentConfig& c, const fs::path& base) {
  DirichletProblem prob{boundary_data(c.problem, base), c.problem.exponents,
                        c.problem.epsilon, c.problem.tol, 0.0,
                        c.problem.max_iter};
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport r = solve_dirichlet(prob);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(r), secs};
}

json solve_json(const ExperimentConfig& c, const SolveReport& r) {
  json j;
  j["name"] = c.name;
  j["exponents"] = std::vector<double>(c.problem.exponents.values().begin(),
                                       c.problem.exponents.values().end());
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["gradient_norm"] = finite_or_null(r.gradient_norm);
  j["tolerance"] = finite_or_null(r.tolerance);
  j["epsilon"] = finite_or_null(r.epsilon);
  j["energy_final"] = r.energy_history.empty()
                          ? json(nullptr)
                          : finite_or_null(r.energy_history.back());
  j["grid_meta"] = grid_meta(r.solution.grid());
  return j;
}

void write_solution(const fs::path& dir, const ExperimentConfig& c,
                    const Solved& s, bool deterministic) {
  write_field(dir / "solution.field", s.report.solution);
  json j = solve_json(c, s.report);
  if (!deterministic) j["elapsed_seconds"] = s.seconds;
  write_text(dir / "solve.json", dump(j));
  std::ostringstream os;
  os << "iteration,energy\n" << std::setprecision(17);
  for (std::size_t i = 0; i < s.report.energy_history.size(); ++i) {
    os << i << "," << s.report.energy_history[i] << "\n";
  }
  write_text(dir / "energy.csv", os.str());
}

void write_decay(const fs::path& dir, const DecayArtifacts& decay) {
  if (!decay.trace) return;
  std::ostringstream os;
  os << "m,rho_m,omega_m\n" << std::setprecision(17);
  for (std::size_t m = 0; m < decay.trace->omega.size(); ++m) {
    os << m << "," << decay.trace->rho[m] << "," << decay.trace->omega[m]
       << "\n";
  }
  write_text(dir / "decay.csv", os.str());
  write_text(dir / "decay.svg", svg_decay_plot(*decay.trace, decay.fit));
}

bool any_fail(const std::vector<NamedReport>& reports) {
  return std::any_of(reports.begin(), reports.end(), [](const NamedReport& r) {
    return r.report.state == CheckState::kFail;
  });
}

std::string summary_row(const std::string& prefix, const NamedReport& r) {
  return prefix + r.stem + "," + std::string(to_string(r.report.state)) + "," +
         csv_number(r.report.lhs) + "," + csv_number(r.report.rhs) + "," +
         csv_number(r.report.ratio) + "\n";
}

std::vector<SweepPoint> sweep_points(const GeometrySweep& g, bool full) {
  std::vector<SweepPoint> pts;
  for (double rho : g.rho) {
    for (const auto& alpha : g.alpha) {
      for (int q : g.q) {
        for (double sigma : g.sigma) {
          pts.push_back({rho, alpha, q, sigma});
          if (!full) return pts;
        }
      }
    }
  }
  return pts;
}

int run_experiment(const RunOptions& options, const ExperimentConfig& config,
                   std::ostream& out) {
  const fs::path dir = output_directory(options, config);
  fs::create_directories(dir);
  const Solved solved = solve(config, options.config.parent_path());
  write_solution(dir, config, solved, options.deterministic);
  if (!solved.report.converged) {
    out << "solver did not converge after " << solved.report.iterations
        << " iterations (gradient " << solved.report.gradient_norm
        << " > tolerance " << solved.report.tolerance << ")\n";
    return kExitNotConverged;
  }
  out << "solved in " << solved.report.iterations << " iterations\n";
  if (options.verb == "solve") return kExitOk;

  const std::uint64_t seed = options.seed.value_or(config.seed);
  const Experiment ex{config, solved.report.solution, config.problem.exponents,
                      solved.report.epsilon, solved.report.tolerance, seed};
  const bool sweep = options.verb == "sweep";
  const std::vector<SweepPoint> pts = sweep_points(config.geometry, sweep);

  auto timed = [&](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto reports = fn();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (!options.deterministic) {
      for (auto& r : reports) r.report.details["elapsed_seconds"] = secs;
    }
    return reports;
  };

  DecayArtifacts decay;
  std::vector<NamedReport> global =
      timed([&] { return global_reports(ex, decay); });

  std::vector<std::vector<NamedReport>> per_point(pts.size());
  const std::size_t jobs = options.deterministic ? 1 : std::max<std::size_t>(1, options.jobs);
  for (std::size_t start = 0; start < pts.size(); start += jobs) {
    std::vector<std::future<std::vector<NamedReport>>> futures;
    const std::size_t stop = std::min(pts.size(), start + jobs);
    for (std::size_t i = start; i < stop; ++i) {
      futures.push_back(std::async(jobs > 1 ? std::launch::async
                                            : std::launch::deferred,
                                   [&, i] {
                                     return timed([&] {
                                       return geometry_reports(ex, pts[i]);
                                     });
                                   }));
    }
    for (std::size_t i = start; i < stop; ++i) {
      per_point[i] = futures[i - start].get();
    }
  }

  std::string csv = sweep ? "point,rho,alpha,q,sigma,check,state,lhs,rhs,gamma\n"
                          : "check,state,lhs,rhs,gamma\n";
  std::size_t files = 0;
  for (const auto& r : global) {
    write_text(dir / (r.stem + ".json"), dump(to_json(r.report)));
    csv += sweep ? summary_row(",,,,,", r) : summary_row("", r);
    ++files;
  }
  bool failed = any_fail(global);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (auto& r : per_point[i]) {
      std::string stem = r.stem;
      std::string prefix;
      if (sweep) {
        r.report.details["sweep_point"] = point_json(pts[i]);
        stem += "-" + std::to_string(i);
        prefix = std::to_string(i) + "," + csv_number(pts[i].rho) + "," +
                 (pts[i].alpha ? csv_number(*pts[i].alpha) : "") + "," +
                 std::to_string(pts[i].q) + "," + csv_number(pts[i].sigma) + ",";
      }
      write_text(dir / (stem + ".json"), dump(to_json(r.report)));
      csv += summary_row(prefix, r);
      ++files;
    }
    failed = failed || any_fail(per_point[i]);
  }
  write_text(dir / (sweep ? "sweep.csv" : "summary.csv"), csv);
  write_decay(dir, decay);
  out << "wrote " << files << " reports to " << dir.string() << "\n";
  return failed ? kExitCheckFailed : kExitOk;
}

}  // namespace

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  if (options.verb == "report") {
    return report(options.out.value_or(options.config), out, err);
  }
  if (options.verb != "solve" && options.verb != "check" &&
      options.verb != "sweep") {
    err << "unknown verb '" << options.verb << "'\n";
    return kExitBadConfig;
  }
  try {
    const ExperimentConfig config = load_config(options.config);
    return run_experiment(options, config, out);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::out_of_range& e) {
    err << "config: geometry does not fit the grid: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    err << "config: " << e.what() << "\n";
    return kExitBadConfig;
  }
}

int report(const fs::path& dir, std::ostream& out, std::ostream& err) {
  struct Row {
    std::string file;
    InequalityReport report;
  };
  std::vector<Row> rows;
  std::error_code ec;
  if (fs::is_directory(dir, ec)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".json") continue;
      std::ifstream in(entry.path());
      const json j = json::parse(in, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("check_name")) {
        continue;
      }
      try {
        rows.push_back({entry.path().filename().string(), report_from_json(j)});
      } catch (const std::exception&) {
        continue;
      }
    }
  }
  if (rows.empty()) {
    err << "no reports in " << dir.string() << "\n";
    return kExitBadConfig;
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    const bool fa = a.report.state == CheckState::kFail;
    const bool fb = b.report.state == CheckState::kFail;
    if (fa != fb) return fa;
    return a.file < b.file;
  });
  std::size_t wname = 5, wanchor = 6;
  for (const auto& r : rows) {
    wname = std::max(wname, r.file.size() - 5);
    wanchor = std::max(wanchor, r.report.anchor.size());
  }
  out << std::left << std::setw(static_cast<int>(wname) + 2) << "check"
      << std::setw(static_cast<int>(wanchor) + 2) << "anchor"
      << std::setw(20) << "state" << "gamma\n";
  for (const auto& r : rows) {
    const std::string stem = r.file.substr(0, r.file.size() - 5);
    out << std::left << std::setw(static_cast<int>(wname) + 2) << stem
        << std::setw(static_cast<int>(wanchor) + 2) << r.report.anchor
        << std::setw(20) << to_string(r.report.state)
        << (std::isfinite(r.report.ratio) ? csv_number(r.report.ratio) : "-")
        << "\n";
  }
  return kExitOk;
}

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for anisotropic p-Laplacian regularity"};
  app.require_subcommand(1);
  RunOptions opts;
  std::string out_dir;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> verbs[] = {
      {"solve", "solve the Dirichlet problem and write the solution"},
      {"check", "solve, then run the configured checks"},
      {"sweep", "run the checks over every geometry combination"}};
  for (const auto& [verb, help] : verbs) {
    CLI::App* sub = app.add_subcommand(verb, help);
    sub->add_option("--config", opts.config, "experiment JSON")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("--deterministic", opts.deterministic,
                  "omit timings; single worker");
    sub->add_option("--jobs", opts.jobs, "parallel sweep points")
        ->check(CLI::PositiveNumber);
  }
  CLI::App* rep = app.add_subcommand("report", "summarize a report directory");
  rep->add_option("dir", out_dir, "directory of report JSONs");
  rep->add_option("--out", out_dir, "directory of report JSONs");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadConfig;
  }
  opts.verb = app.get_subcommands().front()->get_name();
  if (!out_dir.empty()) opts.out = out_dir;
  const CLI::App* chosen = app.get_subcommands().front();
  if (opts.verb != "report" && chosen->count("--seed") > 0) opts.seed = seed;
  if (opts.verb == "report" && !opts.out) {
    std::cerr << "report: directory required\n";
    return kExitBadConfig;
  }
  return run(opts, std::cout, std::cerr);
}

}  // namespace anisolab::cli
