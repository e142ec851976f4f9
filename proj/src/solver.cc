#include "anisolab/solver.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace anisolab {

FluxField::FluxField(Evaluator evaluate_in, std::vector<double> c0_in,
                     std::vector<double> c1_in, ExponentVector exponents_in)
    : evaluate(std::move(evaluate_in)),
      c0(std::move(c0_in)),
      c1(std::move(c1_in)),
      exponents(std::move(exponents_in)) {
  if (c0.size() != exponents.dim() || c1.size() != exponents.dim()) {
    throw std::invalid_argument("FluxField: constant count != dimension");
  }
  for (std::size_t i = 0; i < c0.size(); ++i) {
    if (!(c0[i] > 0.0) || !(c1[i] > 0.0)) {
      throw std::invalid_argument("FluxField: C0_i and C1_i must be positive");
    }
  }
  if (!evaluate) throw std::invalid_argument("FluxField: empty evaluator");
}

FluxField FluxField::prototype(const ExponentVector& p, double epsilon) {
  std::vector<double> exps(p.values().begin(), p.values().end());
  const double eps2 = epsilon * epsilon;
  Evaluator eval = [exps, eps2](std::span<const double>, double,
                                std::span<const double> g,
                                std::span<double> a) {
    for (std::size_t i = 0; i < exps.size(); ++i) {
      const double m2 = eps2 + g[i] * g[i];
      a[i] = (m2 == 0.0) ? 0.0 : std::pow(m2, 0.5 * (exps[i] - 2.0)) * g[i];
    }
  };
  std::vector<double> ones(p.dim(), 1.0);
  return FluxField(std::move(eval), ones, ones, p);
}

FluxField FluxField::scaled(double factor, std::vector<double> c0_in,
                            std::vector<double> c1_in) const {
  Evaluator inner = evaluate;
  Evaluator eval = [inner, factor](std::span<const double> x, double u,
                                   std::span<const double> g,
                                   std::span<double> a) {
    inner(x, u, g, a);
    for (double& v : a) v *= factor;
  };
  return FluxField(std::move(eval), std::move(c0_in), std::move(c1_in),
                   exponents);
}

EdgeEnergy::EdgeEnergy(const Grid& grid, ExponentVector p, double epsilon)
    : grid_(grid), p_(std::move(p)), epsilon_(epsilon) {
  if (p_.dim() != grid_.dim()) {
    throw std::invalid_argument("EdgeEnergy: exponent/grid dimension mismatch");
  }
  if (!(epsilon_ >= 0.0) || !std::isfinite(epsilon_)) {
    throw std::invalid_argument("EdgeEnergy: epsilon must be >= 0");
  }
  const std::size_t n = grid_.size();
  mass_.assign(n, 1.0);
  boundary_.assign(n, 0);
  for (std::size_t lin = 0; lin < n; ++lin) {
    std::size_t rest = lin;
    double m = 1.0;
    bool bnd = false;
    for (std::size_t j = 0; j < grid_.dim(); ++j) {
      const std::size_t i = rest / grid_.stride(j);
      rest %= grid_.stride(j);
      m *= grid_.trapezoid_weight(j, i);
      bnd = bnd || i == 0 || i + 1 == grid_.nodes(j);
    }
    mass_[lin] = m;
    boundary_[lin] = bnd ? 1 : 0;
  }
}

bool EdgeEnergy::has_upper_neighbor(std::size_t axis, std::size_t node) const {
  const std::size_t i = (node / grid_.stride(axis)) % grid_.nodes(axis);
  return i + 1 < grid_.nodes(axis);
}

double EdgeEnergy::edge_weight(std::size_t axis, std::size_t lower) const {
  const std::size_t i = (lower / grid_.stride(axis)) % grid_.nodes(axis);
  return grid_.spacing(axis) * mass_[lower] / grid_.trapezoid_weight(axis, i);
}

double EdgeEnergy::integrand(std::size_t axis, double d) const {
  const double p = p_[axis];
  if (epsilon_ == 0.0) return std::pow(std::abs(d), p) / p;
  return std::pow(epsilon_ * epsilon_ + d * d, 0.5 * p) / p;
}

double EdgeEnergy::flux_derivative(std::size_t axis, double d) const {
  const double p = p_[axis];
  if (epsilon_ == 0.0) {
    if (d == 0.0) return 0.0;
    return p == 2.0 ? d : std::pow(std::abs(d), p - 2.0) * d;
  }
  return std::pow(epsilon_ * epsilon_ + d * d, 0.5 * (p - 2.0)) * d;
}

double EdgeEnergy::flux_second_derivative(std::size_t axis, double d) const {
  const double p = p_[axis];
  if (epsilon_ == 0.0) {
    if (p == 2.0) return 1.0;
    if (d == 0.0) return 0.0;
    return (p - 1.0) * std::pow(std::abs(d), p - 2.0);
  }
  const double m2 = epsilon_ * epsilon_ + d * d;
  return std::pow(m2, 0.5 * (p - 4.0)) * ((p - 1.0) * d * d +
                                          epsilon_ * epsilon_);
}

double EdgeEnergy::value(std::span<const double> u) const {
  long double total = 0.0L;
  for (std::size_t axis = 0; axis < grid_.dim(); ++axis) {
    const std::size_t s = grid_.stride(axis);
    const double h = grid_.spacing(axis);
    for (std::size_t lin = 0; lin < u.size(); ++lin) {
      if (!has_upper_neighbor(axis, lin)) continue;
      const double d = (u[lin + s] - u[lin]) / h;
      total += static_cast<long double>(edge_weight(axis, lin) *
                                        integrand(axis, d));
    }
  }
  return static_cast<double>(total);
}

namespace {

void require_regularized(const ExponentVector& p, double epsilon) {
  if (epsilon == 0.0 && p.pmin() < 2.0) {
    throw std::invalid_argument(
        "energy gradient with epsilon = 0 requires every p_i >= 2");
  }
}

}  // namespace

void EdgeEnergy::gradient(std::span<const double> u,
                          std::span<double> out) const {
  require_regularized(p_, epsilon_);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t axis = 0; axis < grid_.dim(); ++axis) {
    const std::size_t s = grid_.stride(axis);
    const double h = grid_.spacing(axis);
    for (std::size_t lin = 0; lin < u.size(); ++lin) {
      if (!has_upper_neighbor(axis, lin)) continue;
      const double d = (u[lin + s] - u[lin]) / h;
      const double t = edge_weight(axis, lin) * flux_derivative(axis, d) / h;
      out[lin] -= t;
      out[lin + s] += t;
    }
  }
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    if (boundary_[lin]) out[lin] = 0.0;
  }
}

void EdgeEnergy::linearize(std::span<const double> u) {
  require_regularized(p_, epsilon_);
  curvature_.assign(grid_.dim(), std::vector<double>(u.size(), 0.0));
  for (std::size_t axis = 0; axis < grid_.dim(); ++axis) {
    const std::size_t s = grid_.stride(axis);
    const double h = grid_.spacing(axis);
    auto& c = curvature_[axis];
    for (std::size_t lin = 0; lin < u.size(); ++lin) {
      if (!has_upper_neighbor(axis, lin)) continue;
      const double d = (u[lin + s] - u[lin]) / h;
      c[lin] = edge_weight(axis, lin) * flux_second_derivative(axis, d) /
               (h * h);
    }
  }
}

void EdgeEnergy::hessian_apply(std::span<const double> v,
                               std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t axis = 0; axis < grid_.dim(); ++axis) {
    const std::size_t s = grid_.stride(axis);
    const auto& c = curvature_[axis];
    for (std::size_t lin = 0; lin < v.size(); ++lin) {
      if (c[lin] == 0.0) continue;
      const double t = c[lin] * (v[lin + s] - v[lin]);
      out[lin] -= t;
      out[lin + s] += t;
    }
  }
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    if (boundary_[lin]) out[lin] = 0.0;
  }
}

void EdgeEnergy::hessian_diagonal(std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t axis = 0; axis < grid_.dim(); ++axis) {
    const std::size_t s = grid_.stride(axis);
    const auto& c = curvature_[axis];
    for (std::size_t lin = 0; lin < out.size(); ++lin) {
      if (c[lin] == 0.0) continue;
      out[lin] += c[lin];
      out[lin + s] += c[lin];
    }
  }
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    if (boundary_[lin]) out[lin] = 0.0;
  }
}

double energy(const GridFunction& u, const ExponentVector& p, double epsilon) {
  return EdgeEnergy(u.grid(), p, epsilon).value(u.values());
}

GridFunction energy_gradient(const GridFunction& u, const ExponentVector& p,
                             double epsilon) {
  EdgeEnergy e(u.grid(), p, epsilon);
  std::vector<double> g(u.size());
  e.gradient(u.values(), g);
  return GridFunction(u.grid(), std::move(g));
}

double default_epsilon(const GridFunction& boundary) {
  const Grid& g = boundary.grid();
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.on_boundary(i)) continue;
    hi = std::max(hi, boundary[i]);
    lo = std::min(lo, boundary[i]);
  }
  return 1e-8 * (hi - lo);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<long double>(a[i]) * b[i];
  }
  return static_cast<double>(s);
}

double residual_norm(const EdgeEnergy& e, std::span<const double> g) {
  double r = 0.0;
  const auto m = e.mass();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] != 0.0) r = std::max(r, std::abs(g[i]) / m[i]);
  }
  return r;
}

// Change of the energy along x + t s, accumulated edge by edge with a
// cancellation-free difference so that decrements far below the energy's
// own rounding level are still resolved.
double energy_change(const EdgeEnergy& e, std::span<const double> x,
                     std::span<const double> s, double t) {
  const Grid& g = e.grid();
  const double eps2 = e.epsilon() * e.epsilon();
  long double total = 0.0L;
  for (std::size_t axis = 0; axis < g.dim(); ++axis) {
    const std::size_t st = g.stride(axis);
    const double h = g.spacing(axis);
    const double p = e.exponents()[axis];
    for (std::size_t lin = 0; lin < x.size(); ++lin) {
      if (!e.has_upper_neighbor(axis, lin)) continue;
      const double delta = t * (s[lin + st] - s[lin]) / h;
      if (delta == 0.0) continue;
      const double d = (x[lin + st] - x[lin]) / h;
      const double a = eps2 + d * d;
      double change;
      if (a == 0.0) {
        change = std::pow(std::abs(delta), p) / p;
      } else {
        const double rel = delta * (2.0 * d + delta) / a;
        change = std::pow(a, 0.5 * p) *
                 std::expm1(0.5 * p * std::log1p(rel)) / p;
      }
      total += static_cast<long double>(e.edge_weight(axis, lin) * change);
    }
  }
  return static_cast<double>(total);
}

// Preconditioned conjugate gradients on the interior subspace for
// H s = b. Stops on relative residual, iteration cap or non-positive
// curvature.
void pcg(const EdgeEnergy& e, std::span<const double> b, std::span<double> x,
         double rel_tol, std::size_t max_it) {
  const std::size_t n = b.size();
  std::vector<double> diag(n);
  e.hessian_diagonal(diag);
  double dmax = 0.0;
  for (double d : diag) dmax = std::max(dmax, d);
  const double floor = dmax > 0.0 ? 1e-14 * dmax : 1.0;
  for (double& d : diag) d = std::max(d, floor);

  std::fill(x.begin(), x.end(), 0.0);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n);
  std::vector<double> p(n);
  std::vector<double> ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = b[i] == 0.0 ? 0.0 : r[i] / diag[i];
  p = z;
  double rz = dot(r, z);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return;
  for (std::size_t it = 0; it < max_it; ++it) {
    e.hessian_apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      if (it == 0) std::copy(z.begin(), z.end(), x.begin());
      return;
    }
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if (std::sqrt(dot(r, r)) <= rel_tol * bnorm) return;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
}

struct NewtonOutcome {
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::vector<double> history;
};

// Damped Newton with conjugate-gradient inner solves and an Armijo line
// search on exactly accumulated energy decrements.
NewtonOutcome newton_minimize(EdgeEnergy& e, std::vector<double>& x,
                              double tol, std::size_t cap, double reference) {
  NewtonOutcome out;
  const std::size_t n = x.size();
  std::vector<double> g(n);
  std::vector<double> s(n);
  std::vector<double> b(n);
  e.gradient(x, g);
  double gnorm = residual_norm(e, g);
  double current = e.value(x);
  out.history.push_back(current);
  const std::size_t cg_cap = std::max<std::size_t>(200, 20 * static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  while (true) {
    if (gnorm <= tol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= cap) break;
    e.linearize(x);
    for (std::size_t i = 0; i < n; ++i) b[i] = -g[i];
    const double forcing =
        std::clamp(std::sqrt(gnorm / std::max(reference, tol)), 1e-12, 0.5);
    pcg(e, b, s, forcing, cg_cap);
    double slope = dot(g, s);
    if (!(slope < 0.0)) {
      std::vector<double> diag(n);
      e.hessian_diagonal(diag);
      double dmax = 0.0;
      for (double d : diag) dmax = std::max(dmax, d);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = -g[i] / std::max(diag[i], dmax > 0.0 ? 1e-14 * dmax : 1.0);
      }
      slope = dot(g, s);
      if (!(slope < 0.0)) break;
    }
    double t = 1.0;
    double change = 0.0;
    bool accepted = false;
    double best_t = 0.0;
    double best_change = 0.0;
    for (int k = 0; k < 60; ++k) {
      change = energy_change(e, x, s, t);
      if (change <= 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      if (change < best_change) {
        best_change = change;
        best_t = t;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (best_t == 0.0) break;
      t = best_t;
      change = best_change;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] += t * s[i];
    current += change;
    out.history.push_back(current);
    ++out.iterations;
    e.gradient(x, g);
    gnorm = residual_norm(e, g);
  }
  out.gradient_norm = gnorm;
  return out;
}

}  // namespace

SolveReport solve_dirichlet(const DirichletProblem& problem) {
  const GridFunction& data = problem.boundary;
  const Grid& grid = data.grid();
  if (problem.exponents.dim() != grid.dim()) {
    throw std::invalid_argument("solve_dirichlet: exponent/grid mismatch");
  }
  if (!(problem.relative_tolerance > 0.0) ||
      !(problem.absolute_tolerance >= 0.0) || problem.max_iterations < 1) {
    throw std::invalid_argument("solve_dirichlet: invalid tolerance or cap");
  }
  const double eps = problem.epsilon.value_or(default_epsilon(data));
  require_regularized(problem.exponents, eps);

  std::vector<double> x(data.values().begin(), data.values().end());
  long double sum = 0.0L;
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.on_boundary(i)) {
      sum += x[i];
      ++count;
    }
  }
  const double mean = static_cast<double>(sum / static_cast<long double>(count));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.on_boundary(i)) x[i] = mean;
  }

  EdgeEnergy e(grid, problem.exponents, eps);
  std::vector<double> g(x.size());
  e.gradient(x, g);
  const double reference = residual_norm(e, g);
  const double tol = std::max(problem.absolute_tolerance,
                              problem.relative_tolerance * reference);

  SolveReport report{GridFunction(grid, x), 0.0, 0.0, 0.0, 0, {}, false};
  report.epsilon = eps;
  report.tolerance = tol;
  if (reference == 0.0) {
    report.converged = true;
    report.energy_history.push_back(e.value(x));
    return report;
  }

  // Warm start from the discrete harmonic extension of the data.
  std::vector<double> harmonic = x;
  {
    EdgeEnergy laplace(grid, ExponentVector(std::vector<double>(grid.dim(), 2.0)),
                       0.0);
    std::vector<double> gl(x.size());
    laplace.gradient(harmonic, gl);
    const double ref_l = residual_norm(laplace, gl);
    newton_minimize(laplace, harmonic, 1e-13 * ref_l, 20, ref_l);
  }
  if (e.value(harmonic) <= e.value(x)) x = std::move(harmonic);

  NewtonOutcome outcome =
      newton_minimize(e, x, tol, problem.max_iterations, reference);
  report.solution = GridFunction(grid, std::move(x));
  report.gradient_norm = outcome.gradient_norm;
  report.iterations = outcome.iterations;
  report.energy_history = std::move(outcome.history);
  report.converged = outcome.converged;
  return report;
}

namespace {

struct IndexBox {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;  // inclusive
};

// Evaluates sum over edges inside `box` of w_e A_i (phi_b - phi_a)/h_i and
// the matching L^1 norm of D phi.
std::pair<double, double> pair_flux(const EdgeEnergy& e, const GridFunction& u,
                                    const std::vector<GridFunction>& du,
                                    const FluxField& flux,
                                    std::span<const double> phi,
                                    const IndexBox& box) {
  const Grid& g = u.grid();
  const std::size_t n = g.dim();
  std::vector<double> x(n);
  std::vector<double> grad(n);
  std::vector<double> a(n);
  long double pairing = 0.0L;
  long double norm = 0.0L;
  std::vector<std::size_t> idx = box.lo;
  while (true) {
    const std::size_t lin = g.linear_index(idx);
    for (std::size_t axis = 0; axis < n; ++axis) {
      if (idx[axis] + 1 >= g.nodes(axis) || idx[axis] + 1 > box.hi[axis]) {
        continue;
      }
      const std::size_t up = lin + g.stride(axis);
      const double dphi = phi[up] - phi[lin];
      if (dphi == 0.0) continue;
      const double h = g.spacing(axis);
      const double w = e.edge_weight(axis, lin);
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = g.coordinate(j, idx[j]);
        grad[j] = 0.5 * (du[j][lin] + du[j][up]);
      }
      x[axis] += 0.5 * h;
      grad[axis] = (u[up] - u[lin]) / h;
      flux.evaluate(x, 0.5 * (u[lin] + u[up]), grad, a);
      pairing += static_cast<long double>(w * a[axis] * dphi / h);
      norm += static_cast<long double>(w * std::abs(dphi) / h);
    }
    std::size_t j = n;
    bool done = true;
    while (j-- > 0) {
      if (++idx[j] <= box.hi[j]) {
        done = false;
        break;
      }
      idx[j] = box.lo[j];
    }
    if (done) break;
  }
  return {static_cast<double>(pairing), static_cast<double>(norm)};
}

}  // namespace

double weak_residual(const GridFunction& u, const FluxField& flux,
                     std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("weak_residual: trials >= 1");
  const Grid& g = u.grid();
  const std::size_t n = g.dim();
  if (flux.exponents.dim() != n) {
    throw std::invalid_argument("weak_residual: flux/grid dimension mismatch");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (g.nodes(j) < 3) return 0.0;  // no interior node, no test function
  }
  EdgeEnergy e(g, flux.exponents, 0.0);
  std::vector<GridFunction> du;
  for (std::size_t j = 0; j < n; ++j) du.push_back(partial_difference(u, j));

  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::vector<double> phi(g.size(), 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    std::fill(phi.begin(), phi.end(), 0.0);
    IndexBox box{std::vector<std::size_t>(n), std::vector<std::size_t>(n)};
    if (t % 2 == 0) {
      std::vector<std::size_t> node(n);
      for (std::size_t j = 0; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> pick(1, g.nodes(j) - 2);
        node[j] = pick(rng);
        box.lo[j] = node[j] - 1;
        box.hi[j] = node[j] + 1;
      }
      phi[g.linear_index(node)] = 1.0;
    } else {
      // cos^2 bump with random center and radii, support inside the box.
      std::vector<double> c(n);
      std::vector<double> r(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double h = g.spacing(j);
        const double lo = g.box().lo(j);
        const double hi = g.box().hi(j);
        const double min_r = 2.0 * h;
        std::uniform_real_distribution<double> cdist(lo + min_r, hi - min_r);
        c[j] = cdist(rng);
        const double max_r = std::max(min_r, std::min(c[j] - lo, hi - c[j]));
        std::uniform_real_distribution<double> rdist(min_r, max_r);
        r[j] = rdist(rng);
        const double a = std::max(0.0, std::floor((c[j] - r[j] - lo) / h));
        const double b = std::min(static_cast<double>(g.nodes(j) - 1),
                                  std::ceil((c[j] + r[j] - lo) / h));
        box.lo[j] = static_cast<std::size_t>(a);
        box.hi[j] = static_cast<std::size_t>(b);
      }
      std::vector<std::size_t> idx = box.lo;
      while (true) {
        const std::size_t lin = g.linear_index(idx);
        if (!g.on_boundary(lin)) {
          double v = 1.0;
          for (std::size_t j = 0; j < n && v != 0.0; ++j) {
            const double z = (g.coordinate(j, idx[j]) - c[j]) / r[j];
            if (std::abs(z) >= 1.0) {
              v = 0.0;
            } else {
              const double cz = std::cos(0.5 * M_PI * z);
              v *= cz * cz;
            }
          }
          phi[lin] = v;
        }
        std::size_t j = n;
        bool done = true;
        while (j-- > 0) {
          if (++idx[j] <= box.hi[j]) {
            done = false;
            break;
          }
          idx[j] = box.lo[j];
        }
        if (done) break;
      }
    }
    const auto [pairing, norm] = pair_flux(e, u, du, flux, phi, box);
    if (norm > 0.0) worst = std::max(worst, std::abs(pairing) / norm);
  }
  return worst;
}

InequalityReport structure_check(const FluxField& flux, std::size_t samples,
                                 std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("structure_check: samples >= 1");
  const std::size_t n = flux.exponents.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> log_mag(-3.0, 3.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> x(n);
  std::vector<double> g(n);
  std::vector<double> a(n);
  double worst_coercive = std::numeric_limits<double>::infinity();
  double worst_growth = std::numeric_limits<double>::infinity();
  double lhs_at_worst = 0.0;
  double rhs_at_worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = unit(rng);
      g[j] = std::pow(10.0, log_mag(rng)) * (coin(rng) ? 1.0 : -1.0);
    }
    const double u = unit(rng);
    flux.evaluate(x, u, g, a);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = flux.exponents[i];
      const double mag = std::abs(g[i]);
      const double floor_term = flux.c0[i] * std::pow(mag, p);
      const double coercive = (a[i] * g[i] - floor_term) / floor_term;
      const double cap_term = flux.c1[i] * std::pow(mag, p - 1.0);
      const double growth = (cap_term - std::abs(a[i])) / cap_term;
      if (coercive < worst_coercive) {
        worst_coercive = coercive;
        lhs_at_worst = a[i] * g[i];
        rhs_at_worst = floor_term;
      }
      worst_growth = std::min(worst_growth, growth);
    }
  }
  InequalityReport r;
  r.check_name = "structure";
  r.anchor = "structure-conditions";
  r.seed = seed;
  r.lhs = lhs_at_worst;
  r.rhs = rhs_at_worst;
  r.ratio = rhs_at_worst > 0.0 ? lhs_at_worst / rhs_at_worst
                               : std::numeric_limits<double>::quiet_NaN();
  r.details["worst_coercivity_margin"] = worst_coercive;
  r.details["worst_growth_margin"] = worst_growth;
  r.details["samples"] = samples;
  constexpr double kRoundoff = 1e-12;
  r.state = (worst_coercive >= -kRoundoff && worst_growth >= -kRoundoff)
                ? CheckState::kPass
                : CheckState::kFail;
  return r;
}

}  // namespace anisolab
