#ifndef ANISOLAB_SOLVER_H_
#define ANISOLAB_SOLVER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "anisolab/exponents.h"
#include "anisolab/lattice.h"
#include "anisolab/report.h"

namespace anisolab {

// A(x, u, Du) together with the constants it is declared to satisfy:
//   A_i g_i >= C0_i |g_i|^{p_i},   |A_i| <= C1_i |g_i|^{p_i - 1}.
// The declaration is checked by structure_check, never assumed.
struct FluxField {
  using Evaluator =
      std::function<void(std::span<const double> x, double u,
                         std::span<const double> g, std::span<double> a)>;

  FluxField(Evaluator evaluate, std::vector<double> c0, std::vector<double> c1,
            ExponentVector exponents);

  // A_i = (eps^2 + g_i^2)^{(p_i - 2)/2} g_i with C0 = C1 = 1.
  static FluxField prototype(const ExponentVector& p, double epsilon = 0.0);

  // factor * A with new declared constants.
  FluxField scaled(double factor, std::vector<double> c0,
                   std::vector<double> c1) const;

  Evaluator evaluate;
  std::vector<double> c0;
  std::vector<double> c1;
  ExponentVector exponents;
};

// Discrete anisotropic energy on a grid. Each edge along axis i carries
// the difference quotient d = (u_b - u_a)/h_i and the weight
// h_i * prod_{j != i} t_j, where t_j are trapezoid weights; this is the
// per-cell one-sided difference averaged over cell corners. The energy is
//   sum_i sum_{edges along i} w_e (1/p_i) (eps^2 + d^2)^{p_i/2}.
class EdgeEnergy {
 public:
  EdgeEnergy(const Grid& grid, ExponentVector p, double epsilon);

  const Grid& grid() const { return grid_; }
  const ExponentVector& exponents() const { return p_; }
  double epsilon() const { return epsilon_; }

  double value(std::span<const double> u) const;
  // Derivative with respect to every node value; zero at boundary nodes.
  void gradient(std::span<const double> u, std::span<double> out) const;
  // Lumped nodal mass prod_j t_j.
  std::span<const double> mass() const { return mass_; }

  // Caches w_e F''(d_e) / h_i^2 for every edge at state u.
  void linearize(std::span<const double> u);
  // Hessian at the linearized state applied to v; zero on boundary nodes.
  void hessian_apply(std::span<const double> v, std::span<double> out) const;
  void hessian_diagonal(std::span<double> out) const;

  double edge_weight(std::size_t axis, std::size_t lower_node) const;
  bool has_upper_neighbor(std::size_t axis, std::size_t node) const;

 private:
  double flux_derivative(std::size_t axis, double d) const;
  double flux_second_derivative(std::size_t axis, double d) const;
  double integrand(std::size_t axis, double d) const;

  Grid grid_;
  ExponentVector p_;
  double epsilon_;
  std::vector<double> mass_;
  std::vector<unsigned char> boundary_;
  std::vector<std::vector<double>> curvature_;
};

double energy(const GridFunction& u, const ExponentVector& p, double epsilon);

// Throws std::invalid_argument when epsilon == 0 and some p_i < 2.
GridFunction energy_gradient(const GridFunction& u, const ExponentVector& p,
                             double epsilon);

struct DirichletProblem {
  // Values on boundary nodes are the Dirichlet data; interior values are
  // ignored.
  GridFunction boundary;
  ExponentVector exponents;
  // Defaults to 1e-8 times the oscillation of the boundary data when unset.
  std::optional<double> epsilon;
  // Stop when the mass-normalized gradient sup-norm drops below
  // max(absolute_tolerance, relative_tolerance * reference), where the
  // reference is that norm at the interior-filled-with-boundary-mean state.
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 0.0;
  std::size_t max_iterations = 100000;
};

struct SolveReport {
  GridFunction solution;
  double gradient_norm = 0.0;
  double tolerance = 0.0;
  double epsilon = 0.0;
  std::size_t iterations = 0;
  std::vector<double> energy_history;
  bool converged = false;
};

double default_epsilon(const GridFunction& boundary);

SolveReport solve_dirichlet(const DirichletProblem& problem);

// Max over a seeded family of compactly supported test functions (hat
// functions at interior nodes and smooth cos^2 bumps) of
// |int A(x,u,Du) . D phi| / ||D phi||_{L^1}, evaluated with the same edge
// quadrature as the energy.
double weak_residual(const GridFunction& u, const FluxField& flux,
                     std::size_t trials, std::uint64_t seed = 20240601);

// Samples (x, u, g) and reports the worst relative margins of the declared
// coercivity and growth bounds.
InequalityReport structure_check(const FluxField& flux, std::size_t samples,
                                 std::uint64_t seed = 20240602);

}  // namespace anisolab

#endif  // ANISOLAB_SOLVER_H_
