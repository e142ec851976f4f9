#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "anisolab/solver.h"
#include "corpus.h"

namespace anisolab {
namespace {

using testing::Gen;
using testing::unit_grid;

GridFunction affine(const Grid& g, const std::vector<double>& c, double b) {
  return GridFunction::sample(g, [&](const Point& x) {
    double v = b;
    for (std::size_t j = 0; j < x.size(); ++j) v += c[j] * x[j];
    return v;
  });
}

Grid unit_cube(std::size_t dim, std::size_t nodes) {
  return Grid(Box(Point(dim, 0.5), std::vector<double>(dim, 0.5)),
              std::vector<std::size_t>(dim, nodes));
}

TEST(Energy, Examples) {
  const Grid g = unit_cube(2, 9);
  EXPECT_EQ(energy(GridFunction(g, 3.0), ExponentVector{2.0, 2.0}, 0.0), 0.0);
  EXPECT_NEAR(energy(affine(g, {1.0, 0.0}, 0.0), ExponentVector{2.0, 2.0}, 0.0),
              0.5, 1e-14);
  const double c = -1.7;
  const Grid box(Box(Point{0.0, 0.0}, {1.0, 0.5}), {7, 5});
  EXPECT_NEAR(energy(affine(box, {c, 0.0}, 0.0), ExponentVector{3.0, 2.0}, 0.0),
              std::pow(std::abs(c), 3) / 3.0 * box.box().volume(), 1e-12);
}

TEST(EnergyGradient, AffineIsStationary) {
  const Grid g = unit_grid(2, 9);
  const GridFunction u = affine(g, {0.3, -1.2}, 0.4);
  const GridFunction grad = energy_gradient(u, ExponentVector{2.5, 4.0}, 0.0);
  for (double v : grad.values()) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(EnergyGradient, QuadraticGivesLaplacian) {
  const Grid g = unit_grid(2, 11);
  const GridFunction u = GridFunction::sample(
      g, [](const Point& x) { return x[0] * x[0] + 3.0 * x[1] * x[1]; });
  const GridFunction grad = energy_gradient(u, ExponentVector{2.0, 2.0}, 0.0);
  const EdgeEnergy e(g, ExponentVector{2.0, 2.0}, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.on_boundary(i)) {
      EXPECT_EQ(grad[i], 0.0);
    } else {
      EXPECT_NEAR(grad[i] / e.mass()[i], -8.0, 1e-9);
    }
  }
}

TEST(EnergyGradient, RejectsSingularWithoutRegularization) {
  const Grid g = unit_grid(2, 5);
  EXPECT_THROW(energy_gradient(GridFunction(g, 0.0), ExponentVector{1.5, 2.0}, 0.0),
               std::invalid_argument);
}

TEST(EnergyGradientProperty, MatchesCentralDifferences) {
  Gen gen(401);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid g = unit_grid(2, 5 + gen.index(6));
    const ExponentVector p = gen.exponents(2, 1.3, 4.0);
    const double eps = 0.1;
    const GridFunction u = gen.smooth_field(g);
    const GridFunction grad = energy_gradient(u, p, eps);
    std::vector<double> v(u.values().begin(), u.values().end());
    const double delta = 1e-5;
    for (int k = 0; k < 5; ++k) {
      std::size_t i = gen.index(g.size());
      while (g.on_boundary(i)) i = gen.index(g.size());
      const double keep = v[i];
      v[i] = keep + delta;
      const double ep = energy(u.with_values(v), p, eps);
      v[i] = keep - delta;
      const double em = energy(u.with_values(v), p, eps);
      v[i] = keep;
      const double fd = (ep - em) / (2 * delta);
      EXPECT_NEAR(grad[i], fd, 1e-6 * std::max(std::abs(fd), 1e-3));
    }
  }
}

TEST(Solve, AffineDataIsExact) {
  const Grid g = unit_grid(2, 17);
  const GridFunction data = affine(g, {0.7, -0.3}, 0.2);
  DirichletProblem prob{data, ExponentVector{2.0, 3.5}, 0.0, 1e-12, 0.0, 1000};
  const SolveReport r = solve_dirichlet(prob);
  ASSERT_TRUE(r.converged);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(r.solution[i], data[i], 1e-8);
  }
}

TEST(Solve, OneDimensionalIsLinear) {
  for (double p : {1.3, 2.0, 3.0, 6.0}) {
    const Grid g(Box(Point{0.5}, {0.5}), {33});
    const GridFunction data =
        GridFunction::sample(g, [](const Point& x) { return x[0] > 0.5 ? 1.0 : 0.0; });
    DirichletProblem prob{data, ExponentVector{p}, std::nullopt};
    const SolveReport r = solve_dirichlet(prob);
    ASSERT_TRUE(r.converged) << p;
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_NEAR(r.solution[i], g.node(i)[0], 1e-6) << p;
    }
  }
}

TEST(Solve, HarmonicPolynomialSecondOrder) {
  double last = 0.0;
  for (std::size_t n : {17u, 33u}) {
    const Grid g = unit_grid(2, n);
    const GridFunction exact = GridFunction::sample(
        g, [](const Point& x) { return x[0] * x[0] - x[1] * x[1]; });
    DirichletProblem prob{exact, ExponentVector{2.0, 2.0}, 0.0};
    const SolveReport r = solve_dirichlet(prob);
    ASSERT_TRUE(r.converged);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(r.solution[i] - exact[i]));
    }
    // The five-point stencil is exact on quadratics.
    EXPECT_LT(err, 1e-8);
    last = err;
  }
  EXPECT_LT(last, 1e-8);
}

TEST(Solve, EnergyHistoryNonincreasing) {
  const SolveReport& r = testing::solved(testing::corpus_instance("p15"));
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.gradient_norm, r.tolerance);
  for (std::size_t i = 1; i < r.energy_history.size(); ++i) {
    EXPECT_LE(r.energy_history[i], r.energy_history[i - 1]);
  }
}

TEST(Solve, IterationCapFlagsPartialResult) {
  const Grid g = unit_grid(2, 33);
  const GridFunction data = GridFunction::sample(
      g, [](const Point& x) { return std::sin(3 * x[0]) * x[1]; });
  DirichletProblem prob{data, ExponentVector{1.5, 3.0}, std::nullopt, 1e-12,
                        0.0, 2};
  const SolveReport r = solve_dirichlet(prob);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_GT(r.gradient_norm, r.tolerance);
}

TEST(WeakResidual, AffineVanishes) {
  const Grid g = unit_grid(2, 17);
  const ExponentVector p{2.0, 3.0};
  const GridFunction u = affine(g, {0.4, -0.9}, 0.1);
  EXPECT_LE(weak_residual(u, FluxField::prototype(p), 100), 1e-10);
}

TEST(WeakResidual, SolutionSmallPerturbationLarge) {
  const auto& inst = testing::corpus_instance("p19");
  const SolveReport& r = testing::solved(inst);
  const FluxField flux = FluxField::prototype(inst.p(), r.epsilon);
  const double base = weak_residual(r.solution, flux, 200);
  EXPECT_LE(base, 10.0 * r.tolerance);

  const Grid& g = r.solution.grid();
  const GridFunction bumped = GridFunction::sample(g, [&](const Point& x) {
    const double s = std::max(0.0, 1.0 - (x[0] * x[0] + x[1] * x[1]) / 0.25);
    return 0.1 * s * s;
  });
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = r.solution[i] + bumped[i];
  const double perturbed = weak_residual(r.solution.with_values(v), flux, 200);
  EXPECT_GE(perturbed, 100.0 * base);
}

TEST(StructureCheck, Examples) {
  const ExponentVector p{1.5, 3.0};
  const InequalityReport proto = structure_check(FluxField::prototype(p), 2000);
  EXPECT_EQ(proto.state, CheckState::kPass);
  EXPECT_NEAR(proto.details["worst_coercivity_margin"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(proto.details["worst_growth_margin"].get<double>(), 0.0, 1e-12);

  const FluxField doubled = FluxField::prototype(p).scaled(2.0, {1.0, 1.0}, {2.0, 2.0});
  EXPECT_EQ(structure_check(doubled, 2000).state, CheckState::kPass);

  const FluxField inflated =
      FluxField::prototype(p).scaled(1.0, {1.5, 1.5}, {1.0, 1.0});
  const InequalityReport bad = structure_check(inflated, 2000);
  EXPECT_EQ(bad.state, CheckState::kFail);
  EXPECT_LT(bad.details["worst_coercivity_margin"].get<double>(), 0.0);
}

TEST(SolverProperty, ConvexityCertificate) {
  Gen gen(402);
  const Grid g = unit_grid(2, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const ExponentVector p = gen.exponents(2, 1.1, 4.0);
    const double eps = gen.log_uniform(1e-4, 1.0);
    const GridFunction u = gen.noise_field(g, -1.0, 1.0);
    GridFunction v = gen.noise_field(g, -1.0, 1.0);
    std::vector<double> vv(v.values().begin(), v.values().end());
    std::vector<double> mid(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.on_boundary(i)) vv[i] = u[i];
      mid[i] = 0.5 * (u[i] + vv[i]);
    }
    v = v.with_values(vv);
    const double em = energy(u.with_values(mid), p, eps);
    EXPECT_LE(em, 0.5 * (energy(u, p, eps) + energy(v, p, eps)) + 1e-12);
  }
}

TEST(SolverProperty, MaximumPrinciple) {
  Gen gen(403);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid g = unit_grid(2, 17);
    const ExponentVector p = gen.exponents(2, 2.0, 4.0);
    const GridFunction data = gen.smooth_field(g);
    DirichletProblem prob{data, p, 0.0};
    const SolveReport r = solve_dirichlet(prob);
    ASSERT_TRUE(r.converged);
    double bmax = -1e300, bmin = 1e300;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.on_boundary(i)) continue;
      bmax = std::max(bmax, data[i]);
      bmin = std::min(bmin, data[i]);
    }
    EXPECT_LE(r.solution.max(), bmax + 1e-8);
    EXPECT_GE(r.solution.min(), bmin - 1e-8);
  }
}

TEST(SolverProperty, ConstantShiftInvariance) {
  Gen gen(404);
  for (int trial = 0; trial < 5; ++trial) {
    const Grid g = unit_grid(2, 17);
    const ExponentVector p = gen.exponents(2, 2.0, 3.5);
    const GridFunction data = gen.smooth_field(g);
    const double c = gen.uniform(-3.0, 3.0);
    DirichletProblem a{data, p, 0.0, 1e-12};
    DirichletProblem b{data.map([&](double v) { return v + c; }), p, 0.0, 1e-12};
    const SolveReport ra = solve_dirichlet(a);
    const SolveReport rb = solve_dirichlet(b);
    ASSERT_TRUE(ra.converged && rb.converged);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_NEAR(rb.solution[i] - ra.solution[i], c, 1e-10);
    }
  }
}

TEST(SolverProperty, IsotropicScaling) {
  Gen gen(405);
  for (double pp : {2.0, 3.0}) {
    const Grid g = unit_grid(2, 17);
    const ExponentVector p{pp, pp};
    const GridFunction data = gen.smooth_field(g);
    const double lambda = gen.uniform(0.2, 5.0);
    DirichletProblem a{data, p, 0.0, 1e-12};
    DirichletProblem b{data.map([&](double v) { return lambda * v; }), p, 0.0,
                       1e-12};
    const SolveReport ra = solve_dirichlet(a);
    const SolveReport rb = solve_dirichlet(b);
    ASSERT_TRUE(ra.converged && rb.converged);
    const double scale = std::max(1.0, lambda * ra.solution.sup_abs());
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_NEAR(rb.solution[i], lambda * ra.solution[i], 1e-7 * scale);
    }
  }
}

}  // namespace
}  // namespace anisolab
