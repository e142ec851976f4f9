#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "anisolab/degiorgi.h"
#include "corpus.h"

namespace anisolab {
namespace {

using testing::Gen;
using testing::corpus;
using testing::corpus_instance;
using testing::solved;
using testing::unit_grid;

GridFunction from_expr(const Grid& g, double (*f)(const Point&)) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.node(i));
  return GridFunction(g, std::move(v));
}

double affine2(const Point& x) { return 0.7 * x[0] - 0.3 * x[1] + 0.2; }
double linear1(const Point& x) { return x[0]; }

InequalityReport cacc(const GridFunction& u, double k, Sign side, double sigma,
                      const ExponentVector& p, const Box& outer) {
  return caccioppoli_report(u, CaccioppoliConfig{k, side, outer, sigma, p});
}

// Caccioppoli

TEST(Caccioppoli, LevelAboveMaxIsDegenerate) {
  const Grid g = unit_grid(2, 33);
  const GridFunction u = from_expr(g, affine2);
  const Box q = Box::cube(Point{0.0, 0.0}, 0.5);
  const InequalityReport r =
      cacc(u, u.max() + 0.1, Sign::kPlus, 0.5, ExponentVector{2.0, 2.0}, q);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_EQ(r.state, CheckState::kDegenerate);
}

TEST(Caccioppoli, AffineRatioStableUnderRefinement) {
  const ExponentVector p{2.0, 2.0};
  const Box q = Box::cube(Point{0.0, 0.0}, 0.5);
  const Grid coarse = unit_grid(2, 33);
  const Grid fine = unit_grid(2, 65);
  const GridFunction uc = from_expr(coarse, affine2);
  const GridFunction uf = from_expr(fine, affine2);
  const double k = 0.2;  // mean of the affine field over the centred box
  const double rc = cacc(uc, k, Sign::kPlus, 0.5, p, q).ratio;
  const double rf = cacc(uf, k, Sign::kPlus, 0.5, p, q).ratio;
  ASSERT_TRUE(std::isfinite(rc));
  ASSERT_TRUE(std::isfinite(rf));
  EXPECT_GT(rc, 0.0);
  EXPECT_LT(std::max(rc, rf) / std::min(rc, rf), 2.0);
}

TEST(Caccioppoli, TranslationInvariantExactly) {
  Gen gen(301);
  const Grid g = unit_grid(2, 33);
  const ExponentVector p{1.5, 2.5};
  const Box q = Box::cube(Point{0.1, -0.1}, 0.6);
  for (int trial = 0; trial < 20; ++trial) {
    const GridFunction u = gen.smooth_field(g);
    // Power-of-two shifts keep the truncation bitwise identical.
    const double c = std::ldexp(1.0, static_cast<int>(gen.index(6)) - 2);
    const GridFunction shifted = u.map([c](double v) { return v + c; });
    const double k = gen.uniform(u.min(), u.max());
    for (Sign side : {Sign::kPlus, Sign::kMinus}) {
      const InequalityReport a = cacc(u, k, side, 0.5, p, q);
      const InequalityReport b = cacc(shifted, k + c, side, 0.5, p, q);
      EXPECT_NEAR(a.lhs, b.lhs, 1e-13 * std::max(1.0, a.lhs));
      EXPECT_NEAR(a.rhs, b.rhs, 1e-13 * std::max(1.0, a.rhs));
    }
  }
}

TEST(Caccioppoli, DilationInvariantForIsotropicExponents) {
  Gen gen(302);
  const ExponentVector p{2.0, 2.0};
  for (double lambda : {0.5, 2.0, 3.0}) {
    const Grid g = unit_grid(2, 33);
    const Grid gl = unit_grid(2, 33, lambda);
    const GridFunction u = gen.smooth_field(g);
    const GridFunction ul(gl, std::vector<double>(u.values().begin(),
                                                  u.values().end()));
    const Box q = Box::cube(Point{0.0, 0.0}, 0.5);
    const Box ql = Box::cube(Point{0.0, 0.0}, 0.5 * lambda);
    const double k = 0.5 * (u.min() + u.max());
    const double a = cacc(u, k, Sign::kPlus, 0.5, p, q).ratio;
    const double b = cacc(ul, k, Sign::kPlus, 0.5, p, ql).ratio;
    EXPECT_NEAR(a, b, 1e-9 * a) << "lambda " << lambda;
  }
}

TEST(Caccioppoli, RejectsSigmaOutsideUnitInterval) {
  const Grid g = unit_grid(2, 17);
  const GridFunction u = from_expr(g, affine2);
  const Box q = Box::cube(Point{0.0, 0.0}, 0.5);
  const ExponentVector p{2.0, 2.0};
  EXPECT_THROW(cacc(u, 0.0, Sign::kPlus, 1.0, p, q), std::invalid_argument);
  EXPECT_THROW(cacc(u, 0.0, Sign::kPlus, 0.0, p, q), std::invalid_argument);
}

TEST(Caccioppoli, CorpusRatiosFinite) {
  for (const auto& inst : corpus()) {
    if (inst.dim() != 2) continue;
    const GridFunction& u = solved(inst).solution;
    const Box q = Box::cube(Point{0.0, 0.0}, 0.5);
    const double k = 0.5 * (u.min() + u.max());
    for (Sign side : {Sign::kPlus, Sign::kMinus}) {
      const InequalityReport r = cacc(u, k, side, 0.5, inst.p(), q);
      EXPECT_NE(r.state, CheckState::kFail) << inst.name;
    }
  }
}

// Intrinsic geometry and specialized energy

TEST(ResolveGeometry, NormalizesOscillationToOne) {
  const GridFunction& u = solved(corpus_instance("p15")).solution;
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  const ResolvedGeometry rg = resolve_geometry(u, ExponentVector{1.5, 2.0}, geom);
  ASSERT_FALSE(rg.degenerate());
  EXPECT_EQ(rg.omega, 1.0);
  EXPECT_NEAR(rg.mu_plus - rg.mu_minus, 1.0, 1e-15);
  // rho_j = 2^{-q} rho^{alpha/p_j}, alpha = pmax
  EXPECT_NEAR(rg.radii[0], 0.5 * std::pow(0.25, 2.0 / 1.5), 1e-15);
  EXPECT_NEAR(rg.radii[1], 0.5 * 0.25, 1e-15);
}

TEST(ResolveGeometry, OuterCubeMustFit) {
  const Grid g = unit_grid(2, 17);
  const GridFunction u = from_expr(g, affine2);
  IntrinsicGeometry geom;
  geom.center = Point{0.7, 0.0};
  geom.rho = 0.25;
  EXPECT_THROW(resolve_geometry(u, ExponentVector{2.0, 2.0}, geom),
               std::out_of_range);
}

TEST(SpecializedEnergy, ConstantIsDegenerate) {
  const Grid g = unit_grid(2, 17);
  const GridFunction u(g, 3.0);
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  const InequalityReport r =
      specialized_energy_report(u, ExponentVector{1.5, 2.0}, geom, 1);
  EXPECT_EQ(r.state, CheckState::kDegenerate);
}

TEST(SpecializedEnergy, AnisotropicGammaFiniteAndStable) {
  const auto& inst = corpus_instance("p19");
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.2};
  geom.q = 2;
  // Q_rho spans only a few cells at 65^2, so compare the two finer levels.
  std::vector<double> gammas;
  for (int level : {1, 2}) {
    const GridFunction& u = solved(inst, level).solution;
    const InequalityReport r = specialized_energy_report(u, inst.p(), geom, 1);
    ASSERT_EQ(r.state, CheckState::kPass);
    ASSERT_TRUE(std::isfinite(r.ratio));
    EXPECT_GT(r.ratio, 0.0);
    gammas.push_back(r.ratio);
  }
  EXPECT_LT(std::max(gammas[0], gammas[1]) / std::min(gammas[0], gammas[1]),
            2.0);
}

TEST(SpecializedEnergy, MeasureAtLevelMatchesLevelSetMeasure) {
  for (const char* name : {"p15", "p23_saddle", "iso"}) {
    const auto& inst = corpus_instance(name);
    const GridFunction& u = solved(inst).solution;
    for (int q : {1, 2, 3}) {
      IntrinsicGeometry geom;
      geom.center = Point{0.1, -0.1};
      geom.q = q;
      const ResolvedGeometry rg = resolve_geometry(u, inst.p(), geom);
      ASSERT_FALSE(rg.degenerate());
      const GridFunction un = u.map([&](double v) { return v * rg.scale; });
      const double direct =
          level_set_measure(un, rg.mu_plus - std::ldexp(1.0, -q),
                            Direction::kAbove, *rg.cylinder);
      const InequalityReport r =
          specialized_energy_report(u, inst.p(), geom, q);
      EXPECT_EQ(r.details.at("level_set_measure").get<double>(), direct);
    }
  }
}

// Fast geometric convergence

TEST(FastConvergence, Thresholds) {
  EXPECT_NEAR(fast_convergence_threshold(RecursionParams(2.0, 2.0, 1.0)), 0.25,
              1e-15);
  EXPECT_NEAR(fast_convergence_threshold(RecursionParams(1.0, 1.0, 0.37)), 1.0,
              1e-15);
  EXPECT_NEAR(fast_convergence_threshold(RecursionParams(10.0, 4.0, 0.5)),
              1e-2 * std::pow(4.0, -4.0), 1e-17);
  EXPECT_THROW(RecursionParams(0.0, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(RecursionParams(1.0, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(RecursionParams(1.0, 2.0, 0.0), std::invalid_argument);
}

// Index of the first orbit value below tol, or -1.
int first_below(const RecursionTrace& t, double tol) {
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    if (t.values[i] < tol) return static_cast<int>(i);
  }
  return -1;
}

TEST(IterateRecursion, ZeroStaysZero) {
  const RecursionTrace t = iterate_recursion(RecursionParams(5.0, 3.0, 0.5), 0.0, 30);
  ASSERT_EQ(t.values.size(), 31u);
  for (double y : t.values) EXPECT_EQ(y, 0.0);
  EXPECT_FALSE(t.diverged);
}

TEST(IterateRecursion, StartAtThresholdDecays) {
  const RecursionParams prm(2.0, 2.0, 1.0);
  const double nu = fast_convergence_threshold(prm);
  const RecursionTrace t = iterate_recursion(prm, nu, 100);
  const int hit = first_below(t, 1e-6);
  ASSERT_GE(hit, 0);
  EXPECT_LE(hit, 100);
  for (int i = 1; i <= hit; ++i) EXPECT_LT(t.values[i], t.values[i - 1]);
}

TEST(IterateRecursion, UnitBoundaryCase) {
  const RecursionParams prm(1.0, 1.0, 0.5);
  const RecursionTrace t = iterate_recursion(prm, 1.0 - 1e-6, 200);
  EXPECT_GE(first_below(t, 1e-6), 0);
}

TEST(IterateRecursion, TenFourHalfConfirmsDecay) {
  const RecursionParams prm(10.0, 4.0, 0.5);
  const double nu = fast_convergence_threshold(prm);
  EXPECT_GE(first_below(iterate_recursion(prm, nu * (1 - 1e-3), 200), 1e-6), 0);
}

TEST(IterateRecursion, LargeStartDiverges) {
  const RecursionTrace t = iterate_recursion(RecursionParams(2.0, 2.0, 1.0), 1.0, 100);
  EXPECT_TRUE(t.diverged);
  EXPECT_LT(t.values.size(), 101u);
  EXPECT_THROW(iterate_recursion(RecursionParams(2.0, 2.0, 1.0), -1.0, 3),
               std::invalid_argument);
}

TEST(IterateRecursionProperty, BelowThresholdConvergesAboveDiverges) {
  Gen gen(303);
  for (int trial = 0; trial < 100; ++trial) {
    const RecursionParams prm(gen.uniform(1.0, 10.0), gen.uniform(1.0, 8.0),
                              gen.uniform(0.2, 2.0));
    const double nu = fast_convergence_threshold(prm);
    ASSERT_GT(nu, 0.0);
    const RecursionTrace below = iterate_recursion(prm, nu * (1 - 1e-3), 200);
    const int hit = first_below(below, 1e-6);
    EXPECT_GE(hit, 0) << "C=" << prm.C << " B=" << prm.B << " d=" << prm.delta;
    for (int i = 2; i <= hit; ++i) {
      EXPECT_LE(below.values[i], below.values[i - 1]);
    }
    // Brute force from the other side: the orbit escapes.
    const RecursionTrace above = iterate_recursion(prm, nu * (1 + 1e-3), 2000);
    EXPECT_TRUE(above.diverged) << "C=" << prm.C << " B=" << prm.B;
  }
}

// Lemma check

TEST(LemmaCheck, ConstantIsDegenerate) {
  const Grid g = unit_grid(2, 17);
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  for (Sign side : {Sign::kPlus, Sign::kMinus}) {
    const InequalityReport r = degiorgi_lemma_check(
        GridFunction(g, -2.0), ExponentVector{2.0, 3.0}, side, geom);
    EXPECT_EQ(r.state, CheckState::kDegenerate);
  }
}

TEST(LemmaCheck, ConstantFieldAtHalfStepDiagnostic) {
  // u equals mu+ - omega/2^{q+1} everywhere.
  const Grid g = unit_grid(2, 33);
  const double c = 0.3;
  const double omega = 0.8;
  for (int q : {1, 2, 3}) {
    IntrinsicGeometry geom;
    geom.center = Point{0.0, 0.0};
    geom.q = q;
    geom.levels = std::make_pair(c + std::ldexp(omega, -(q + 1)), omega);
    const GridFunction u(g, c);
    const ExponentVector p{1.8, 2.0};
    const InequalityReport minus = degiorgi_lemma_check(u, p, Sign::kMinus, geom);
    EXPECT_EQ(minus.lhs, 0.0);
    EXPECT_EQ(minus.state, CheckState::kPass);
    EXPECT_TRUE(minus.details.at("conclusion_holds").get<bool>());
    // On the plus side every node sits above mu+ - omega/2^q, so the
    // hypothesis measure is all of Q; whether it is verified depends on nu.
    const InequalityReport plus = degiorgi_lemma_check(u, p, Sign::kPlus, geom);
    EXPECT_NEAR(plus.lhs, plus.details.at("cylinder_measure").get<double>(),
                1e-15);
    EXPECT_TRUE(plus.details.at("conclusion_holds").get<bool>());
    EXPECT_NE(plus.state, CheckState::kFail);
  }
}

TEST(LemmaCheck, AffineNeverCounterexample) {
  const Grid g = unit_grid(2, 65);
  const GridFunction u = from_expr(g, affine2);
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  geom.q = 1;
  for (Sign side : {Sign::kPlus, Sign::kMinus}) {
    const InequalityReport r =
        degiorgi_lemma_check(u, ExponentVector{2.0, 2.0}, side, geom);
    EXPECT_TRUE(r.state == CheckState::kPass ||
                r.state == CheckState::kHypothesisNotMet);
  }
}

TEST(LemmaCheck, NoCounterexampleOnCorpus) {
  int evaluated = 0;
  int hypothesis = 0;
  for (const auto& inst : corpus()) {
    const GridFunction& u = solved(inst).solution;
    const std::size_t n = inst.dim();
    std::vector<Point> centers{Point(n, 0.0), Point(n, 0.3), Point(n, -0.35)};
    centers.back()[0] = 0.4;
    for (const Point& c : centers) {
      for (double rho : {0.1, 0.25}) {
        for (int q : {1, 2, 3, 4}) {
          IntrinsicGeometry geom;
          geom.center = c;
          geom.rho = rho;
          geom.q = q;
          for (Sign side : {Sign::kPlus, Sign::kMinus}) {
            const InequalityReport r =
                degiorgi_lemma_check(u, inst.p(), side, geom);
            ++evaluated;
            if (r.state == CheckState::kDegenerate) continue;
            const bool h = r.details.at("hypothesis_holds").get<bool>();
            const bool k = r.details.at("conclusion_holds").get<bool>();
            hypothesis += h;
            EXPECT_FALSE(h && !k) << inst.name << " rho " << rho << " q " << q;
            EXPECT_NE(r.state, CheckState::kFail);
          }
        }
      }
    }
  }
  RecordProperty("evaluated", evaluated);
  RecordProperty("hypothesis_verified", hypothesis);
  EXPECT_GT(evaluated, 0);
}

// Measure-shrinking machinery

TEST(BuildVs, Examples) {
  const Grid g = unit_grid(1, 201);
  const double mu = 1.0;
  const double omega = 2.0;
  const int s = 2;  // thresholds 0.5 and 0.75, cap 0.25
  const GridFunction low(g, 0.5);
  const GridFunction v_low = build_vs(low, mu, omega, s);
  for (double v : v_low.values()) EXPECT_EQ(v, 0.0);
  const GridFunction high(g, 0.75);
  const GridFunction v_high = build_vs(high, mu, omega, s);
  for (double v : v_high.values()) EXPECT_EQ(v, 0.25);

  // u = x on (-1,1): v = clamp(x - 0.5, 0, 0.25); integral 0.25^2/2 + 0.25*0.25
  const GridFunction u = from_expr(g, linear1);
  const double exact = 0.25 * 0.25 / 2 + 0.25 * 0.25;
  EXPECT_NEAR(integrate(build_vs(u, mu, omega, s)), exact, 1e-12);

  EXPECT_THROW(build_vs(u, mu, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(build_vs(u, mu, 1.0, 0), std::invalid_argument);
}

TEST(BuildVsProperty, RangeContained) {
  Gen gen(304);
  const Grid g = unit_grid(2, 17);
  for (int trial = 0; trial < 200; ++trial) {
    const GridFunction u = gen.noise_field(g, -3.0, 3.0);
    const double omega = gen.log_uniform(1e-3, 10.0);
    const int s = 1 + static_cast<int>(gen.index(12));
    const double cap = std::ldexp(omega, -(s + 1));
    const GridFunction vs = build_vs(u, gen.uniform(-3.0, 3.0), omega, s);
    for (double v : vs.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, cap);
    }
  }
}

TEST(PoincareMeasure, ConstantIsTrivial) {
  const Grid g = unit_grid(2, 33);
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  geom.levels = std::make_pair(1.0, 1.0);
  const InequalityReport r = poincare_measure_check(
      GridFunction(g, 0.2), ExponentVector{2.0, 2.0}, 1, geom);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_EQ(r.state, CheckState::kPass);
}

TEST(PoincareMeasure, LinearClosedForm) {
  // u = x, levels (0.11, 0.2): normalized u = 5x, mu+ = 0.55, mu- = -0.45.
  // Q = (-0.125, 0.125); A_2 = [x > 0.06]; v_1 ramps on (0.01, 0.06).
  const Grid g = unit_grid(1, 801);
  const GridFunction u = from_expr(g, linear1);
  IntrinsicGeometry geom;
  geom.center = Point{0.0};
  geom.rho = 0.25;
  geom.q = 1;
  geom.levels = std::make_pair(0.11, 0.2);
  const InequalityReport r =
      poincare_measure_check(u, ExponentVector{2.0}, 1, geom);
  const double h = g.spacing(0);
  EXPECT_NEAR(r.details.at("hypothesis_measure").get<double>(), 0.135, 2 * h);
  EXPECT_NEAR(r.lhs, 0.25 * (0.125 - 0.06), h);
  EXPECT_NEAR(r.rhs, 4.0 * 0.125 * 0.25, 0.02 * 0.125);
  EXPECT_LT(r.lhs, r.rhs);
  EXPECT_EQ(r.state, CheckState::kPass);
}

TEST(PoincareMeasure, EmptyUpperSetGivesZeroLhs) {
  // Field stays below mu+ - omega/4 so A_2 is empty.
  const Grid g = unit_grid(2, 33);
  const GridFunction u = from_expr(g, affine2);
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  geom.levels = std::make_pair(u.max() + 10.0, 20.0);
  const InequalityReport r =
      poincare_measure_check(u, ExponentVector{2.0, 2.0}, 1, geom);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.state, CheckState::kPass);
}

TEST(PoincareMeasure, CorpusPassesUnderHypothesis) {
  int applied = 0;
  for (const auto& inst : corpus()) {
    const GridFunction& u = solved(inst).solution;
    const std::size_t n = inst.dim();
    for (double offset : {0.0, 0.3, -0.3}) {
      for (int s : {1, 2, 3}) {
        IntrinsicGeometry geom;
        geom.center = Point(n, offset);
        const InequalityReport r =
            poincare_measure_check(u, inst.p(), s, geom);
        if (r.state == CheckState::kHypothesisNotMet) continue;
        ++applied;
        EXPECT_NE(r.state, CheckState::kFail)
            << inst.name << " s " << s << " ratio " << r.ratio;
      }
    }
  }
  EXPECT_GT(applied, 0);
}

TEST(ShrinkChain, ConstantDegenerate) {
  const Grid g = unit_grid(2, 17);
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  const ShrinkState st =
      shrink_chain(GridFunction(g, 1.0), ExponentVector{2.0, 2.0}, 5, geom);
  EXPECT_EQ(st.report.state, CheckState::kDegenerate);
  for (double m : st.measures) EXPECT_EQ(m, 0.0);
}

TEST(ShrinkChain, StipulationRefused) {
  const Grid g = unit_grid(2, 17);
  const GridFunction u = from_expr(g, affine2);
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  try {
    shrink_chain(u, ExponentVector{2.0, 2.1}, 50, geom);
    FAIL() << "expected refusal";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("stipulation"), std::string::npos);
  }
  EXPECT_THROW(shrink_chain(u, ExponentVector{2.0, 2.0}, 1, geom),
               std::invalid_argument);
  EXPECT_NO_THROW(shrink_chain(u, ExponentVector{2.0, 2.1}, 10, geom));
}

TEST(ShrinkChain, FractionNonincreasingOverSweep) {
  const auto& inst = corpus_instance("p2_201");
  const GridFunction& u = solved(inst).solution;
  IntrinsicGeometry geom;
  geom.center = Point{0.0, 0.0};
  double last = 2.0;
  for (int q = 4; q <= 40; ++q) {
    const ShrinkState st = shrink_chain(u, inst.p(), q, geom);
    EXPECT_LE(st.fraction, last) << "q " << q;
    EXPECT_EQ(st.report.state, CheckState::kPass) << "q " << q;
    last = st.fraction;
  }
}

TEST(ShrinkChainProperty, MeasuresNonincreasing) {
  Gen gen(305);
  const Grid g = unit_grid(2, 33);
  for (int trial = 0; trial < 50; ++trial) {
    const GridFunction u = gen.smooth_field(g);
    IntrinsicGeometry geom;
    geom.center = Point{gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3)};
    geom.rho = gen.uniform(0.1, 0.3);
    const ExponentVector p{2.0, 2.0 + gen.uniform(0.0, 0.1)};
    const ShrinkState st = shrink_chain(u, p, 8, geom);
    for (std::size_t s = 1; s < st.measures.size(); ++s) {
      EXPECT_LE(st.measures[s], st.measures[s - 1]);
    }
    EXPECT_NE(st.report.state, CheckState::kFail);
  }
}

TEST(ChooseQ, Examples) {
  EXPECT_EQ(choose_q(1.0, 0.25, 2.0), 17);
  EXPECT_EQ(choose_q(0.5, 0.6, 2.0), 2);
  EXPECT_EQ(choose_q(0.3, 0.3, 1.7), 2);
  EXPECT_EQ(choose_q(1.0, 0.5, 1.5), 9);
  EXPECT_THROW(choose_q(1.0, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(choose_q(0.0, 0.5, 2.0), std::invalid_argument);
  EXPECT_THROW(choose_q(1.0, 0.5, 1.0), std::invalid_argument);
}

TEST(ChooseQProperty, SatisfiesAndMinimal) {
  Gen gen(306);
  for (int trial = 0; trial < 1000; ++trial) {
    const double gamma = gen.log_uniform(0.05, 5.0);
    const double nu = gen.uniform(0.05, 0.95);
    const double pmin = gen.uniform(1.3, 4.0);
    const int q = choose_q(gamma, nu, pmin);
    const double e = (pmin - 1.0) / pmin;
    EXPECT_LE(gamma * std::pow(q - 1.0, -e), nu * (1 + 1e-12));
    if (q > 2) {
      EXPECT_GT(gamma * std::pow(q - 2.0, -e), nu * (1 - 1e-12));
    }
  }
}

}  // namespace
}  // namespace anisolab
