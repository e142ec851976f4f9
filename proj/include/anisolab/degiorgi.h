#ifndef ANISOLAB_DEGIORGI_H_
#define ANISOLAB_DEGIORGI_H_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "anisolab/exponents.h"
#include "anisolab/lattice.h"
#include "anisolab/report.h"

namespace anisolab {

struct CaccioppoliConfig {
  double level = 0.0;
  Sign sign = Sign::kPlus;
  Box outer;
  double sigma = 0.5;
  ExponentVector exponents;
};

// lhs = sum_j int_Q |d_j[(u-k)_pm zeta^{1/p_j}]|^{p_j},
// rhs = sum_j [(1-sigma) rho_j]^{-p_j} int_Q (u-k)_pm^{p_j}.
// ratio = lhs / rhs; degenerate when rhs == 0. Throws std::invalid_argument
// unless 0 < sigma < 1.
InequalityReport caccioppoli_report(const GridFunction& u,
                                    const CaccioppoliConfig& cfg);

// Intrinsic geometry around a point: mu+-, omega are measured on the cube
// K_{2 rho}; u is rescaled by 1/omega so the normalized oscillation is 1;
// Q_rho has half-widths rho_j = 2^{-q} rho^{alpha / p_j}.
struct IntrinsicGeometry {
  Point center;
  double rho = 0.25;
  std::optional<double> alpha;  // pmax when unset
  int q = 1;
  double sigma = 0.5;
  // Diagnostic mode: (mu_plus, omega) in the units of u, used instead of
  // measuring them.
  std::optional<std::pair<double, double>> levels;
};

struct ResolvedGeometry {
  double scale = 1.0;  // normalized u = scale * u
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double omega = 0.0;  // after normalization: 1, or 0 when degenerate
  double alpha = 0.0;
  std::vector<double> radii;
  std::optional<Box> cylinder;  // Q_rho; empty when degenerate
  bool degenerate() const { return !cylinder.has_value(); }
};

// Throws std::out_of_range when K_{2 rho} or Q_rho leaves the grid box.
ResolvedGeometry resolve_geometry(const GridFunction& u,
                                  const ExponentVector& p,
                                  const IntrinsicGeometry& geom);

// Energy inequality at level k = mu+ - omega/2^s (or mu- + omega/2^s) on the
// intrinsic cylinder:
//   lhs <= gamma (1-sigma)^{-pmax} sum_j rho_j^{-p_j} (omega/2^s)^{p_j} |A|
// with A = Q_rho n [u > k] (or [u < k]). Reports the empirical gamma.
InequalityReport specialized_energy_report(const GridFunction& u,
                                           const ExponentVector& p,
                                           const IntrinsicGeometry& geom,
                                           int s, Sign side = Sign::kPlus);

struct RecursionParams {
  RecursionParams(double c, double b, double delta);
  double C;
  double B;
  double delta;
};

// nu = C^{-1/delta} B^{-1/delta^2}.
double fast_convergence_threshold(const RecursionParams& params);

struct RecursionTrace {
  std::vector<double> values;  // Y_0 .. Y_n, truncated at divergence
  bool diverged = false;
};

// Equality orbit Y_{k+1} = C B^k Y_k^{1+delta}, evaluated in log space.
// Divergence: a value above 1e300 or not finite.
RecursionTrace iterate_recursion(const RecursionParams& params, double y0,
                                 std::size_t n);

// nu from fast_convergence_threshold(2 gamma, 2 b, 1/N) with gamma the
// empirical constant of specialized_energy_report at s = q and
// b = 2^{pmax/pbar}. Hypothesis |A_q| < nu |Q_rho| (strict); conclusion
// checked nodewise on Q_{rho/2} with slack h max|Du|.
InequalityReport degiorgi_lemma_check(const GridFunction& u,
                                      const ExponentVector& p, Sign side,
                                      const IntrinsicGeometry& geom);

// clamp(u - (mu+ - omega/2^s), 0, omega/2^{s+1}).
GridFunction build_vs(const GridFunction& u, double mu_plus, double omega,
                      int s);

// (omega/2^{s+1}) |A_{s+1}| <= 4 sum_j rho_j int_Q |d_j v_s| under the
// hypothesis |[u < mu- + omega/2] n Q| >= |Q|/2. Margin 1 - lhs/rhs must be
// at least -tolerance.
InequalityReport poincare_measure_check(const GridFunction& u,
                                        const ExponentVector& p, int s,
                                        const IntrinsicGeometry& geom,
                                        double tolerance = 0.05);

struct ShrinkState {
  int q = 0;
  std::vector<double> measures;   // |A_s|, s = 0..q
  std::vector<double> step_gamma; // per-step constants, s = 1..q-1
  double gamma = 0.0;             // max of step_gamma
  double cylinder_measure = 0.0;  // |Q_rho|
  double summed_lhs = 0.0;        // (q-1) |A_q|^{p'}
  double summed_rhs = 0.0;        // gamma^{p'} |Q|^{1/(pmin-1)} |A_0|
  double fraction = 0.0;          // |A_q| / |Q_rho|
  double fraction_bound = 0.0;    // gamma / (q-1)^{(pmin-1)/pmin}
  InequalityReport report;
};

// Throws std::invalid_argument when q < 2 or q (pmax - pmin) > 1.
ShrinkState shrink_chain(const GridFunction& u, const ExponentVector& p, int q,
                         const IntrinsicGeometry& geom);

// Smallest q >= 2 with gamma (q-1)^{-(pmin-1)/pmin} <= nu.
int choose_q(double gamma, double nu, double pmin);

}  // namespace anisolab

#endif  // ANISOLAB_DEGIORGI_H_
