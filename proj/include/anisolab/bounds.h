#ifndef ANISOLAB_BOUNDS_H_
#define ANISOLAB_BOUNDS_H_

#include <optional>
#include <string>
#include <vector>

#include "anisolab/exponents.h"
#include "anisolab/lattice.h"
#include "anisolab/report.h"

namespace anisolab {

// Q_rho with rho_j = rho^{alpha/p_j}, the shrinking boxes
// rho_{j,n} = (rho_j/2)(1 + 2^{-n}) and the levels k_n.
struct BoundsGeometry {
  Point center;
  double rho = 0.25;
  std::optional<double> alpha;  // pmax when unset

  double resolved_alpha(const ExponentVector& p) const;
  std::vector<double> radii(const ExponentVector& p) const;
  Box box(const ExponentVector& p, std::size_t n = 0) const;
  // Q_{rho/2}: the limit of the shrinking boxes.
  Box half_box(const ExponentVector& p) const;
};

enum class BoundsBranch { kSubcritical, kCritical };

// k_n = (1 - 2^{-n}) k, or (1 - 2^{-(n+1)}) k on the critical branch.
double bounds_level(double k, std::size_t n, BoundsBranch branch);

// Y_n = (k^{-p_*} avg_{Q_n} (u - k_n)_+^{p_*})^{1/p_*}.
double normalized_tail(const GridFunction& u, const ExponentVector& p,
                       const BoundsGeometry& geom, double k, std::size_t n,
                       BoundsBranch branch);

struct RecursionReport {
  BoundsBranch branch = BoundsBranch::kSubcritical;
  double k = 1.0;
  std::vector<double> y;       // measured Y_0 .. Y_{n_max}
  std::vector<double> bound;   // recursive bound seeded at Y_0
  std::vector<double> step_ratio;  // Y_{n+1} / (factor_n Y_n^{1+kappa})
  double bracket = 0.0;        // [|Q|^{pbar/N} sum k^{p_l-pbar}/rho_l^{p_l}]^{1/pbar}
  double gamma_empirical = 0.0;
  double gamma_used = 0.0;     // 2 x gamma_empirical
  InequalityReport report;
};

// Measured Y_n against the bound
//   b_{n+1} = gamma 2^{(p_*/pbar) n} bracket b_n^{1+kappa},  b_0 = Y_0,
// with gamma twice the largest measured one-step constant. Throws
// std::domain_error when pbar >= N, std::invalid_argument when k < 1 and
// std::out_of_range when Q_rho leaves the grid.
RecursionReport recursion_report(const GridFunction& u,
                                 const ExponentVector& p,
                                 const BoundsGeometry& geom, double k,
                                 std::size_t n_max);

struct SupEstimateReport {
  BoundsBranch branch = BoundsBranch::kSubcritical;
  double measured_sup = 0.0;  // sup over Q_{rho/2} of u_+
  double bound = 0.0;         // max(1, C avg^e) or max(1, k)
  double constant = 0.0;      // C (subcritical)
  double k = 0.0;
  double threshold = 0.0;     // critical smallness threshold
  double gamma_empirical = 0.0;
  double gamma_used = 0.0;
  InequalityReport report;
};

// One-step constant of Y_{n+1} <= gamma 2^{(p_*/pbar) n} k^{e} Y_n^{1+kappa}
// measured at k = 1 over n < n_max; the largest value, NaN when no step is
// informative.
double recursion_gamma(const GridFunction& u, const ExponentVector& p,
                       const BoundsGeometry& geom, BoundsBranch branch,
                       std::size_t n_max = 8);

// Requires pmax < p_* strictly (std::domain_error otherwise).
SupEstimateReport sup_bound_subcritical(const GridFunction& u,
                                        const ExponentVector& p,
                                        const BoundsGeometry& geom);

// X_0(k) = (avg_{Q_rho} (u - k/2)_+^{p_*})^{1/p_*}.
double critical_x0(const GridFunction& u, const ExponentVector& p,
                   const BoundsGeometry& geom, double k);

// gamma^{-pbar/(p_*-pbar)} 2^{-(p_*/pbar)(pbar/(p_*-pbar))^2}.
double critical_threshold(const ExponentVector& p, double gamma);

// Requires |pmax - p_*| <= 1e-12 (std::domain_error otherwise). Bisects
// for the smallest k >= 1 with X_0(k) <= threshold to relative 1e-10;
// throws std::runtime_error when k would exceed 1e6 x the data scale.
SupEstimateReport sup_bound_critical(const GridFunction& u,
                                     const ExponentVector& p,
                                     const BoundsGeometry& geom);

// k with k^{q-p} = (p/eps) (1/(q-p)) int f^q over region (the whole grid
// when region is empty). Throws std::invalid_argument unless 0 < p < q,
// eps > 0 and f >= 0.
double chebyshev_level(const GridFunction& f, double q, double p, double eps,
                       const std::optional<Box>& region = std::nullopt);

// int (f - k)_+^p over region (the whole grid when empty).
double chebyshev_tail(const GridFunction& f, double k, double p,
                      const std::optional<Box>& region = std::nullopt);

std::string to_string(BoundsBranch branch);

}  // namespace anisolab

#endif  // ANISOLAB_BOUNDS_H_
