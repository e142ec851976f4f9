#ifndef ANISOLAB_HOLDER_H_
#define ANISOLAB_HOLDER_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "anisolab/exponents.h"
#include "anisolab/lattice.h"
#include "anisolab/report.h"

namespace anisolab {

// Box with half-widths rho_j = (omega / 2^q) rho^{alpha / p_j}.
struct IntrinsicCylinder {
  double omega = 0.0;
  int q = 0;
  double alpha = 0.0;
  double rho = 0.0;
  std::vector<double> radii;
  // Empty when omega == 0.
  std::optional<Box> box;

  bool degenerate() const { return !box.has_value(); }
};

// Throws std::invalid_argument unless rho > 0, q >= 0, omega >= 0 and
// alpha >= pmax.
IntrinsicCylinder intrinsic_cylinder(double omega, int q, double alpha,
                                     double rho, const ExponentVector& p,
                                     const Point& center);

// Intrinsic p-distance from a box to the boundary of an enclosing box: the
// cheapest single-axis move, min_j w_j gap_j^{p_j / pmax}.
double p_distance_to_boundary(const Box& inner, const Box& outer,
                              const IntrinsicMetricContext& ctx);

struct DecayOptions {
  double rho0 = 0.45;
  int q = 0;
  std::optional<double> alpha;  // pmax when unset
  // Stop once a cylinder holds fewer nodes than this along some axis.
  std::size_t min_nodes = 4;
};

// Nested cylinders Q_m = intrinsic_cylinder(1, q, alpha, rho0 2^{-m}) around
// a fixed center (the prefactor is the normalized reference oscillation)
// and the oscillation of u on each.
struct DecayTrace {
  std::vector<double> rho;
  std::vector<double> omega;
  // Center-to-corner intrinsic p-distance of each cylinder.
  std::vector<double> distance;
  // Intrinsic distance from the first cylinder to the domain boundary.
  double boundary_distance = 1.0;
  double sup_norm = 1.0;
  bool under_resolved = false;
  // First cylinder; the natural compact set K for modulus_check.
  std::optional<Box> initial_box;

  // Some oscillation vanished.
  bool degenerate() const;
};

DecayTrace oscillation_decay(const GridFunction& u, const ExponentVector& p,
                             const Point& center, std::size_t levels,
                             const DecayOptions& options = {});

struct HolderFit {
  double alpha = 0.0;
  double gamma = 0.0;
  // Root-mean-square of the log-space residuals.
  double residual = 0.0;
  // Slope capped at 1 and the smallest gamma putting every trace point on
  // or under the capped line.
  double alpha_effective = 0.0;
  double gamma_effective = 0.0;
};

// Least squares for log(omega_m / sup_norm) = log(gamma)
//   + alpha log(distance_m / boundary_distance).
// Throws std::invalid_argument with fewer than 3 points or a zero
// oscillation.
HolderFit holder_fit(const DecayTrace& trace);

struct ModulusPair {
  double difference = 0.0;
  double bound = 0.0;
  bool holds() const { return difference <= bound; }
};

// |u(x1) - u(x2)| against gamma ||u||_inf (d_p(x1, x2) / d_p(K, boundary))^a
// with the effective (capped) exponent and constant of the fit. Throws std::invalid_argument when a point lies
// outside K.
ModulusPair modulus_pair(const GridFunction& u, const ExponentVector& p,
                         const Point& x1, const Point& x2, const Box& k_box,
                         const HolderFit& fit);

// Samples `pairs` uniform pairs in K; passes when the fraction satisfying
// the modulus is at least `required_fraction`.
InequalityReport modulus_check(const GridFunction& u, const ExponentVector& p,
                               const Box& k_box, const HolderFit& fit,
                               std::size_t pairs = 10000,
                               double required_fraction = 0.99,
                               std::uint64_t seed = 20240603);

}  // namespace anisolab

#endif  // ANISOLAB_HOLDER_H_
