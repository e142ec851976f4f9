#include "anisolab/exponents.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anisolab {

ExponentVector::ExponentVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) {
    throw std::invalid_argument("ExponentVector: dimension must be >= 1");
  }
  double inv_sum = 0.0;
  for (double pi : p_) {
    if (!std::isfinite(pi) || !(pi > 1.0)) {
      std::ostringstream msg;
      msg << "ExponentVector: every p_i must be finite and > 1, got " << pi;
      throw std::invalid_argument(msg.str());
    }
    inv_sum += 1.0 / pi;
  }
  pbar_ = static_cast<double>(p_.size()) / inv_sum;
  pmin_ = *std::min_element(p_.begin(), p_.end());
  pmax_ = *std::max_element(p_.begin(), p_.end());
  // Rounding can push the harmonic mean a few ulps outside [pmin, pmax].
  pbar_ = std::clamp(pbar_, pmin_, pmax_);
}

Aggregates aggregates(const ExponentVector& p) {
  return {p.pbar(), p.pmin(), p.pmax()};
}

double sobolev_exponent(const ExponentVector& p) {
  const double n = static_cast<double>(p.dim());
  if (!(p.pbar() < n)) {
    std::ostringstream msg;
    msg << "sobolev_exponent: requires pbar < N (pbar = " << p.pbar()
        << ", N = " << p.dim() << ")";
    throw std::domain_error(msg.str());
  }
  return n * p.pbar() / (n - p.pbar());
}

bool boundedness_condition(const ExponentVector& p) {
  if (!(p.pbar() < static_cast<double>(p.dim()))) return false;
  return p.pmax() <= sobolev_exponent(p);
}

bool smallness_condition(const ExponentVector& p, double q) {
  if (!(q > 1.0)) {
    throw std::invalid_argument("smallness_condition: q must be > 1");
  }
  return p.pmax() - p.pmin() <= 1.0 / q;
}

IntrinsicMetricContext::IntrinsicMetricContext(double sup_norm_in,
                                               ExponentVector exponents_in)
    : sup_norm(sup_norm_in), exponents(std::move(exponents_in)) {
  if (!(sup_norm >= 0.0) || !std::isfinite(sup_norm)) {
    throw std::invalid_argument(
        "IntrinsicMetricContext: sup_norm must be finite and >= 0");
  }
}

double IntrinsicMetricContext::axis_weight(std::size_t j) const {
  const double s = (exponents.pmax() - exponents[j]) / exponents.pmax();
  if (s == 0.0) return 1.0;
  if (sup_norm == 0.0) return 0.0;
  return std::pow(sup_norm, s);
}

double p_distance(std::span<const double> x, std::span<const double> y,
                  const IntrinsicMetricContext& ctx) {
  const auto& p = ctx.exponents;
  if (x.size() != p.dim() || y.size() != p.dim()) {
    throw std::invalid_argument("p_distance: point dimension mismatch");
  }
  double d = 0.0;
  for (std::size_t j = 0; j < p.dim(); ++j) {
    const double gap = std::abs(x[j] - y[j]);
    if (gap == 0.0) continue;
    d += ctx.axis_weight(j) * std::pow(gap, p[j] / p.pmax());
  }
  return d;
}

}  // namespace anisolab
