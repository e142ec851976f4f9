#ifndef ANISOLAB_EXPONENTS_H_
#define ANISOLAB_EXPONENTS_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace anisolab {

using Point = std::vector<double>;

// The multi-index p = (p_1, ..., p_N) of an anisotropic operator. Every
// entry is strictly greater than one.
class ExponentVector {
 public:
  explicit ExponentVector(std::vector<double> p);
  ExponentVector(std::initializer_list<double> p)
      : ExponentVector(std::vector<double>(p)) {}

  std::size_t dim() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> values() const { return p_; }

  // Harmonic mean: 1/pbar = (1/N) sum 1/p_i.
  double pbar() const { return pbar_; }
  double pmin() const { return pmin_; }
  double pmax() const { return pmax_; }

  bool isotropic() const { return pmin_ == pmax_; }

 private:
  std::vector<double> p_;
  double pbar_;
  double pmin_;
  double pmax_;
};

struct Aggregates {
  double pbar;
  double pmin;
  double pmax;
};

Aggregates aggregates(const ExponentVector& p);

// N pbar / (N - pbar). Throws std::domain_error when pbar >= N.
double sobolev_exponent(const ExponentVector& p);

// pbar < N and pmax <= p_*.
bool boundedness_condition(const ExponentVector& p);

// pmax - pmin <= 1/q. Throws std::invalid_argument when q <= 1.
bool smallness_condition(const ExponentVector& p, double q);

struct IntrinsicMetricContext {
  IntrinsicMetricContext(double sup_norm, ExponentVector exponents);

  double sup_norm;
  ExponentVector exponents;

  // ||u||^{(pmax - p_j)/pmax}, with 0^0 = 1 and 0^s = 0 for s > 0.
  double axis_weight(std::size_t j) const;
};

// sum_j ||u||^{(pmax-p_j)/pmax} |x_j - y_j|^{p_j/pmax}
double p_distance(std::span<const double> x, std::span<const double> y,
                  const IntrinsicMetricContext& ctx);

}  // namespace anisolab

#endif  // ANISOLAB_EXPONENTS_H_
