#ifndef ANISOLAB_EXPRESSION_H_
#define ANISOLAB_EXPRESSION_H_

#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace anisolab {

class ExpressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Small arithmetic grammar for boundary data:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          (right associative)
//   atom   := number | 'pi' | xK | func '(' expr ')' | '(' expr ')'
// with func one of abs, sin, cos, exp, sqrt and coordinates x1 .. xN
// (1-based). Parse errors and coordinates beyond the dimension throw
// ExpressionError.
class Expression {
 public:
  Expression(const std::string& source, std::size_t dim);

  double operator()(std::span<const double> x) const;
  const std::string& source() const { return source_; }
  std::size_t dim() const { return dim_; }

  struct Node;

 private:
  std::string source_;
  std::size_t dim_;
  std::shared_ptr<const Node> root_;
};

}  // namespace anisolab

#endif  // ANISOLAB_EXPRESSION_H_
