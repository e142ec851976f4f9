#include "anisolab/expression.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace anisolab {

struct Expression::Node {
  enum class Kind { kConstant, kCoordinate, kNegate, kAdd, kSub, kMul, kDiv,
                    kPow, kAbs, kSin, kCos, kExp, kSqrt };
  Kind kind = Kind::kConstant;
  double value = 0.0;
  std::size_t axis = 0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(std::span<const double> x) const {
    switch (kind) {
      case Kind::kConstant: return value;
      case Kind::kCoordinate: return x[axis];
      case Kind::kNegate: return -lhs->eval(x);
      case Kind::kAdd: return lhs->eval(x) + rhs->eval(x);
      case Kind::kSub: return lhs->eval(x) - rhs->eval(x);
      case Kind::kMul: return lhs->eval(x) * rhs->eval(x);
      case Kind::kDiv: return lhs->eval(x) / rhs->eval(x);
      case Kind::kPow: return std::pow(lhs->eval(x), rhs->eval(x));
      case Kind::kAbs: return std::abs(lhs->eval(x));
      case Kind::kSin: return std::sin(lhs->eval(x));
      case Kind::kCos: return std::cos(lhs->eval(x));
      case Kind::kExp: return std::exp(lhs->eval(x));
      case Kind::kSqrt: return std::sqrt(lhs->eval(x));
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(const std::string& src, std::size_t dim) : src_(src), dim_(dim) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression: " + what + " at offset " +
                          std::to_string(pos_) + " in '" + src_ + "'");
  }

  void skip() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Node::Kind::kAdd, lhs, term());
      } else if (accept('-')) {
        lhs = make(Node::Kind::kSub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Node::Kind::kMul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Node::Kind::kDiv, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Kind::kNegate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Node::Kind::kPow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    fail("unexpected character");
  }

  NodePtr number() {
    double v = 0.0;
    const char* begin = src_.data() + pos_;
    const auto [end, ec] =
        std::from_chars(begin, src_.data() + src_.size(), v);
    if (ec != std::errc()) fail("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr word() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isalnum(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    const std::string w = src_.substr(start, pos_ - start);
    if (w == "pi") {
      auto n = std::make_shared<Node>();
      n->value = std::numbers::pi;
      return n;
    }
    if (w.size() > 1 && w[0] == 'x' &&
        w.find_first_not_of("0123456789", 1) == std::string::npos) {
      const std::size_t k = std::stoul(w.substr(1));
      if (k < 1 || k > dim_) {
        pos_ = start;
        fail("coordinate " + w + " outside dimension " + std::to_string(dim_));
      }
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::kCoordinate;
      n->axis = k - 1;
      return n;
    }
    Node::Kind kind;
    if (w == "abs") {
      kind = Node::Kind::kAbs;
    } else if (w == "sin") {
      kind = Node::Kind::kSin;
    } else if (w == "cos") {
      kind = Node::Kind::kCos;
    } else if (w == "exp") {
      kind = Node::Kind::kExp;
    } else if (w == "sqrt") {
      kind = Node::Kind::kSqrt;
    } else {
      pos_ = start;
      fail("unknown name '" + w + "'");
    }
    expect('(');
    NodePtr arg = expr();
    expect(')');
    return make(kind, arg);
  }

  const std::string& src_;
  std::size_t dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& source, std::size_t dim)
    : source_(source), dim_(dim), root_(Parser(source_, dim).parse()) {}

double Expression::operator()(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw std::invalid_argument("expression: point dimension mismatch");
  }
  return root_->eval(x);
}

}  // namespace anisolab
