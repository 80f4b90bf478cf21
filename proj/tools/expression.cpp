#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace qplab::cli {

struct Expression::Node {
  enum class Op { constant, var, neg, add, sub, mul, div, pow, call1, call2 };
  Op op = Op::constant;
  double value = 0.0;
  char var = 'x';
  double (*f1)(double) = nullptr;
  double (*f2)(double, double) = nullptr;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(const Vars& v) const {
    switch (op) {
      case Op::constant:
        return value;
      case Op::var:
        return var == 'x' ? v.x : var == 'y' ? v.y : var == 'z' ? v.z : v.t;
      case Op::neg:
        return -args[0]->eval(v);
      case Op::add:
        return args[0]->eval(v) + args[1]->eval(v);
      case Op::sub:
        return args[0]->eval(v) - args[1]->eval(v);
      case Op::mul:
        return args[0]->eval(v) * args[1]->eval(v);
      case Op::div:
        return args[0]->eval(v) / args[1]->eval(v);
      case Op::pow:
        return std::pow(args[0]->eval(v), args[1]->eval(v));
      case Op::call1:
        return f1(args[0]->eval(v));
      case Op::call2:
        return f2(args[0]->eval(v), args[1]->eval(v));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

double fmin2(double a, double b) { return std::min(a, b); }
double fmax2(double a, double b) { return std::max(a, b); }

NodePtr make(Node::Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

  bool uses_t = false;

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression \"" + s_ + "\" at " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Node::Op::add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make(Node::Op::sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Node::Op::mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(Node::Op::div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Op::neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  // Right associative; binds tighter than unary minus on its left: -x^2 = -(x^2).
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Op::pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id = s_.substr(start, pos_ - start);
    if (id == "x" || id == "y" || id == "z" || id == "t") {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::var;
      n->var = id[0];
      if (id == "t") uses_t = true;
      return n;
    }
    if (id == "pi" || id == "e") {
      auto n = std::make_shared<Node>();
      n->value = id == "pi" ? std::numbers::pi : std::numbers::e;
      return n;
    }
    using F1 = double (*)(double);
    static const std::pair<const char*, F1> unary_fns[] = {
        {"sin", static_cast<F1>(std::sin)},   {"cos", static_cast<F1>(std::cos)},
        {"tan", static_cast<F1>(std::tan)},   {"exp", static_cast<F1>(std::exp)},
        {"log", static_cast<F1>(std::log)},   {"sqrt", static_cast<F1>(std::sqrt)},
        {"abs", static_cast<F1>(std::fabs)},  {"tanh", static_cast<F1>(std::tanh)},
    };
    for (const auto& [fname, fn] : unary_fns) {
      if (id == fname) {
        if (!accept('(')) fail("expected '(' after " + id);
        NodePtr arg = expr();
        if (!accept(')')) fail("expected ')'");
        auto n = std::make_shared<Node>();
        n->op = Node::Op::call1;
        n->f1 = fn;
        n->args = {arg};
        return n;
      }
    }
    if (id == "min" || id == "max") {
      if (!accept('(')) fail("expected '(' after " + id);
      NodePtr a = expr();
      if (!accept(',')) fail("expected ','");
      NodePtr b = expr();
      if (!accept(')')) fail("expected ')'");
      auto n = std::make_shared<Node>();
      n->op = Node::Op::call2;
      n->f2 = id == "min" ? fmin2 : fmax2;
      n->args = {a, b};
      return n;
    }
    fail("unknown name '" + id + "'");
  }
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text) {
  Parser p(text_);
  root_ = p.parse();
  uses_t_ = p.uses_t;
}

double Expression::operator()(const Vars& v) const { return root_ ? root_->eval(v) : 0.0; }

}  // namespace qplab::cli
