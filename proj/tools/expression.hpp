#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace qplab::cli {

struct ParseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Variables available to an expression.
struct Vars {
  double x = 0.0, y = 0.0, z = 0.0, t = 0.0;
};

/// Arithmetic expression in x, y, z, t with + - * / ^, unary minus,
/// constants pi and e, and sin, cos, tan, exp, log, sqrt, abs, tanh, min, max.
class Expression {
 public:
  Expression() = default;
  explicit Expression(const std::string& text);

  double operator()(const Vars& v) const;
  const std::string& text() const { return text_; }
  bool uses_time() const { return uses_t_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  bool uses_t_ = false;
};

}  // namespace qplab::cli
