#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace calderon::expr {

/// Parse failure with the byte offset into the source string.
class SyntaxError : public std::runtime_error {
public:
  SyntaxError(const std::string& msg, std::size_t offset);
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Arithmetic expression in the single free variable x.
///
/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := unary ('^' factor)?        -- '^' right-associative, constant exponent
///   unary  := '-'? atom
///   atom   := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
///   func   := sin cos tan sinh cosh tanh exp log sqrt abs
///
/// Expressions are immutable and closed under derivative().
class Expression {
public:
  Expression();  // constant 0
  static Expression parse(const std::string& src);
  static Expression constant(double v);
  static Expression variable();
  static Expression apply(const std::string& fn, const Expression& arg);

  double operator()(double x) const;
  Expression derivative() const;
  /// True when the tree is a constant; writes its value if out != nullptr.
  bool constant_value(double* out = nullptr) const;
  std::string str() const;

  friend Expression operator+(const Expression&, const Expression&);
  friend Expression operator-(const Expression&, const Expression&);
  friend Expression operator*(const Expression&, const Expression&);
  friend Expression operator/(const Expression&, const Expression&);
  friend Expression operator-(const Expression&);
  Expression pow(double exponent) const;

private:
  explicit Expression(NodePtr n) : node_(std::move(n)) {}
  NodePtr node_;
};

}  // namespace calderon::expr
