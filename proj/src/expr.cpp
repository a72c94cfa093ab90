#include "calderon/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

namespace calderon::expr {

SyntaxError::SyntaxError(const std::string& msg, std::size_t offset)
    : std::runtime_error(msg + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}

enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Fun };
enum class Fn { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs, Sign };

struct Node {
  Kind kind;
  double value = 0.0;  // Const value, or Pow exponent
  Fn fn = Fn::Sin;
  NodePtr a, b;
};

namespace {

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = v;
  return n;
}

bool is_const(const NodePtr& n, double* v = nullptr) {
  if (n->kind != Kind::Const) return false;
  if (v) *v = n->value;
  return true;
}

NodePtr make_var() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  return n;
}

NodePtr make_binary(Kind k, NodePtr a, NodePtr b);
NodePtr make_neg(NodePtr a);

NodePtr make_add(NodePtr a, NodePtr b) {
  double va, vb;
  if (is_const(a, &va) && is_const(b, &vb)) return make_const(va + vb);
  if (is_const(a, &va) && va == 0.0) return b;
  if (is_const(b, &vb) && vb == 0.0) return a;
  return make_binary(Kind::Add, std::move(a), std::move(b));
}

NodePtr make_sub(NodePtr a, NodePtr b) {
  double va, vb;
  if (is_const(a, &va) && is_const(b, &vb)) return make_const(va - vb);
  if (is_const(b, &vb) && vb == 0.0) return a;
  if (is_const(a, &va) && va == 0.0) return make_neg(std::move(b));
  return make_binary(Kind::Sub, std::move(a), std::move(b));
}

NodePtr make_mul(NodePtr a, NodePtr b) {
  double va, vb;
  if (is_const(a, &va) && is_const(b, &vb)) return make_const(va * vb);
  if (is_const(a, &va)) {
    if (va == 0.0) return make_const(0.0);
    if (va == 1.0) return b;
    if (va == -1.0) return make_neg(std::move(b));
  }
  if (is_const(b, &vb)) {
    if (vb == 0.0) return make_const(0.0);
    if (vb == 1.0) return a;
    if (vb == -1.0) return make_neg(std::move(a));
  }
  return make_binary(Kind::Mul, std::move(a), std::move(b));
}

NodePtr make_div(NodePtr a, NodePtr b) {
  double va, vb;
  if (is_const(b, &vb) && vb == 1.0) return a;
  if (is_const(a, &va) && va == 0.0) return make_const(0.0);
  if (is_const(a, &va) && is_const(b, &vb)) return make_const(va / vb);
  return make_binary(Kind::Div, std::move(a), std::move(b));
}

NodePtr make_pow(NodePtr a, double e) {
  if (e == 0.0) return make_const(1.0);
  if (e == 1.0) return a;
  double va;
  if (is_const(a, &va)) return make_const(std::pow(va, e));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pow;
  n->value = e;
  n->a = std::move(a);
  return n;
}

NodePtr make_fun(Fn f, NodePtr a) {
  double va;
  if (is_const(a, &va)) {
    switch (f) {
      case Fn::Sin: return make_const(std::sin(va));
      case Fn::Cos: return make_const(std::cos(va));
      case Fn::Tan: return make_const(std::tan(va));
      case Fn::Sinh: return make_const(std::sinh(va));
      case Fn::Cosh: return make_const(std::cosh(va));
      case Fn::Tanh: return make_const(std::tanh(va));
      case Fn::Exp: return make_const(std::exp(va));
      case Fn::Log: return make_const(std::log(va));
      case Fn::Sqrt: return make_const(std::sqrt(va));
      case Fn::Abs: return make_const(std::abs(va));
      case Fn::Sign: return make_const(va > 0 ? 1.0 : (va < 0 ? -1.0 : 0.0));
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Fun;
  n->fn = f;
  n->a = std::move(a);
  return n;
}

NodePtr make_neg(NodePtr a) {
  double va;
  if (is_const(a, &va)) return make_const(-va);
  if (a->kind == Kind::Neg) return a->a;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Neg;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double eval_node(const Node& n, double x) {
  switch (n.kind) {
    case Kind::Const: return n.value;
    case Kind::Var: return x;
    case Kind::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Kind::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Kind::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Kind::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case Kind::Pow: return std::pow(eval_node(*n.a, x), n.value);
    case Kind::Neg: return -eval_node(*n.a, x);
    case Kind::Fun: {
      double v = eval_node(*n.a, x);
      switch (n.fn) {
        case Fn::Sin: return std::sin(v);
        case Fn::Cos: return std::cos(v);
        case Fn::Tan: return std::tan(v);
        case Fn::Sinh: return std::sinh(v);
        case Fn::Cosh: return std::cosh(v);
        case Fn::Tanh: return std::tanh(v);
        case Fn::Exp: return std::exp(v);
        case Fn::Log: return std::log(v);
        case Fn::Sqrt: return std::sqrt(v);
        case Fn::Abs: return std::abs(v);
        case Fn::Sign: return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
      }
    }
  }
  return 0.0;  // unreachable
}

NodePtr diff_node(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Const: return make_const(0.0);
    case Kind::Var: return make_const(1.0);
    case Kind::Add: return make_add(diff_node(n->a), diff_node(n->b));
    case Kind::Sub: return make_sub(diff_node(n->a), diff_node(n->b));
    case Kind::Mul:
      return make_add(make_mul(diff_node(n->a), n->b), make_mul(n->a, diff_node(n->b)));
    case Kind::Div:
      // (u/v)' = (u'v - uv') / v^2
      return make_div(make_sub(make_mul(diff_node(n->a), n->b), make_mul(n->a, diff_node(n->b))),
                      make_pow(n->b, 2.0));
    case Kind::Pow:
      // (u^c)' = c u^(c-1) u'
      return make_mul(make_const(n->value), make_mul(make_pow(n->a, n->value - 1.0), diff_node(n->a)));
    case Kind::Neg: return make_neg(diff_node(n->a));
    case Kind::Fun: {
      NodePtr u = n->a;
      NodePtr du = diff_node(u);
      switch (n->fn) {
        case Fn::Sin: return make_mul(make_fun(Fn::Cos, u), du);
        case Fn::Cos: return make_neg(make_mul(make_fun(Fn::Sin, u), du));
        case Fn::Tan:
          return make_div(du, make_pow(make_fun(Fn::Cos, u), 2.0));
        case Fn::Sinh: return make_mul(make_fun(Fn::Cosh, u), du);
        case Fn::Cosh: return make_mul(make_fun(Fn::Sinh, u), du);
        case Fn::Tanh:
          return make_mul(make_sub(make_const(1.0), make_pow(make_fun(Fn::Tanh, u), 2.0)), du);
        case Fn::Exp: return make_mul(make_fun(Fn::Exp, u), du);
        case Fn::Log: return make_div(du, u);
        case Fn::Sqrt: return make_div(du, make_mul(make_const(2.0), make_fun(Fn::Sqrt, u)));
        case Fn::Abs: return make_mul(make_fun(Fn::Sign, u), du);
        case Fn::Sign: return make_const(0.0);
      }
    }
  }
  return make_const(0.0);  // unreachable
}

std::string str_node(const Node& n) {
  switch (n.kind) {
    case Kind::Const: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", n.value);
      return buf;
    }
    case Kind::Var: return "x";
    case Kind::Add: return "(" + str_node(*n.a) + " + " + str_node(*n.b) + ")";
    case Kind::Sub: return "(" + str_node(*n.a) + " - " + str_node(*n.b) + ")";
    case Kind::Mul: return "(" + str_node(*n.a) + "*" + str_node(*n.b) + ")";
    case Kind::Div: return "(" + str_node(*n.a) + "/" + str_node(*n.b) + ")";
    case Kind::Pow: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", n.value);
      return str_node(*n.a) + "^" + buf;
    }
    case Kind::Neg: return "-" + str_node(*n.a);
    case Kind::Fun: {
      static const char* names[] = {"sin", "cos", "tan", "sinh", "cosh", "tanh",
                                    "exp", "log", "sqrt", "abs", "sign"};
      return std::string(names[static_cast<int>(n.fn)]) + "(" + str_node(*n.a) + ")";
    }
  }
  return "";
}

// --- parser ---------------------------------------------------------------

struct Parser {
  const std::string& src;
  std::size_t pos = 0;

  explicit Parser(const std::string& s) : src(s) {}

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool peek(char c) {
    skip_ws();
    return pos < src.size() && src[pos] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (!accept(c)) throw SyntaxError(std::string("expected '") + c + "'", pos);
  }

  NodePtr parse_expr() {
    NodePtr t = parse_term();
    for (;;) {
      if (accept('+'))
        t = make_add(t, parse_term());
      else if (accept('-'))
        t = make_sub(t, parse_term());
      else
        return t;
    }
  }

  NodePtr parse_term() {
    NodePtr f = parse_factor();
    for (;;) {
      if (accept('*'))
        f = make_mul(f, parse_factor());
      else if (accept('/'))
        f = make_div(f, parse_factor());
      else
        return f;
    }
  }

  NodePtr parse_factor() {
    NodePtr u = parse_unary();
    skip_ws();
    if (pos < src.size() && src[pos] == '^') {
      std::size_t caret = pos;
      ++pos;
      NodePtr e = parse_factor();  // right-associative
      double c;
      if (!is_const(e, &c)) throw SyntaxError("exponent must be constant", caret);
      return make_pow(u, c);
    }
    return u;
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_neg(parse_atom());
    return parse_atom();
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= src.size()) throw SyntaxError("unexpected end of expression", pos);
    char c = src[pos];
    if (c == '(') {
      ++pos;
      NodePtr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw SyntaxError("unexpected character", pos);
  }

  NodePtr parse_number() {
    const char* begin = src.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw SyntaxError("malformed number", pos);
    pos += static_cast<std::size_t>(end - begin);
    return make_const(v);
  }

  NodePtr parse_ident() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name = src.substr(start, pos - start);
    if (name == "x") return make_var();
    if (name == "pi") return make_const(M_PI);
    if (name == "e") return make_const(M_E);
    static const std::pair<const char*, Fn> funcs[] = {
        {"sin", Fn::Sin},   {"cos", Fn::Cos},   {"tan", Fn::Tan},  {"sinh", Fn::Sinh},
        {"cosh", Fn::Cosh}, {"tanh", Fn::Tanh}, {"exp", Fn::Exp},  {"log", Fn::Log},
        {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}};
    for (const auto& [fname, fn] : funcs) {
      if (name == fname) {
        expect('(');
        NodePtr arg = parse_expr();
        expect(')');
        return make_fun(fn, arg);
      }
    }
    throw SyntaxError("unknown identifier '" + name + "'", start);
  }
};

}  // namespace

Expression::Expression() : node_(make_const(0.0)) {}

Expression Expression::parse(const std::string& src) {
  Parser p(src);
  NodePtr n = p.parse_expr();
  p.skip_ws();
  if (p.pos != src.size()) throw SyntaxError("trailing input", p.pos);
  return Expression(std::move(n));
}

Expression Expression::constant(double v) { return Expression(make_const(v)); }
Expression Expression::variable() { return Expression(make_var()); }

Expression Expression::apply(const std::string& fn, const Expression& arg) {
  static const std::pair<const char*, Fn> funcs[] = {
      {"sin", Fn::Sin},   {"cos", Fn::Cos},   {"tan", Fn::Tan},  {"sinh", Fn::Sinh},
      {"cosh", Fn::Cosh}, {"tanh", Fn::Tanh}, {"exp", Fn::Exp},  {"log", Fn::Log},
      {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}};
  for (const auto& [fname, f] : funcs)
    if (fn == fname) return Expression(make_fun(f, arg.node_));
  throw std::invalid_argument("unknown function: " + fn);
}

double Expression::operator()(double x) const { return eval_node(*node_, x); }

Expression Expression::derivative() const { return Expression(diff_node(node_)); }

bool Expression::constant_value(double* out) const { return is_const(node_, out); }

std::string Expression::str() const { return str_node(*node_); }

Expression operator+(const Expression& a, const Expression& b) {
  return Expression(make_add(a.node_, b.node_));
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression(make_sub(a.node_, b.node_));
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression(make_mul(a.node_, b.node_));
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression(make_div(a.node_, b.node_));
}
Expression operator-(const Expression& a) { return Expression(make_neg(a.node_)); }

Expression Expression::pow(double exponent) const { return Expression(make_pow(node_, exponent)); }

}  // namespace calderon::expr
