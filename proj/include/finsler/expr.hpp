#pragma once

// Smooth-expression language for Finsler functions, metric matrices and
// base vector fields.
//
// Grammar (EBNF, whitespace-insensitive):
//
//   expression := term { ('+' | '-') term }
//   term       := unary { ('*' | '/') unary }
//   unary      := '-' unary | power
//   power      := atom [ '^' exponent ]
//   exponent   := [ '-' ] integer
//   atom       := number | identifier | '(' expression ')'
//               | func '(' expression ')' | 'pow' '(' expression ',' exponent ')'
//   func       := 'sqrt' | 'sin' | 'cos' | 'exp' | 'log'
//   identifier := ('x' | 'y') integer          (1-based, bounded by dim)
//   number     := decimal literal
//
// Exponents are restricted to integer literals so every expression is
// smooth away from explicit singular loci (poles, sqrt/log domains).
// Norms must be written via sqrt of squares; there is no abs/min/max.

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"

namespace finsler {

// Jet evaluation error with source position and offending point attached.
class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, int position, std::vector<double> point)
      : std::runtime_error(what + " (expression offset " + std::to_string(position) + ")"),
        position_(position),
        point_(std::move(point)) {}
  int position() const { return position_; }
  const std::vector<double>& point() const { return point_; }

 private:
  int position_;
  std::vector<double> point_;
};

enum class VarKind { Base, Fibre };

namespace exprdetail {

enum class Fn { Sqrt, Sin, Cos, Exp, Log };

struct Node {
  enum class Kind { Literal, Variable, Neg, Binary, PowInt, Call };
  Kind kind;
  int pos = 0;

  double literal = 0.0;
  VarKind var_kind = VarKind::Base;
  int var_index = 0;  // 0-based
  char op = 0;        // '+', '-', '*', '/'
  int exponent = 0;
  Fn fn = Fn::Sqrt;
  std::shared_ptr<const Node> a, b;
};

using NodePtr = std::shared_ptr<const Node>;

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
  Kind kind{Kind::End};
  int pos{0};
  double number{0.0};
  bool is_integer{false};
  std::string_view text{};
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    int pos = static_cast<int>(i_);
    if (i_ >= src_.size()) return {Token::Kind::End, pos};
    char c = src_[i_];
    switch (c) {
      case '+': ++i_; return {Token::Kind::Plus, pos};
      case '-': ++i_; return {Token::Kind::Minus, pos};
      case '*': ++i_; return {Token::Kind::Star, pos};
      case '/': ++i_; return {Token::Kind::Slash, pos};
      case '^': ++i_; return {Token::Kind::Caret, pos};
      case '(': ++i_; return {Token::Kind::LParen, pos};
      case ')': ++i_; return {Token::Kind::RParen, pos};
      case ',': ++i_; return {Token::Kind::Comma, pos};
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = i_;
      bool has_dot = false, has_exp = false;
      while (i_ < src_.size()) {
        char d = src_[i_];
        if (std::isdigit(static_cast<unsigned char>(d))) { ++i_; continue; }
        if (d == '.' && !has_dot && !has_exp) { has_dot = true; ++i_; continue; }
        if ((d == 'e' || d == 'E') && !has_exp && i_ + 1 < src_.size()) {
          char n = src_[i_ + 1];
          if (std::isdigit(static_cast<unsigned char>(n)) || n == '+' || n == '-') {
            has_exp = true;
            i_ += 2;
            continue;
          }
        }
        break;
      }
      std::string_view text = src_.substr(start, i_ - start);
      double value = 0.0;
      auto res = std::from_chars(text.data(), text.data() + text.size(), value);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError("malformed number '" + std::string(text) + "'", pos);
      Token t{Token::Kind::Number, pos};
      t.number = value;
      t.is_integer = !has_dot && !has_exp;
      t.text = text;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = i_;
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
        ++i_;
      Token t{Token::Kind::Ident, pos};
      t.text = src_.substr(start, i_ - start);
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }

 private:
  std::string_view src_;
  std::size_t i_ = 0;
};

class Parser {
 public:
  Parser(std::string_view src, int dim, bool allow_fibre)
      : lex_(src), dim_(dim), allow_fibre_(allow_fibre) {
    advance();
  }

  NodePtr parse_all() {
    NodePtr e = expression();
    if (cur_.kind != Token::Kind::End) throw ParseError("trailing input", cur_.pos);
    return e;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  NodePtr expression() {
    NodePtr lhs = term();
    while (cur_.kind == Token::Kind::Plus || cur_.kind == Token::Kind::Minus) {
      char op = cur_.kind == Token::Kind::Plus ? '+' : '-';
      int pos = cur_.pos;
      advance();
      lhs = binary(op, pos, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (cur_.kind == Token::Kind::Star || cur_.kind == Token::Kind::Slash) {
      char op = cur_.kind == Token::Kind::Star ? '*' : '/';
      int pos = cur_.pos;
      advance();
      lhs = binary(op, pos, lhs, unary());
    }
    return lhs;
  }

  NodePtr unary() {
    if (cur_.kind == Token::Kind::Minus) {
      int pos = cur_.pos;
      advance();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Neg;
      n->pos = pos;
      n->a = unary();
      return n;
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (cur_.kind == Token::Kind::Caret) {
      int pos = cur_.pos;
      advance();
      int e = exponent();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::PowInt;
      n->pos = pos;
      n->exponent = e;
      n->a = base;
      if (cur_.kind == Token::Kind::Caret)
        throw ParseError("chained '^' is not allowed; exponents are integer literals", cur_.pos);
      return n;
    }
    return base;
  }

  int exponent() {
    bool neg = false;
    if (cur_.kind == Token::Kind::Minus) {
      neg = true;
      advance();
    }
    if (cur_.kind != Token::Kind::Number || !cur_.is_integer)
      throw ParseError("exponent must be an integer literal", cur_.pos);
    double v = cur_.number;
    if (v > 64.0) throw ParseError("exponent too large", cur_.pos);
    advance();
    int e = static_cast<int>(v);
    return neg ? -e : e;
  }

  NodePtr atom() {
    switch (cur_.kind) {
      case Token::Kind::Number: {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Literal;
        n->pos = cur_.pos;
        n->literal = cur_.number;
        advance();
        return n;
      }
      case Token::Kind::LParen: {
        advance();
        NodePtr e = expression();
        expect(Token::Kind::RParen, "')'");
        return e;
      }
      case Token::Kind::Ident:
        return ident_or_call();
      case Token::Kind::End:
        throw ParseError("unexpected end of input", cur_.pos);
      default:
        throw ParseError("unexpected token", cur_.pos);
    }
  }

  NodePtr ident_or_call() {
    std::string name(cur_.text);
    int pos = cur_.pos;
    advance();
    if (name == "sqrt" || name == "sin" || name == "cos" || name == "exp" || name == "log") {
      expect(Token::Kind::LParen, "'('");
      NodePtr arg = expression();
      expect(Token::Kind::RParen, "')'");
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Call;
      n->pos = pos;
      n->fn = name == "sqrt"  ? Fn::Sqrt
              : name == "sin" ? Fn::Sin
              : name == "cos" ? Fn::Cos
              : name == "exp" ? Fn::Exp
                              : Fn::Log;
      n->a = arg;
      return n;
    }
    if (name == "pow") {
      expect(Token::Kind::LParen, "'('");
      NodePtr base = expression();
      expect(Token::Kind::Comma, "','");
      int e = exponent();
      expect(Token::Kind::RParen, "')'");
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::PowInt;
      n->pos = pos;
      n->exponent = e;
      n->a = base;
      return n;
    }
    // coordinate identifier x<k> / y<k>
    if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
      int idx = 0;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size()) {
        if (idx < 1 || idx > dim_)
          throw ParseError("identifier '" + name + "' exceeds dimension " + std::to_string(dim_),
                           pos);
        if (name[0] == 'y' && !allow_fibre_)
          throw ParseError("fibre variable '" + name + "' not allowed here", pos);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Variable;
        n->pos = pos;
        n->var_kind = name[0] == 'x' ? VarKind::Base : VarKind::Fibre;
        n->var_index = idx - 1;
        return n;
      }
    }
    throw ParseError("unknown identifier '" + name + "'", pos);
  }

  NodePtr binary(char op, int pos, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->pos = pos;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  void expect(Token::Kind k, const char* what) {
    if (cur_.kind != k) throw ParseError(std::string("expected ") + what, cur_.pos);
    advance();
  }

  Lexer lex_;
  Token cur_{Token::Kind::End, 0};
  int dim_;
  bool allow_fibre_;
};

inline Jet eval_node(const Node& n, std::span<const Jet> vars, int base_dim,
                     const std::vector<double>& point) {
  switch (n.kind) {
    case Node::Kind::Literal:
      return Jet::constant(n.literal, vars[0].num_vars(), vars[0].order());
    case Node::Kind::Variable: {
      int slot = n.var_kind == VarKind::Base ? n.var_index : base_dim + n.var_index;
      return vars[slot];
    }
    case Node::Kind::Neg:
      return -eval_node(*n.a, vars, base_dim, point);
    case Node::Kind::Binary: {
      Jet a = eval_node(*n.a, vars, base_dim, point);
      Jet b = eval_node(*n.b, vars, base_dim, point);
      try {
        switch (n.op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          default: return a / b;
        }
      } catch (const JetError& e) {
        throw EvalError(e.what(), n.pos, point);
      }
    }
    case Node::Kind::PowInt: {
      Jet a = eval_node(*n.a, vars, base_dim, point);
      try {
        return pow_int(a, n.exponent);
      } catch (const JetError& e) {
        throw EvalError(e.what(), n.pos, point);
      }
    }
    case Node::Kind::Call: {
      Jet a = eval_node(*n.a, vars, base_dim, point);
      try {
        switch (n.fn) {
          case Fn::Sqrt: return sqrt(a);
          case Fn::Sin: return sin(a);
          case Fn::Cos: return cos(a);
          case Fn::Exp: return exp(a);
          default: return log(a);
        }
      } catch (const JetError& e) {
        throw EvalError(e.what(), n.pos, point);
      }
    }
  }
  throw std::logic_error("expr: unreachable node kind");
}

inline int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Binary:
      return (n.op == '+' || n.op == '-') ? 1 : 2;
    case Node::Kind::Neg:
      return 3;
    case Node::Kind::PowInt:
      return 4;
    default:
      return 5;
  }
}

inline void print_node(const Node& n, std::string& out);

inline void print_child(const Node& child, int parent_prec, bool is_right, std::string& out) {
  int cp = precedence(child);
  bool paren = cp < parent_prec || (cp == parent_prec && is_right);
  if (paren) out += '(';
  print_node(child, out);
  if (paren) out += ')';
}

inline void print_node(const Node& n, std::string& out) {
  char buf[64];
  switch (n.kind) {
    case Node::Kind::Literal: {
      int len = std::snprintf(buf, sizeof buf, "%.17g", n.literal);
      out.append(buf, buf + len);
      return;
    }
    case Node::Kind::Variable:
      out += (n.var_kind == VarKind::Base ? 'x' : 'y');
      out += std::to_string(n.var_index + 1);
      return;
    case Node::Kind::Neg:
      out += '-';
      print_child(*n.a, precedence(n) + 1, false, out);
      return;
    case Node::Kind::Binary:
      print_child(*n.a, precedence(n), false, out);
      out += ' ';
      out += n.op;
      out += ' ';
      print_child(*n.b, precedence(n), true, out);
      return;
    case Node::Kind::PowInt:
      print_child(*n.a, precedence(n) + 1, false, out);
      out += '^';
      out += std::to_string(n.exponent);
      return;
    case Node::Kind::Call:
      switch (n.fn) {
        case Fn::Sqrt: out += "sqrt"; break;
        case Fn::Sin: out += "sin"; break;
        case Fn::Cos: out += "cos"; break;
        case Fn::Exp: out += "exp"; break;
        case Fn::Log: out += "log"; break;
      }
      out += '(';
      print_node(*n.a, out);
      out += ')';
      return;
  }
}

inline bool node_uses_fibre(const Node& n) {
  if (n.kind == Node::Kind::Variable) return n.var_kind == VarKind::Fibre;
  bool u = false;
  if (n.a) u = u || node_uses_fibre(*n.a);
  if (n.b) u = u || node_uses_fibre(*n.b);
  return u;
}

}  // namespace exprdetail

// An immutable parsed expression over x1..xn (and y1..yn when fibre
// variables are allowed).  Copies share the AST; concurrent evaluation is
// fine.
class Expr {
 public:
  static Expr parse(std::string_view source, int dim, bool allow_fibre_vars) {
    if (dim < 1) throw std::invalid_argument("Expr::parse: dim must be >= 1");
    exprdetail::Parser p(source, dim, allow_fibre_vars);
    Expr e;
    e.root_ = p.parse_all();
    e.dim_ = dim;
    e.allow_fibre_ = allow_fibre_vars;
    return e;
  }

  // Evaluates over jet arithmetic.  For fibre-aware expressions the point
  // must be a TM point (2*dim values, base_dim == dim); otherwise a base
  // point with dim values.
  Jet evaluate(const JetPoint& point, int order) const {
    if (allow_fibre_) {
      if (point.base_dim != dim_ || point.dim() != 2 * dim_)
        throw std::invalid_argument("Expr::evaluate: expected a TM point of matching dimension");
    } else {
      if (point.dim() != dim_ || point.base_dim != dim_)
        throw std::invalid_argument("Expr::evaluate: expected a base point of matching dimension");
    }
    std::vector<Jet> vars = point.coordinate_jets(order);
    return exprdetail::eval_node(*root_, vars, point.base_dim, point.values);
  }

  std::string to_string() const {
    std::string out;
    exprdetail::print_node(*root_, out);
    return out;
  }

  int dim() const { return dim_; }
  bool uses_fibre() const { return exprdetail::node_uses_fibre(*root_); }

 private:
  exprdetail::NodePtr root_;
  int dim_ = 0;
  bool allow_fibre_ = false;
};

// Component list of a base vector field: n expressions in x1..xn only.
struct FieldExpr {
  int dim = 0;
  std::vector<Expr> components;

  // Parses "[e1, e2, ..., en]" (brackets optional); components must not
  // reference fibre variables.
  static FieldExpr parse(std::string_view source, int dim) {
    std::string_view s = source;
    auto trim = [](std::string_view v) {
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
      return v;
    };
    s = trim(s);
    if (!s.empty() && s.front() == '[') {
      if (s.back() != ']') throw ParseError("unterminated '['", 0);
      s = s.substr(1, s.size() - 2);
    }
    FieldExpr f;
    f.dim = dim;
    int depth = 0;
    std::size_t start = 0;
    std::vector<std::string_view> parts;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (i == s.size() || (s[i] == ',' && depth == 0)) {
        parts.push_back(trim(s.substr(start, i - start)));
        start = i + 1;
      } else if (s[i] == '(') {
        ++depth;
      } else if (s[i] == ')') {
        --depth;
      }
    }
    if (static_cast<int>(parts.size()) != dim)
      throw ParseError("field needs exactly " + std::to_string(dim) + " components, got " +
                           std::to_string(parts.size()),
                       0);
    for (auto part : parts) f.components.push_back(Expr::parse(part, dim, false));
    return f;
  }
};

}  // namespace finsler
