#include "oscamp/expr.hpp"

#include "oscamp/common.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace oscamp {

double ramp_chi(double t, double width) {
  if (t <= 0) return 0.0;
  if (t >= width) return 1.0;
  const double s = t / width;
  const double s4 = s * s * s * s;
  return s4 * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
}

struct Expr::Node {
  enum Kind { num, var_t, var_x1, neg, add, sub, mul, div, pow, call } kind;
  double value = 0;
  std::string fn;
  double ramp = 0.1;
  std::shared_ptr<const Node> a, b;

  double eval(double t, double x1) const {
    switch (kind) {
      case num: return value;
      case var_t: return t;
      case var_x1: return x1;
      case neg: return -a->eval(t, x1);
      case add: return a->eval(t, x1) + b->eval(t, x1);
      case sub: return a->eval(t, x1) - b->eval(t, x1);
      case mul: return a->eval(t, x1) * b->eval(t, x1);
      case div: return a->eval(t, x1) / b->eval(t, x1);
      case pow: return std::pow(a->eval(t, x1), b->eval(t, x1));
      case call: {
        const double x = a->eval(t, x1);
        if (fn == "sin") return std::sin(x);
        if (fn == "cos") return std::cos(x);
        if (fn == "exp") return std::exp(x);
        if (fn == "sqrt") return std::sqrt(x);
        return ramp_chi(x, ramp);
      }
    }
    return 0;
  }

  bool uses(Kind v) const {
    if (kind == v) return true;
    return (a && a->uses(v)) || (b && b->uses(v));
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

class Parser {
 public:
  Parser(const std::string& s, double ramp, bool allow_vars) : s_(s), ramp_(ramp), vars_(allow_vars) {}

  NodePtr run() {
    NodePtr n = sum();
    skip();
    if (i_ != s_.size()) error("unexpected '" + std::string(1, s_[i_]) + "'");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;
  double ramp_;
  bool vars_;

  [[noreturn]] void error(const std::string& what) const {
    fail(Status::parse_error, "expression '" + s_ + "': " + what + " at column " + std::to_string(i_ + 1));
  }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  static NodePtr make(Expr::Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat('+')) n = make(Expr::Node::add, n, product());
      else if (eat('-')) n = make(Expr::Node::sub, n, product());
      else return n;
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = make(Expr::Node::mul, n, unary());
      else if (eat('/')) n = make(Expr::Node::div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Expr::Node::neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) return make(Expr::Node::pow, base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (i_ >= s_.size()) error("unexpected end");
    const char c = s_[i_];
    if (c == '(') {
      ++i_;
      NodePtr n = sum();
      if (!eat(')')) error("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + i_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) error("bad number");
      i_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::num;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < s_.size() && std::isalnum(static_cast<unsigned char>(s_[j]))) ++j;
      const std::string id = s_.substr(i_, j - i_);
      i_ = j;
      if (id == "pi") {
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::num;
        n->value = pi;
        return n;
      }
      if (id == "t" || id == "x1") {
        if (!vars_) error("variable '" + id + "' not allowed in a constant");
        return make(id == "t" ? Expr::Node::var_t : Expr::Node::var_x1);
      }
      if (id == "sin" || id == "cos" || id == "exp" || id == "sqrt" || id == "chi") {
        if (!eat('(')) error("expected '(' after " + id);
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::call;
        n->fn = id;
        n->ramp = ramp_;
        n->a = sum();
        if (!eat(')')) error("missing ')'");
        return n;
      }
      error("unknown identifier '" + id + "'");
    }
    error("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expr::Expr() : root_(nullptr), text_("0") {}

Expr Expr::parse(const std::string& text, double ramp_width) {
  Expr e;
  e.root_ = Parser(text, ramp_width, true).run();
  e.text_ = text;
  return e;
}

Expr Expr::constant(double value) {
  Expr e;
  auto n = std::make_shared<Node>();
  n->kind = Node::num;
  n->value = value;
  e.root_ = n;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  e.text_ = buf;
  return e;
}

double Expr::operator()(double t, double x1) const { return root_ ? root_->eval(t, x1) : 0.0; }
bool Expr::depends_on_t() const { return root_ && root_->uses(Node::var_t); }
bool Expr::depends_on_x1() const { return root_ && root_->uses(Node::var_x1); }

double eval_constant(const std::string& text) { return Parser(text, 0.1, false).run()->eval(0, 0); }

}  // namespace oscamp
