#pragma once

#include <memory>
#include <string>

namespace oscamp {

// C^3 ramp: 0 for t <= 0, 1 for t >= width.
double ramp_chi(double t, double width);

// Source expressions over {t, x1}: numbers, pi, + - * / ^, parentheses and
// sin, cos, exp, sqrt, chi (the ramp above).
class Expr {
 public:
  Expr();
  static Expr parse(const std::string& text, double ramp_width = 0.1);
  static Expr constant(double value);

  double operator()(double t, double x1) const;
  bool depends_on_t() const;
  bool depends_on_x1() const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

// Evaluates a constant expression ("sqrt(3)", "2*pi/3").
double eval_constant(const std::string& text);

}  // namespace oscamp
