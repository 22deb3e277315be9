#pragma once

#include "oscamp/model.hpp"

#include <vector>

namespace oscamp {

// Exact solution of the linearized problem (D = Psi = 0, D0 = 0) for boundary
// data G_k(t,x1) = chi(t) h_k(x1), by Laplace transform in t and Fourier
// series in x1. Each (k, xi) block reduces to an ODE in x2 solved on the
// stable eigenspace; the Bromwich integral is summed on a shifted line.
class LinearOracle {
 public:
  struct Options {
    double gamma_T = 1.5;    // abscissa gamma = gamma_T / T
    double period_T = 8;     // Bromwich period P = period_T * T
    double omega_max = 400;  // frequency cutoff
    int x1_samples = 64;
    double coef_floor = 1e-13;
  };

  LinearOracle(const HyperbolicModel& model, const BoundarySource& src, double eps, double T);
  LinearOracle(const HyperbolicModel& model, const BoundarySource& src, double eps, double T, const Options& opt);

  // v(t, x1_i, x2) as an N x n1 matrix.
  Mat row(double t, const Vec& x1, double x2) const;
  int block_count() const { return static_cast<int>(blocks_.size()); }

 private:
  struct Block {
    int k;
    double xi;
    std::vector<double> omega;
    std::vector<CVec> mu;  // stable exponents per frequency
    std::vector<CMat> w;   // N x p weighted stable eigenvectors per frequency
  };

  CVec block_value(const Block& b, double t, double x2) const;

  int N_ = 0;
  double eps_ = 1, gamma_ = 1, period_ = 1, tau_ = 0, eta_ = 0;
  std::vector<Block> blocks_;
};

}  // namespace oscamp
