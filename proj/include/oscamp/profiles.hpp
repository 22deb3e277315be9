#pragma once

#include "oscamp/spectral.hpp"

#include <map>
#include <vector>

namespace oscamp {

using MultiIndex = std::vector<int>;

// V(x, theta) = sum_alpha V_alpha(x) e^{i alpha.theta}; each coefficient is N x P
// (P sample points of x, P = 1 for constant fields).
struct TrigSeries {
  int M = 0, N = 0, P = 1;
  std::map<MultiIndex, CMat> coef;

  TrigSeries() = default;
  TrigSeries(int M_, int N_, int P_ = 1) : M(M_), N(N_), P(P_) {}

  CMat& at(const MultiIndex& alpha);
  const CMat* find(const MultiIndex& alpha) const;
  void add(const MultiIndex& alpha, const CMat& value);
  bool single_phase() const;
  int support_width() const;  // max number of nonzero components over the support
  double max_abs() const;
  // Largest coefficient difference over the union of supports.
  double max_diff(const TrigSeries& other) const;
  TrigSeries operator-(const TrigSeries& other) const;
  TrigSeries operator+(const TrigSeries& other) const;
  CVec eval(const Vec& theta, int point = 0) const;
};

MultiIndex single(int M, int m, int n);

struct ModeLabel {
  enum Kind { zero, characteristic, noncharacteristic } kind = zero;
  int m = -1;  // characteristic phase
  int n = 0;   // n_alpha = sum alpha_k
};

ModeLabel classify_mode(const ModeSet& ms, const MultiIndex& alpha);

TrigSeries project_E(const ModeSet& ms, const TrigSeries& V);

struct RResult {
  TrigSeries value;
  double min_det = INFINITY;  // small-divisor monitor over noncharacteristic alphas
};
RResult partial_inverse_R(const ModeSet& ms, const TrigSeries& F, double det_floor = 1e-10);

TrigSeries apply_cL(const ModeSet& ms, const TrigSeries& V);

// Scalar theta-periodic series, index k -> coefficient of e^{ik theta}.
using ScalarSeries = std::map<int, cd>;

ScalarSeries prepare(const ScalarSeries& a, int n);
double l2_norm(const ScalarSeries& a);
cd eval(const ScalarSeries& a, double theta);

// (2 pi)^{-1}-normalized average of sigma_p sigma_r over the resonant line, as a series in theta_m.
ScalarSeries interaction_integral(const ScalarSeries& sigma_p, const ScalarSeries& sigma_r, const ResonanceTriple& tr);
// Same quantity by trapezoid quadrature of (2pi)^{-1} int sigma_p(theta + n_r s) sigma_r(theta - n_p s) ds.
cd interaction_quadrature(const ScalarSeries& sigma_p, const ScalarSeries& sigma_r, const ResonanceTriple& tr,
                          double theta, int nodes = 256);

ScalarSeries primitive_mean_zero(const ScalarSeries& a);
ScalarSeries derivative(const ScalarSeries& a);

}  // namespace oscamp
