#pragma once

#include "oscamp/common.hpp"
#include "oscamp/expr.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oscamp {

// Bilinear map R^n x R^n -> R^out, Q(u,w)_i = u^T comp[i] w.
struct Quadratic {
  std::vector<Mat> comp;

  Quadratic() = default;
  Quadratic(int out, int n);

  int out_dim() const { return static_cast<int>(comp.size()); }
  int in_dim() const { return comp.empty() ? 0 : static_cast<int>(comp[0].rows()); }
  bool is_zero() const;
  double asymmetry() const;

  Vec operator()(const Vec& u, const Vec& w) const;
  CVec operator()(const CVec& u, const CVec& w) const;
  // J with J w = Q(u,w) + Q(w,u).
  Mat jacobian(const Vec& u) const;
};

struct EulerParams {
  double v = 1, u = 1, c = 1, eta = 1;
  double mach() const { return u / c; }
};

struct HyperbolicModel {
  int d = 2;
  int N = 0;
  std::vector<Mat> B;  // B_1..B_d; B.back() is the normal matrix B_d
  Mat boundary;        // p x N
  Mat D0;              // N x N, zero when absent
  Quadratic D;         // interior quadratic term
  Quadratic Psi;       // boundary quadratic term
  Vec beta;            // (tau, eta_1..eta_{d-1})
  std::optional<EulerParams> euler;

  int p() const { return static_cast<int>(boundary.rows()); }
  const Mat& Bd() const { return B.back(); }
  // A_0 = B_d^{-1}, A_j = B_d^{-1} B_j for j = 1..d-1.
  Mat A(int j) const;
  // B_d^{-1}(tau I + sum_j eta_j B_j); its eigenvalues are -omega_m.
  Mat normal_form() const;
  bool has_D0() const { return D0.size() > 0 && D0.norm() > 0; }
};

HyperbolicModel euler_model(double v, double u, double c, double eta);

struct ValidationReport {
  bool pass = true;
  std::vector<std::string> failures;
  double bd_condition = 0;
  int p_positive = 0;
  int boundary_rank = 0;
  double max_imag = 0;
  double max_eigvec_condition = 0;
  double d_asymmetry = 0;
};

ValidationReport validate(const HyperbolicModel& model, int n_samples = 64, std::uint64_t seed = 1);

// G(t,x1,theta0) = sum_{k != 0} G_k(t,x1) e^{ik theta0}, G_{-k} = conj(G_k).
struct BoundarySource {
  struct ModeExpr {
    std::vector<Expr> re, im;  // one entry per boundary component
  };

  int p = 0;
  double L1 = 2 * pi;
  double ramp = 0.1;
  std::map<int, ModeExpr> modes;  // k > 0 only

  void set_mode(int k, const std::vector<std::string>& re, const std::vector<std::string>& im);
  CVec G(int k, double t, double x1) const;
  int max_mode() const { return modes.empty() ? 0 : modes.rbegin()->first; }
  bool empty() const { return modes.empty(); }
  // Throws when some mode is nonzero for t < 0.
  void check_causal() const;
};

struct RunConfig {
  double eps = 0.125;
  std::vector<double> eps_list{0.25, 0.125, 0.0625};
  double ppw = 20;
  double cfl = 0.9;
  double T = 0.8;
  double L2 = 0;  // 0 -> 1.1 * (max normal speed) * T
  std::string integrator = "rk4";
  int upwind_order = 5;
  int newton_max = 5;
  double newton_tol = 1e-12;

  int K = 8;
  int n_x1_amp = 64;
  double cfl_amp = 0.5;
  std::string memory = "exact";
  double tau_dx2 = 0;  // 0 -> match dx1 of the amplitude grid

  std::string v1_choice = "min_norm";
  double delta = 1e-3;

  double theta0 = 4;
  double nm_delta = 0.1;
  int nm_steps = 30;
  double nm_tol = 1e-6;

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";
};

}  // namespace oscamp
