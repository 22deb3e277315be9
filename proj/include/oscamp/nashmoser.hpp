#pragma once

#include "oscamp/amplitude.hpp"

#include <cstdint>
#include <vector>

namespace oscamp {

// C-infinity cutoff: 1 on r <= 1, 0 on r >= 2.
double cutoff(double r);

// Tangential smoothing of an n x K boundary sample block (x_1 samples, theta_0 modes k = 1..K):
// multiplies the (xi, k) spectrum by cutoff(|(xi, k)| / theta).
CMat smooth(const CMat& u, double theta, double L1);
// d/dtheta of smooth(u, theta), exact in the spectral variable.
CMat smooth_dtheta(const CMat& u, double theta, double L1);
// (sum over (xi, k) of (1 + xi^2 + k^2)^s |u_hat|^2)^{1/2}, u_hat normalized by the grid size.
double sobolev_norm(const CMat& u, double s, double L1);

struct SmoothingCheck {
  char property = 'a';  // (a), (b) or (c)
  double alpha = 0, beta = 0;
  std::vector<double> thetas;
  std::vector<double> constants;  // worst measured ratio per theta
  double worst = 0;
};

// Measures the constants of the three smoothing inequalities on random blocks with algebraic spectral decay.
std::vector<SmoothingCheck> smoothing_constants(const std::vector<double>& thetas, int n = 256, int K = 128,
                                                int samples = 8, std::uint64_t seed = 1);

// Space-time unknowns or residuals of the discretized key subsystem on t_j = j dt, j = 0..J:
// `a` holds the boundary amplitude (n x K per level), `m[q]` the outgoing boundary trace tau_q|_{x_2=0}.
// As residuals, `a[j]` (j >= 1) holds the boundary equation of the step t_{j-1} -> t_j and `m` the interior equation.
struct SpaceTimeData {
  std::vector<CMat> a;
  std::vector<std::vector<CMat>> m;

  SpaceTimeData& operator+=(const SpaceTimeData& o);
  SpaceTimeData& operator-=(const SpaceTimeData& o);
  SpaceTimeData operator+(const SpaceTimeData& o) const;
  SpaceTimeData operator-(const SpaceTimeData& o) const;
  SpaceTimeData operator*(double c) const;
  double sup() const;
  double sup_a() const;
  double sup_m() const;
};

// Key subsystem on the space-time cylinder:
//   interior  m_q - mu_q M_q(a) = 0                         (memory trace of the outgoing corrector)
//   boundary  [a_{j+1} - S a_j - dt/2 (S N_j + N_{j+1})] / dt = (S g_j + g_{j+1}) / 2
// with S the exact x_1 transport over dt and N = -alpha1 d_theta(a^2) - sum_q (f_q/kappa_t) d_theta m_q.
class ProfileSystem {
 public:
  ProfileSystem(const AmplitudeConstants& c, const AmplitudeGrid& grid, const Forcing& g, double T, double dt);

  int levels() const { return J_ + 1; }
  double dt() const { return dt_; }
  const AmplitudeGrid& grid() const { return grid_; }

  SpaceTimeData zero() const;
  SpaceTimeData target() const;  // boundary data, zero interior
  SpaceTimeData apply(const SpaceTimeData& V) const;
  SpaceTimeData derivative(const SpaceTimeData& V, const SpaceTimeData& dV) const;
  // Solves derivative(Vbar, dV) = rhs by marching in time (causal, a_0 = 0).
  SpaceTimeData solve_linear(const SpaceTimeData& Vbar, const SpaceTimeData& rhs) const;
  SpaceTimeData smooth(const SpaceTimeData& V, double theta) const;
  // Space-time Sobolev norm: (dt sum_j |.|_s^2)^{1/2} over both blocks.
  double norm(const SpaceTimeData& V, double s) const;

  // Discrete memory integral M_q(a, b) at level j (n x K).
  CMat memory(int q, const std::vector<CMat>& a, const std::vector<CMat>& b, int j) const;

 private:
  CVec sample(const std::vector<CMat>& a, int k, double T, double shift) const;
  CMat transport(const CMat& a) const;
  CMat burgers(const CMat& a, const CMat& b) const;  // -alpha1 d_theta(a b)
  CMat memory_flux(const std::vector<CMat>& m, int j) const;  // -sum_q (f_q/kappa_t) d_theta m_q
  CMat endpoint(int q, const CMat& a, const CMat& b) const;  // s = t term of M_q(a, b) without weight

  AmplitudeConstants c_;
  AmplitudeGrid grid_;
  int J_ = 0;
  double dt_ = 0;
  std::vector<CMat> g_;
};

struct NashMoserOptions {
  double theta0 = 4;
  double delta = 0.1;  // induction-norm monitor constant
  int max_steps = 30;
  double tol = 1e-6;
  double alpha = 8;         // 2 alpha_0 + 4 with alpha_0 = 2 in two dimensions
  double alpha_tilde = 14;  // 2 alpha - alpha_0
  int s_max = 4;            // Sobolev indices 0..s_max reported for the increments
};

struct NashMoserStep {
  int n = 0;
  double theta = 0, Delta = 0;
  std::vector<double> increment_norms;  // |dV_n|_s, s = 0..s_max
  double quadratic_error = 0;           // sup |e'_n| over both blocks
  double substitution_error = 0;        // sup |e''_n|
  double accumulated = 0, accumulated_boundary = 0;  // sup |E_n|, sup |E~_n|
  double linear_defect = 0;             // sup |e_n - e'_n - e''_n|
  double residual_interior = 0, residual_boundary = 0;
  double bookkeeping = 0, bookkeeping_boundary = 0;  // sup of the two accumulation identities
  bool induction_holds = false;
};

struct NashMoserResult {
  std::vector<NashMoserStep> trace;
  SpaceTimeData V;
  bool converged = false;
};

NashMoserResult nash_moser_solve(const ProfileSystem& sys, const NashMoserOptions& opt = {});

struct PicardStep {
  int n = 0;
  double residual_interior = 0, residual_boundary = 0;
  double high_mode_norm = 0;  // sup over levels of the theta_0 modes k > K/2
  double increment = 0;
};

struct PicardResult {
  std::vector<PicardStep> trace;
  SpaceTimeData V;
  bool converged = false;
};

// V_{n+1} = V_n - L'(0)^{-1}(F(V_n) - g): fixed point with the linear transport only.
PicardResult picard_solve(const ProfileSystem& sys, int max_steps = 30, double tol = 1e-6);

ProfileSystem profile_system(const HyperbolicModel& model, const ModeSet& ms, const BoundarySource& src,
                             const RunConfig& cfg, double dt = 0);

NashMoserOptions nash_moser_options(const RunConfig& cfg);

}  // namespace oscamp
