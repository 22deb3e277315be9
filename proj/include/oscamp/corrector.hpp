#pragma once

#include "oscamp/amplitude.hpp"
#include "oscamp/solver.hpp"

#include <string>
#include <vector>

namespace oscamp {

// U(x, theta_0, xi_d) = sum_j U_j(x) e^{i kappa0_j theta_0 + i kappa_d_j xi_d}; each U_j is N x P.
struct TwoScalePoly {
  struct Term {
    int kappa0 = 0;
    double kappa_d = 0;
    CMat U;
  };
  int N = 0, P = 1;
  std::vector<Term> terms;

  TwoScalePoly() = default;
  TwoScalePoly(int N_, int P_) : N(N_), P(P_) {}

  // Adds into the term with the same (kappa0, kappa_d) up to a relative 1e-12 match.
  void add(int kappa0, double kappa_d, const CMat& U);
  const Term* find(int kappa0, double kappa_d) const;
  double max_abs() const;
  CVec eval(double theta0, double xi_d, int point = 0) const;
};

// F(x, theta) |_{theta -> (theta_0, xi_d)}: alpha goes to (n_alpha, alpha.omega).
TwoScalePoly substitute(const ModeSet& ms, const TrigSeries& f);

// (L(d phi_0) d_theta0 + d_xi) U applied coefficient-wise.
TwoScalePoly apply_cL0(const ModeSet& ms, const TwoScalePoly& U);

struct FastSolve {
  TwoScalePoly U;
  double residual = 0;  // max |cL0 U - F_sub| / max(1, max |F|)
  double min_det = INFINITY;
};

// Solves cL0 U = F|_{theta -> (theta_0, xi_d)} for finite F with EF = 0.
FastSolve solve_fast_system(const ModeSet& ms, const TrigSeries& F, double det_floor = 1e-10,
                            double residual_gate = 1e-10);

struct CorrectorOptions {
  // "min_norm", "zero_e", or "solvability" (e-component from the next-order boundary solvability, linear part)
  std::string v1_choice = "min_norm";
  double delta = 1e-3;                  // trigonometric truncation tolerance for U2
  bool with_mean = true;
  bool with_u2 = true;
  double fd_step = 0;  // finite-difference step for L(d) V1 in t and x_2; 0 uses the amplitude time step
  double mean_ppw_cells = 10;           // x_2 cells across the ramp footprint for the mean field
};

CorrectorOptions corrector_options(const RunConfig& cfg);

struct CorrectorDiagnostics {
  double fast_residual = 0;      // worst forward residual of the U2 solve
  double trace_solvability = 0;  // worst |b . rhs| of the incoming trace system (amplitude-equation defect)
  double u2_min_det = INFINITY;
  int u2_terms = 0;
  int kept_modes = 0;            // theta modes kept after the delta truncation
};

// Leading and corrected approximations built from the key-subsystem solution:
//   u_app = V0(x, phi/eps),  u_c = (V0 + eps V1)(x, phi/eps) + eps^2 U2_p(x, phi_0/eps, x_2/eps).
// V1 = mean field + incoming and outgoing tau + (I - E) V1; the mean field is precomputed at `times`.
class CorrectedApprox {
 public:
  CorrectedApprox(const HyperbolicModel& model, const ModeSet& ms, const ProfileSolution& prof,
                  const BoundarySource& src, double eps, const std::vector<double>& times,
                  const CorrectorOptions& opt = {});

  // u-scale values (N x x1.size()) on a uniform x1 grid over [0, L1) with at least the profile resolution.
  Mat leading(double t, const Vec& x1, double x2) const;
  Mat corrected(double t, const Vec& x1, double x2);

  // Profile-level series on the amplitude x_1 grid (P = n points).
  TrigSeries V0(double t, double x2) const;
  TrigSeries V1(double t, double x2) const;  // without the mean field
  TrigSeries U2_source(double t, double x2) const;
  Mat mean_field(double t, double x2) const;  // N x n, zero when disabled

  const CorrectorDiagnostics& diagnostics() const { return diag_; }
  double eps() const { return eps_; }

 private:
  // Incoming pieces at one foot point (T, x_1 + shift), one entry per incoming mode.
  struct Ray {
    std::vector<CMat> tau_b;             // n x K trace of tau_m
    std::vector<CMat> S;                 // n x K, d tau_m / d x_2 along the ray is -S
    std::vector<std::vector<CMat>> ie;   // (I - E) V1 on theta_m mode k: N x n, index k - 1
  };
  struct InConst {
    int m = 0;
    double s = 0;
    Vec r, g0, g1;
    double c00 = 0, c01 = 0, c11 = 0, d = 0;
  };
  Ray ray(double T, double shift, bool with_a1 = true) const;
  void solve_a1();
  Mat evaluate(const TrigSeries& s, const Vec& x1, double t, double x2) const;
  CMat resample(const CMat& C, const Vec& x1) const;
  void solve_mean(const std::vector<double>& times);

  const HyperbolicModel& model_;
  const ModeSet& ms_;
  const ProfileSolution& prof_;
  const BoundarySource& src_;
  double eps_;
  CorrectorOptions opt_;
  Mat A0_, A1_;
  std::vector<InConst> in_;
  Vec psi_ee_;
  double mean_dt_ = 0;
  History a1_;
  bool use_a1_ = false;
  std::vector<double> mean_times_;
  std::vector<SpaceTimeField> mean_;
  mutable CorrectorDiagnostics diag_;
};

}  // namespace oscamp
