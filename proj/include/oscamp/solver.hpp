#pragma once

#include "oscamp/spectral.hpp"

#include <functional>
#include <vector>

namespace oscamp {

struct SolverGrid {
  int n1 = 0, n2 = 0;  // x_1 points (periodic), x_2 intervals (nodes 0..n2)
  double L1 = 0, L2 = 0;
  double dx1() const { return L1 / n1; }
  double dx2() const { return L2 / n2; }
  int rows() const { return n2 + 1; }
  int size() const { return rows() * n1; }
  Vec x1() const;
  double x2(int j) const { return j * dx2(); }
};

// v(t, x_1, x_2) in R^N; comp[c](j * n1 + i) is component c at (x_1 = i dx1, x_2 = j dx2).
struct SpaceTimeField {
  SolverGrid grid;
  double t = 0;
  std::vector<Vec> comp;

  SpaceTimeField() = default;
  SpaceTimeField(const SolverGrid& g, int N) : grid(g), comp(N, Vec::Zero(g.size())) {}
  int N() const { return static_cast<int>(comp.size()); }
  Vec at(int j, int i) const;
  double sup() const;
};

// Boundary data at x_2 = 0 (p x n1) and interior source (added to the right-hand side).
using BoundaryData = std::function<Mat(double t, const Vec& x1)>;
using InteriorSource = std::function<void(double t, SpaceTimeField& rhs)>;

struct SolverOptions {
  double eps = 0.125;
  double ppw = 20;
  double cfl = 0.9;
  double T = 0.8;
  double L2 = 0;  // 0: 1.1 * (largest eigenvalue of B_d) * T
  std::string integrator = "rk4";
  int upwind_order = 5;
  int newton_max = 5;
  double newton_tol = 1e-12;
  bool linear = false;  // drop D and Psi
  std::vector<double> snapshot_times;
};

SolverOptions solver_options(const RunConfig& cfg, double eps);

struct Trajectory {
  SolverGrid grid;
  double dt = 0;
  int steps = 0;
  std::vector<SpaceTimeField> snapshots;
  std::vector<std::pair<double, double>> sup_log;  // (t, sup |v|)
  double max_boundary_residual = 0;
  double sup() const;
};

class DirectSolver {
 public:
  DirectSolver(const HyperbolicModel& model, const SolverGrid& grid, const SolverOptions& opt, BoundaryData h,
               InteriorSource src = nullptr);

  const SpaceTimeField& field() const { return v_; }
  SpaceTimeField& field() { return v_; }
  double max_boundary_residual() const { return max_res_; }
  // One explicit step; the boundary condition is imposed on every stage.
  void advance(double dt);
  SpaceTimeField rhs(const SpaceTimeField& v) const;
  void impose_boundary(SpaceTimeField& v, double t);

 private:
  struct Chars {
    Mat R, L;
    Vec lam;
  };
  void add_x1_flux(const SpaceTimeField& v, SpaceTimeField& out) const;
  void add_x2_flux(const SpaceTimeField& v, SpaceTimeField& out) const;

  HyperbolicModel model_;
  SolverGrid grid_;
  SolverOptions opt_;
  BoundaryData h_;
  InteriorSource src_;
  Chars c1_, c2_;
  std::vector<int> in_, out_;  // incoming / outgoing characteristic indices of B_d
  SpaceTimeField v_;
  double max_res_ = 0;
};

// dx1 and dx2 resolve the carrier wavelengths with ppw points; ramp_width > 0
// also puts ppw/2 points of x2 across the footprint of the temporal ramp
// carried by the slowest incoming characteristic.
SolverGrid make_grid(const HyperbolicModel& model, const ModeSet& ms, double L1, const SolverOptions& opt,
                     double ramp_width = 0);
SolverGrid make_grid(const HyperbolicModel& model, const ModeSet& ms, const BoundarySource& src, const SolverOptions& opt);
// Same sizing from the dispersion roots alone (no weak-stability requirement).
SolverGrid make_grid(const HyperbolicModel& model, double L1, const SolverOptions& opt, double ramp_width = 0);
double stable_dt(const HyperbolicModel& model, const SolverGrid& grid, double cfl);

// Boundary data eps^2 G(t, x_1, phi_0 / eps), phi_0 = tau t + eta x_1.
BoundaryData oscillatory_data(const BoundarySource& src, const Vec& beta, double eps);

Trajectory solve_direct(const HyperbolicModel& model, const BoundarySource& src, const SolverOptions& opt);
Trajectory run_solver(DirectSolver& solver, double T, double dt, const std::vector<double>& snapshot_times);

struct ErrorReport {
  double t = 0;
  double sup_error = 0;   // sup |u - u_app| with u = v / eps
  double l2_error = 0;    // discrete L2 over the grid, same scaling
  double sup_ref = 0;     // sup |u|
};

// approx(t, x_2 row) -> N x n1 values of v_app (unscaled).
using ApproxField = std::function<Mat(double t, int row)>;
ErrorReport compare_to_approx(const SpaceTimeField& v, const ApproxField& approx, double eps);

// Singular Sobolev norm of U(x_1, theta_0) sampled on an n1 x n_theta grid over [0,L1) x [0, 2pi):
// sum over (xi, k) of (gamma^2 + (xi + k eta / eps)^2)^s |U_hat|^2 (times the cell area), square-rooted.
double singular_norm(const CMat& samples, double L1, double s, double gamma, double eps, double eta);

}  // namespace oscamp
