#include "oscamp/solver.hpp"
#include "oscamp/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace oscamp {

Vec SolverGrid::x1() const {
  Vec x(n1);
  for (int i = 0; i < n1; ++i) x(i) = i * dx1();
  return x;
}

Vec SpaceTimeField::at(int j, int i) const {
  Vec out(N());
  for (int c = 0; c < N(); ++c) out(c) = comp[c](j * grid.n1 + i);
  return out;
}

double SpaceTimeField::sup() const {
  double s = 0;
  for (int k = 0; k < grid.size(); ++k) {
    double n2 = 0;
    for (const auto& c : comp) n2 += c(k) * c(k);
    s = std::max(s, n2);
  }
  return std::sqrt(s);
}

double Trajectory::sup() const {
  double s = 0;
  for (const auto& [t, v] : sup_log) s = std::max(s, v);
  return s;
}

SolverOptions solver_options(const RunConfig& cfg, double eps) {
  SolverOptions o;
  o.eps = eps;
  o.ppw = cfg.ppw;
  o.cfl = cfg.cfl;
  o.T = cfg.T;
  o.L2 = cfg.L2;
  o.integrator = cfg.integrator;
  o.upwind_order = cfg.upwind_order;
  o.newton_max = cfg.newton_max;
  o.newton_tol = cfg.newton_tol;
  return o;
}

namespace {

void real_eigen(const Mat& B, Mat& R, Mat& L, Vec& lam) {
  Eigen::EigenSolver<Mat> es(B);
  if (es.eigenvalues().imag().cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, B.norm()))
    fail(Status::not_hyperbolic, "flux matrix has complex eigenvalues");
  R = es.eigenvectors().real();
  lam = es.eigenvalues().real();
  auto lu = R.fullPivLu();
  if (!lu.isInvertible()) fail(Status::not_hyperbolic, "flux matrix is not diagonalizable");
  L = lu.inverse();
}

double max_positive(const Mat& B) {
  Eigen::EigenSolver<Mat> es(B, false);
  return es.eigenvalues().real().maxCoeff();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double spectral_radius(const Mat& B) {
  Eigen::EigenSolver<Mat> es(B, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

SolverGrid make_grid(const HyperbolicModel& model, const ModeSet& ms, double L1, const SolverOptions& opt,
                     double ramp_width) {
  (void)ms;
  return make_grid(model, L1, opt, ramp_width);
}

SolverGrid make_grid(const HyperbolicModel& model, double L1, const SolverOptions& opt, double ramp_width) {
  if (model.d != 2) fail(Status::invalid_argument, "direct solver supports d = 2 only");
  if (opt.ppw < 12) fail(Status::cfl_violation, "points per wavelength must be at least 12");
  SolverGrid g;
  g.L1 = L1;
  const double eta = std::abs(model.beta(1));
  double wmax = 0;
  for (double w : dispersion_roots(model, model.beta)) wmax = std::max(wmax, std::abs(w));
  const double dx1 = eta > 0 ? (2 * pi * opt.eps / eta) / opt.ppw : L1 / 64;
  double dx2 = (2 * pi * opt.eps / std::max(wmax, eta)) / opt.ppw;
  if (ramp_width > 0) {
    Eigen::EigenSolver<Mat> es(model.Bd(), false);
    double slow = std::numeric_limits<double>::infinity();
    for (int i = 0; i < model.N; ++i)
      if (es.eigenvalues()(i).real() > 0) slow = std::min(slow, es.eigenvalues()(i).real());
    dx2 = std::min(dx2, slow * ramp_width / (0.5 * opt.ppw));
  }
  g.n1 = static_cast<int>(std::ceil(L1 / dx1 - 1e-9));
  g.L2 = opt.L2 > 0 ? opt.L2 : 1.1 * max_positive(model.Bd()) * opt.T;
  g.n2 = static_cast<int>(std::ceil(g.L2 / dx2 - 1e-9));
  return g;
}

SolverGrid make_grid(const HyperbolicModel& model, const ModeSet& ms, const BoundarySource& src, const SolverOptions& opt) {
  return make_grid(model, ms, src.L1, opt, src.ramp);
}

double stable_dt(const HyperbolicModel& model, const SolverGrid& grid, double cfl) {
  return cfl / (spectral_radius(model.B[0]) / grid.dx1() + spectral_radius(model.B[1]) / grid.dx2());
}

DirectSolver::DirectSolver(const HyperbolicModel& model, const SolverGrid& grid, const SolverOptions& opt, BoundaryData h,
                           InteriorSource src)
    : model_(model), grid_(grid), opt_(opt), h_(std::move(h)), src_(std::move(src)), v_(grid, model.N) {
  if (model.d != 2) fail(Status::invalid_argument, "direct solver supports d = 2 only");
  if (opt.upwind_order != 3 && opt.upwind_order != 5) fail(Status::invalid_argument, "upwind order must be 3 or 5");
  real_eigen(model.B[0], c1_.R, c1_.L, c1_.lam);
  real_eigen(model.B[1], c2_.R, c2_.L, c2_.lam);
  for (int i = 0; i < model.N; ++i) (c2_.lam(i) > 0 ? in_ : out_).push_back(i);
  if (static_cast<int>(in_.size()) != model.p())
    fail(Status::invalid_argument, "boundary rows do not match the number of incoming characteristics");
  if (opt.linear) {
    model_.D = Quadratic(model.N, model.N);
    model_.Psi = Quadratic(model.p(), model.N);
  }
  if (model_.D.comp.empty()) model_.D = Quadratic(model.N, model.N);
  if (model_.Psi.comp.empty()) model_.Psi = Quadratic(model.p(), model.N);
}

void DirectSolver::add_x1_flux(const SpaceTimeField& v, SpaceTimeField& out) const {
  const int n1 = grid_.n1, rows = grid_.rows(), N = model_.N;
  const double h = grid_.dx1();
  for (int ch = 0; ch < N; ++ch) {
    const double lam = c1_.lam(ch);
    if (std::abs(lam) < 1e-14) continue;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < rows; ++j) {
      std::vector<double> w(n1), d(n1);
      const int base = j * n1;
      for (int i = 0; i < n1; ++i) {
        double s = 0;
        for (int c = 0; c < N; ++c) s += c1_.L(ch, c) * v.comp[c](base + i);
        w[i] = s;
      }
      auto W = [&](int i) { return w[(i % n1 + n1) % n1]; };
      for (int i = 0; i < n1; ++i) {
        if (opt_.upwind_order == 5) {
          d[i] = lam > 0 ? (-2 * W(i - 3) + 15 * W(i - 2) - 60 * W(i - 1) + 20 * W(i) + 30 * W(i + 1) - 3 * W(i + 2)) / (60 * h)
                         : (3 * W(i - 2) - 30 * W(i - 1) - 20 * W(i) + 60 * W(i + 1) - 15 * W(i + 2) + 2 * W(i + 3)) / (60 * h);
        } else {
          d[i] = lam > 0 ? (W(i - 2) - 6 * W(i - 1) + 3 * W(i) + 2 * W(i + 1)) / (6 * h)
                         : (-2 * W(i - 1) - 3 * W(i) + 6 * W(i + 1) - W(i + 2)) / (6 * h);
        }
      }
      for (int c = 0; c < N; ++c) {
        const double coef = lam * c1_.R(c, ch);
        if (coef == 0) continue;
        for (int i = 0; i < n1; ++i) out.comp[c](base + i) -= coef * d[i];
      }
    }
  }
}

void DirectSolver::add_x2_flux(const SpaceTimeField& v, SpaceTimeField& out) const {
  const int n1 = grid_.n1, rows = grid_.rows(), N = model_.N;
  const double h = grid_.dx2();
  Vec w(grid_.size());
  for (int ch = 0; ch < N; ++ch) {
    const double lam = c2_.lam(ch);
    w.setZero();
    for (int c = 0; c < N; ++c) w += c2_.L(ch, c) * v.comp[c];
    auto W = [&](int j, int i) { return j < rows ? w(j * n1 + i) : 0.0; };
#pragma omp parallel for schedule(static)
    for (int j = 0; j < rows; ++j) {
      std::vector<double> d(n1);
      for (int i = 0; i < n1; ++i) {
        double r;
        if (lam > 0) {
          // incoming: upwind from the boundary side
          if (j == 0) r = 0;  // replaced by the boundary condition
          else if (j == 1) r = (-2 * W(0, i) - 3 * W(1, i) + 6 * W(2, i) - W(3, i)) / (6 * h);
          else if (opt_.upwind_order == 5 && j == 2) r = (W(0, i) - 8 * W(1, i) + 8 * W(3, i) - W(4, i)) / (12 * h);
          else if (opt_.upwind_order == 5)
            r = (-2 * W(j - 3, i) + 15 * W(j - 2, i) - 60 * W(j - 1, i) + 20 * W(j, i) + 30 * W(j + 1, i) - 3 * W(j + 2, i)) / (60 * h);
          else r = (W(j - 2, i) - 6 * W(j - 1, i) + 3 * W(j, i) + 2 * W(j + 1, i)) / (6 * h);
        } else {
          if (j == 0) r = (-11 * W(0, i) + 18 * W(1, i) - 9 * W(2, i) + 2 * W(3, i)) / (6 * h);
          else if (opt_.upwind_order == 5 && j == 1)
            r = (-3 * W(0, i) - 10 * W(1, i) + 18 * W(2, i) - 6 * W(3, i) + W(4, i)) / (12 * h);
          else if (opt_.upwind_order == 5)
            r = (3 * W(j - 2, i) - 30 * W(j - 1, i) - 20 * W(j, i) + 60 * W(j + 1, i) - 15 * W(j + 2, i) + 2 * W(j + 3, i)) / (60 * h);
          else r = (-2 * W(j - 1, i) - 3 * W(j, i) + 6 * W(j + 1, i) - W(j + 2, i)) / (6 * h);
        }
        d[i] = r;
      }
      for (int c = 0; c < N; ++c) {
        const double coef = lam * c2_.R(c, ch);
        if (coef == 0) continue;
        for (int i = 0; i < n1; ++i) out.comp[c](j * n1 + i) -= coef * d[i];
      }
    }
  }
}

SpaceTimeField DirectSolver::rhs(const SpaceTimeField& v) const {
  SpaceTimeField out(grid_, model_.N);
  out.t = v.t;
  add_x1_flux(v, out);
  add_x2_flux(v, out);
  const int N = model_.N;
  if (!model_.D.is_zero()) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < grid_.size(); ++k) {
      Vec u(N);
      for (int c = 0; c < N; ++c) u(c) = v.comp[c](k);
      const Vec q = model_.D(u, u);
      for (int c = 0; c < N; ++c) out.comp[c](k) -= q(c);
    }
  }
  if (model_.has_D0())
    for (int c = 0; c < N; ++c)
      for (int e = 0; e < N; ++e)
        if (model_.D0(c, e) != 0) out.comp[c] -= model_.D0(c, e) * v.comp[e];
  if (src_) src_(v.t, out);
  return out;
}

void DirectSolver::impose_boundary(SpaceTimeField& v, double t) {
  const int n1 = grid_.n1, N = model_.N, p = model_.p();
  const Mat H = h_ ? h_(t, grid_.x1()) : Mat::Zero(p, n1);
  Mat Rin(N, p), Rout(N, N - p);
  for (int a = 0; a < p; ++a) Rin.col(a) = c2_.R.col(in_[a]);
  for (int a = 0; a < N - p; ++a) Rout.col(a) = c2_.R.col(out_[a]);
  const Mat& B = model_.boundary;
  const Mat BRin = B * Rin;
  const auto lu0 = BRin.partialPivLu();
  const bool quad = !model_.Psi.is_zero();
  Vec u(N);
  for (int i = 0; i < n1; ++i) {
    for (int c = 0; c < N; ++c) u(c) = v.comp[c](i);
    Vec wout(N - p);
    for (int a = 0; a < N - p; ++a) wout(a) = c2_.L.row(out_[a]).dot(u);
    const Vec fixed = Rout * wout;
    Vec win(p);
    if (quad) {
      // start from the evolved incoming values, which are O(dt) from the root
      for (int a = 0; a < p; ++a) win(a) = c2_.L.row(in_[a]).dot(u);
      double res = 0;
      for (int it = 0;; ++it) {
        const Vec vv = fixed + Rin * win;
        const Vec F = B * vv + model_.Psi(vv, vv) - H.col(i);
        res = F.cwiseAbs().maxCoeff();
        if (res <= opt_.newton_tol || it == opt_.newton_max) break;
        win -= (BRin + model_.Psi.jacobian(vv) * Rin).partialPivLu().solve(F);
      }
      if (res > opt_.newton_tol)
        fail(Status::newton_failure, "boundary Newton did not converge at x1 node " + std::to_string(i) +
                                         ", t = " + std::to_string(t) + ", residual " + sci(res));
    } else {
      win = lu0.solve(H.col(i) - B * fixed);
    }
    u = fixed + Rin * win;
    const double res = (B * u + model_.Psi(u, u) - H.col(i)).cwiseAbs().maxCoeff();
    max_res_ = std::max(max_res_, res);
    for (int c = 0; c < N; ++c) v.comp[c](i) = u(c);
  }
}

namespace {

void axpy(SpaceTimeField& y, double a, const SpaceTimeField& x) {
  for (int c = 0; c < y.N(); ++c) y.comp[c] += a * x.comp[c];
}

}  // namespace

void DirectSolver::advance(double dt) {
  const double t = v_.t;
  auto stage = [&](const SpaceTimeField& base, double a, const SpaceTimeField& k, double ts) {
    SpaceTimeField s = base;
    axpy(s, a, k);
    s.t = ts;
    impose_boundary(s, ts);
    return s;
  };
  if (opt_.integrator == "rk4") {
    const SpaceTimeField k1 = rhs(v_);
    const SpaceTimeField k2 = rhs(stage(v_, dt / 2, k1, t + dt / 2));
    const SpaceTimeField k3 = rhs(stage(v_, dt / 2, k2, t + dt / 2));
    const SpaceTimeField k4 = rhs(stage(v_, dt, k3, t + dt));
    axpy(v_, dt / 6, k1);
    axpy(v_, dt / 3, k2);
    axpy(v_, dt / 3, k3);
    axpy(v_, dt / 6, k4);
  } else if (opt_.integrator == "rk3") {
    const SpaceTimeField k1 = rhs(v_);
    SpaceTimeField s1 = stage(v_, dt, k1, t + dt);
    const SpaceTimeField k2 = rhs(s1);
    SpaceTimeField s2 = v_;
    for (int c = 0; c < s2.N(); ++c) s2.comp[c] = 0.75 * v_.comp[c] + 0.25 * (s1.comp[c] + dt * k2.comp[c]);
    s2.t = t + dt / 2;
    impose_boundary(s2, t + dt / 2);
    const SpaceTimeField k3 = rhs(s2);
    for (int c = 0; c < v_.N(); ++c) v_.comp[c] = (v_.comp[c] + 2 * (s2.comp[c] + dt * k3.comp[c])) / 3;
  } else {
    const SpaceTimeField k1 = rhs(v_);
    const SpaceTimeField k2 = rhs(stage(v_, dt, k1, t + dt));
    axpy(v_, dt / 2, k1);
    axpy(v_, dt / 2, k2);
  }
  v_.t = t + dt;
  impose_boundary(v_, v_.t);
}

BoundaryData oscillatory_data(const BoundarySource& src, const Vec& beta, double eps) {
  return [&src, beta, eps](double t, const Vec& x1) {
    Mat H = Mat::Zero(src.p, x1.size());
    for (const auto& [k, me] : src.modes)
      for (int i = 0; i < x1.size(); ++i) {
        const double phase = k * (beta(0) * t + beta(1) * x1(i)) / eps;
        H.col(i) += 2 * (src.G(k, t, x1(i)) * std::exp(cd(0, phase))).real();
      }
    return Mat(eps * eps * H);
  };
}

Trajectory run_solver(DirectSolver& solver, double T, double dt, const std::vector<double>& snapshot_times) {
  Trajectory tr;
  tr.grid = solver.field().grid;
  tr.steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
  tr.dt = T / tr.steps;
  std::vector<int> snap_steps;
  for (double ts : snapshot_times) snap_steps.push_back(static_cast<int>(std::lround(ts / tr.dt)));
  auto record = [&](int step) {
    for (int s : snap_steps)
      if (s == step) {
        tr.snapshots.push_back(solver.field());
        break;
      }
  };
  solver.impose_boundary(solver.field(), solver.field().t);
  record(0);
  tr.sup_log.push_back({solver.field().t, solver.field().sup()});
  for (int n = 1; n <= tr.steps; ++n) {
    solver.advance(tr.dt);
    const double s = solver.field().sup();
    if (!std::isfinite(s) || s > 1e6) fail(Status::blow_up, "direct solver blow-up at t = " + std::to_string(solver.field().t));
    tr.sup_log.push_back({solver.field().t, s});
    record(n);
  }
  tr.max_boundary_residual = solver.max_boundary_residual();
  return tr;
}

Trajectory solve_direct(const HyperbolicModel& model, const BoundarySource& src, const SolverOptions& opt) {
  const SolverGrid grid = make_grid(model, src.L1, opt, src.ramp);
  DirectSolver solver(model, grid, opt, oscillatory_data(src, model.beta, opt.eps));
  std::vector<double> snaps = opt.snapshot_times;
  if (snaps.empty()) snaps.push_back(opt.T);
  return run_solver(solver, opt.T, stable_dt(model, grid, opt.cfl), snaps);
}

ErrorReport compare_to_approx(const SpaceTimeField& v, const ApproxField& approx, double eps) {
  ErrorReport rep;
  rep.t = v.t;
  const SolverGrid& g = v.grid;
  double l2 = 0;
  for (int j = 0; j < g.rows(); ++j) {
    const Mat A = approx(v.t, j);
    if (A.rows() != v.N() || A.cols() != g.n1) fail(Status::invalid_argument, "approximation does not match the solver grid");
    for (int i = 0; i < g.n1; ++i) {
      double e2 = 0, r2 = 0;
      for (int c = 0; c < v.N(); ++c) {
        const double val = v.comp[c](j * g.n1 + i);
        e2 += (val - A(c, i)) * (val - A(c, i));
        r2 += val * val;
      }
      rep.sup_error = std::max(rep.sup_error, std::sqrt(e2));
      rep.sup_ref = std::max(rep.sup_ref, std::sqrt(r2));
      l2 += e2 * g.dx1() * g.dx2() * ((j == 0 || j == g.n2) ? 0.5 : 1.0);
    }
  }
  rep.sup_error /= eps;
  rep.sup_ref /= eps;
  rep.l2_error = std::sqrt(l2) / eps;
  return rep;
}

double singular_norm(const CMat& samples, double L1, double s, double gamma, double eps, double eta) {
  const int n1 = static_cast<int>(samples.rows()), nt = static_cast<int>(samples.cols());
  CMat F = samples;
  for (int q = 0; q < nt; ++q) {
    CVec col = F.col(q);
    fft(col);
    F.col(q) = col;
  }
  for (int i = 0; i < n1; ++i) {
    CVec row = F.row(i).transpose();
    fft(row);
    F.row(i) = row.transpose();
  }
  F /= static_cast<double>(n1) * nt;
  const Vec xi = wavenumbers(n1, L1, false);
  const Vec kk = wavenumbers(nt, 2 * pi, false);
  double acc = 0;
  for (int i = 0; i < n1; ++i)
    for (int q = 0; q < nt; ++q) {
      const double X = xi(i) + kk(q) * eta / eps;
      acc += std::pow(gamma * gamma + X * X, s) * std::norm(F(i, q));
    }
  return std::sqrt(acc * L1 * 2 * pi);
}

}  // namespace oscamp
