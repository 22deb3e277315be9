#include "oscamp/corrector.hpp"

#include "oscamp/fourier.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace oscamp {

namespace {

int n_of(const MultiIndex& a) {
  int s = 0;
  for (int x : a) s += x;
  return s;
}

int width_of(const MultiIndex& a) {
  int s = 0;
  for (int x : a) s += std::abs(x);
  return s;
}

double dot_omega(const ModeSet& ms, const MultiIndex& a) {
  double s = 0;
  for (int j = 0; j < ms.M(); ++j) s += a[j] * ms.modes[j].omega;
  return s;
}

bool same_kd(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

TrigSeries scaled(const TrigSeries& s, double c) {
  TrigSeries out = s;
  for (auto& [a, v] : out.coef) v *= c;
  return out;
}

CMat d1_rows(const CMat& C, double L1) {
  CMat out(C.rows(), C.cols());
  for (int i = 0; i < C.rows(); ++i) out.row(i) = spectral_derivative(CVec(C.row(i).transpose()), L1).transpose();
  return out;
}

// Largest |n| whose dropped tail stays below delta in the coefficient l2 norm.
int truncation_level(const TrigSeries& s, double delta) {
  std::map<int, double> energy;
  double total = 0;
  for (const auto& [a, v] : s.coef) {
    const double e = v.squaredNorm();
    energy[width_of(a)] += e;
    total += e;
  }
  if (total == 0) return 0;
  double tail = 0;
  int keep = energy.empty() ? 0 : energy.rbegin()->first;
  for (auto it = energy.rbegin(); it != energy.rend(); ++it) {
    if (tail + it->second > delta * delta * total) break;
    tail += it->second;
    keep = it->first - 1;
  }
  return std::max(keep, 1);
}

TrigSeries truncate(const TrigSeries& s, int level) {
  TrigSeries out(s.M, s.N, s.P);
  for (const auto& [a, v] : s.coef)
    if (width_of(a) <= level) out.coef[a] = v;
  return out;
}

double slowest_positive(const Mat& Bd) {
  Eigen::EigenSolver<Mat> es(Bd);
  double s = INFINITY;
  for (int i = 0; i < Bd.rows(); ++i) {
    const double l = es.eigenvalues()(i).real();
    if (l > 1e-12) s = std::min(s, l);
  }
  return s;
}

double largest_positive(const Mat& Bd) {
  Eigen::EigenSolver<Mat> es(Bd);
  double s = 0;
  for (int i = 0; i < Bd.rows(); ++i) s = std::max(s, es.eigenvalues()(i).real());
  return s;
}

}  // namespace

void TwoScalePoly::add(int kappa0, double kappa_d, const CMat& U) {
  for (auto& t : terms)
    if (t.kappa0 == kappa0 && same_kd(t.kappa_d, kappa_d)) {
      t.U += U;
      return;
    }
  terms.push_back({kappa0, kappa_d, U});
}

const TwoScalePoly::Term* TwoScalePoly::find(int kappa0, double kappa_d) const {
  for (const auto& t : terms)
    if (t.kappa0 == kappa0 && same_kd(t.kappa_d, kappa_d)) return &t;
  return nullptr;
}

double TwoScalePoly::max_abs() const {
  double m = 0;
  for (const auto& t : terms)
    if (t.U.size() > 0) m = std::max(m, t.U.cwiseAbs().maxCoeff());
  return m;
}

CVec TwoScalePoly::eval(double theta0, double xi_d, int point) const {
  CVec out = CVec::Zero(N);
  for (const auto& t : terms) out += t.U.col(point) * std::exp(cd(0, t.kappa0 * theta0 + t.kappa_d * xi_d));
  return out;
}

TwoScalePoly substitute(const ModeSet& ms, const TrigSeries& f) {
  TwoScalePoly out(f.N, f.P);
  for (const auto& [a, v] : f.coef) out.add(n_of(a), dot_omega(ms, a), v);
  return out;
}

TwoScalePoly apply_cL0(const ModeSet& ms, const TwoScalePoly& U) {
  TwoScalePoly out(U.N, U.P);
  for (const auto& t : U.terms) out.add(t.kappa0, t.kappa_d, cd(0, 1) * ms.L_at(t.kappa0, t.kappa_d).cast<cd>() * t.U);
  return out;
}

FastSolve solve_fast_system(const ModeSet& ms, const TrigSeries& F, double det_floor, double residual_gate) {
  const double scale = std::max(1.0, F.max_abs());
  const TrigSeries EF = project_E(ms, F);
  if (EF.max_abs() > 1e-10 * scale) fail(Status::invalid_argument, "fast system requires EF = 0, |EF| = " + std::to_string(EF.max_abs()));
  FastSolve out;
  out.U = TwoScalePoly(F.N, F.P);
  // characteristic content grouped by (m, k): all alphas in a group land on the same (k, k omega_m) term
  std::map<std::pair<int, int>, CMat> groups;
  const cd I(0, 1);
  for (const auto& [a, v] : F.coef) {
    const ModeLabel lab = classify_mode(ms, a);
    if (lab.kind == ModeLabel::zero) continue;
    if (lab.kind == ModeLabel::characteristic) {
      auto key = std::make_pair(lab.m, lab.n);
      auto it = groups.find(key);
      if (it == groups.end()) groups.emplace(key, v);
      else it->second += v;
      continue;
    }
    const int k = n_of(a);
    const double kd = dot_omega(ms, a);
    const Mat L = ms.L_at(k, kd);
    auto lu = L.partialPivLu();
    const double det = std::abs(lu.determinant());
    out.min_det = std::min(out.min_det, det);
    if (det < det_floor) fail(Status::small_divisor, "small divisor in the fast system, |det| = " + std::to_string(det));
    out.U.add(k, kd, lu.inverse().cast<cd>() * v / I);
  }
  for (const auto& [key, v] : groups) {
    const auto [m, k] = key;
    const CMat L = I * ms.L_at(k, k * ms.modes[m].omega).cast<cd>();
    Eigen::CompleteOrthogonalDecomposition<CMat> cod;
    cod.setThreshold(1e-10);
    cod.compute(L);
    const CMat rhs = (CMat::Identity(F.N, F.N) - ms.modes[m].P.cast<cd>()) * v;
    out.U.add(k, k * ms.modes[m].omega, cod.solve(rhs));
  }
  TwoScalePoly diff = apply_cL0(ms, out.U);
  for (const auto& t : substitute(ms, F).terms) diff.add(t.kappa0, t.kappa_d, -t.U);
  out.residual = diff.max_abs() / scale;
  if (!(out.residual <= residual_gate))
    fail(Status::internal, "fast system residual " + std::to_string(out.residual) + " above the gate");
  return out;
}

CorrectorOptions corrector_options(const RunConfig& cfg) {
  CorrectorOptions o;
  o.v1_choice = cfg.v1_choice;
  o.delta = cfg.delta;
  return o;
}

CorrectedApprox::CorrectedApprox(const HyperbolicModel& model, const ModeSet& ms, const ProfileSolution& prof,
                                 const BoundarySource& src, double eps, const std::vector<double>& times,
                                 const CorrectorOptions& opt)
    : model_(model), ms_(ms), prof_(prof), src_(src), eps_(eps), opt_(opt) {
  if (model.d != 2) fail(Status::invalid_argument, "corrector supports d = 2 only");
  if (eps <= 0) fail(Status::invalid_argument, "eps must be positive");
  if (opt.v1_choice != "min_norm" && opt.v1_choice != "zero_e" && opt.v1_choice != "solvability")
    fail(Status::invalid_argument, "v1_choice must be min_norm, zero_e or solvability");
  A0_ = model.A(0);
  A1_ = model.A(1);
  const auto& c = prof.constants;
  const int K = prof.state.history.grid().K;
  for (int m : ms.incoming_ids) {
    const Mode& md = ms.modes[m];
    if (md.multiplicity() != 1) fail(Status::invalid_argument, "corrector requires simple incoming modes");
    InConst ic;
    ic.m = m;
    ic.s = c.s[m];
    ic.r = md.r.col(0);
    const Vec l = md.l.row(0).transpose();
    ic.g0 = md.R * A0_ * ic.r;
    ic.g1 = md.R * A1_ * ic.r;
    ic.c00 = l.dot(A0_ * ic.g0);
    ic.c01 = l.dot(A1_ * ic.g0) + l.dot(A0_ * ic.g1);
    ic.c11 = l.dot(A1_ * ic.g1);
    ic.d = model.D.is_zero() ? 0.0 : l.dot(A0_ * model.D(ic.r, ic.r));
    in_.push_back(ic);
  }
  // cross interactions landing on an incoming phase are outside the supported class
  if (!model.D.is_zero())
    for (std::size_t i = 0; i < ms.incoming_ids.size(); ++i)
      for (std::size_t j = i + 1; j < ms.incoming_ids.size(); ++j)
        for (int a = -K; a <= K; ++a)
          for (int b = -K; b <= K; ++b) {
            if (a == 0 || b == 0) continue;
            MultiIndex al(ms.M(), 0);
            al[ms.incoming_ids[i]] = a;
            al[ms.incoming_ids[j]] = b;
            const ModeLabel lab = classify_mode(ms, al);
            if (lab.kind == ModeLabel::characteristic && ms.modes[lab.m].incoming())
              fail(Status::invalid_argument, "resonant interaction into an incoming phase is not supported");
          }
  psi_ee_ = model.Psi.is_zero() ? Vec(Vec::Zero(model.p())) : model.Psi(ms.e, ms.e);
  if (opt.v1_choice == "solvability") solve_a1();
  if (opt.with_mean && !times.empty()) solve_mean(times);
}

// e-component a1 of the incoming trace: sum_m b.B R_m L(d) V1_m = 0 at x_2 = 0 gives
// kt (d_t + w d_1) a1 = -sum_m b.B R_m L(d)(ie_m + r_m tau_m^0), integrated along the boundary rays.
void CorrectedApprox::solve_a1() {
  const History& h = prof_.state.history;
  const AmplitudeGrid& g = h.grid();
  const int n = g.n, K = g.K, N = ms_.N();
  const Mat& B = model_.boundary;
  double kt = 0, k1 = 0;
  std::vector<Eigen::RowVectorXd> hm;
  for (const InConst& ic : in_) {
    hm.push_back(ms_.b.transpose() * B * ms_.modes[ic.m].R);
    kt += ic.s * hm.back().dot(A0_ * ic.r);
    k1 += ic.s * hm.back().dot(A1_ * ic.r);
  }
  if (std::abs(kt) < 1e-12) fail(Status::not_wr, "vanishing time coefficient in the corrector solvability");
  const double w = k1 / kt;
  const double dl = 1e-3;
  auto forcing = [&](double T) {
    CMat F = CMat::Zero(n, K);
    if (T <= 0) return F;
    const double Tp = std::min(T + dl, h.last_time()), Tm = T - dl;
    const Ray r0 = ray(T, 0, false), rp = ray(Tp, 0, false), rm = ray(Tm, 0, false);
    const double den = Tp - Tm;
    for (std::size_t q = 0; q < in_.size(); ++q) {
      const Vec& v = prof_.constants.v[in_[q].m];
      const Mat P0 = A0_ - Mat::Identity(N, N) / v(1), P1 = A1_ - Mat::Identity(N, N) * (v(0) / v(1));
      const Eigen::RowVectorXcd h0 = (hm[q] * P0).cast<cd>(), h1 = (hm[q] * P1).cast<cd>();
      const double t0 = hm[q].dot(A0_ * in_[q].r), t1 = hm[q].dot(A1_ * in_[q].r);
      for (int k = 1; k <= K; ++k) {
        const CMat ieT = (rp.ie[q][k - 1] - rm.ie[q][k - 1]) / den;
        const CMat ieX = d1_rows(r0.ie[q][k - 1], g.L1);
        const CVec tT = (rp.tau_b[q].col(k - 1) - rm.tau_b[q].col(k - 1)) / den;
        const CVec tX = spectral_derivative(CVec(r0.tau_b[q].col(k - 1)), g.L1);
        F.col(k - 1) -= (h0 * ieT + h1 * ieX).transpose() + t0 * tT + t1 * tX;
      }
    }
    return CMat(F / kt);
  };
  a1_ = History(g);
  CMat a = CMat::Zero(n, K), f = forcing(h.t(0));
  a1_.push(h.t(0), a);
  a1_.set_derivative(0, f);
  for (int j = 1; j < h.levels(); ++j) {
    const double dt = h.t(j) - h.t(j - 1);
    const CMat fn = forcing(h.t(j));
    for (int k = 0; k < K; ++k)
      a.col(k) = spectral_shift(CVec(a.col(k) + 0.5 * dt * f.col(k)), -w * dt, g.L1) + 0.5 * dt * fn.col(k);
    f = fn;
    a1_.push(h.t(j), a);
    CMat adot = f;
    for (int k = 0; k < K; ++k) adot.col(k) -= w * spectral_derivative(CVec(a.col(k)), g.L1);
    a1_.set_derivative(j, adot);
  }
  use_a1_ = true;
}

CorrectedApprox::Ray CorrectedApprox::ray(double T, double shift, bool with_a1) const {
  const History& h = prof_.state.history;
  const AmplitudeGrid& g = h.grid();
  const auto& c = prof_.constants;
  const int n = g.n, K = g.K, N = ms_.N(), p = model_.p();
  const int nin = static_cast<int>(in_.size());
  Ray out;
  out.tau_b.assign(nin, CMat::Zero(n, K));
  out.S.assign(nin, CMat::Zero(n, K));
  out.ie.assign(nin, std::vector<CMat>(K, CMat::Zero(N, n)));
  if (T <= 0) return out;

  CMat A(n, K);
  std::vector<CVec> AT(K), ATT(K);
  for (int k = 1; k <= K; ++k) {
    A.col(k - 1) = h.mode(k, T, shift);
    AT[k - 1] = h.mode_derivative(k, T, shift, 1);
    ATT[k - 1] = h.mode_derivative(k, T, shift, 2);
  }
  const CMat sq = square_modes(A);
  for (int k = 1; k <= K; ++k) {
    const CVec a = A.col(k - 1);
    const CVec aX = spectral_derivative(a, g.L1), aXX = spectral_derivative(a, g.L1, 2);
    const CVec aTX = spectral_derivative(AT[k - 1], g.L1);
    const cd f = 1.0 / cd(0, k);
    for (int q = 0; q < nin; ++q) {
      const InConst& ic = in_[q];
      out.ie[q][k - 1] = -ic.s * f * (ic.g0.cast<cd>() * AT[k - 1].transpose() + ic.g1.cast<cd>() * aX.transpose());
      out.S[q].col(k - 1) = -ic.s * f * (ic.c00 * ATT[k - 1] + ic.c01 * aTX + ic.c11 * aXX) + ic.d * ic.s * ic.s * sq.col(k - 1);
    }
  }

  // boundary right-hand side per theta_0 mode: G_k - Psi(e,e)(a^2)_k - B r_q tau_q - B (I - E) V1
  const Mat& B = model_.boundary;
  const Vec x = g.x();
  std::vector<CMat> rhs(K, CMat::Zero(p, n));
  for (int k = 1; k <= K; ++k) {
    if (src_.modes.count(k))
      for (int i = 0; i < n; ++i) rhs[k - 1].col(i) = src_.G(k, T, x(i) + shift);
    rhs[k - 1] -= psi_ee_.cast<cd>() * sq.col(k - 1).transpose();
    for (int q = 0; q < nin; ++q) rhs[k - 1] -= B.cast<cd>() * out.ie[q][k - 1];
  }
  for (const auto& mem : c.memory) {
    CMat Mq = memory_term_exact(h, mem, c, T, 0);
    const Vec Br = B * ms_.modes[mem.tr.m].r.col(0);
    for (int j = 1; j <= K; ++j) {
      CVec col = Mq.col(j - 1);
      if (col.squaredNorm() == 0) continue;
      if (shift != 0) col = spectral_shift(col, shift, g.L1);
      rhs[j - 1] -= mem.mu * Br.cast<cd>() * col.transpose();
    }
  }

  Mat S(N, nin);
  Vec ec(nin);
  for (int q = 0; q < nin; ++q) {
    S.col(q) = in_[q].r;
    ec(q) = in_[q].s;
  }
  const Mat BS = B * S;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod;
  cod.setThreshold(1e-10);
  cod.compute(BS);
  const Vec e = S * ec;
  const bool min_norm = opt_.v1_choice == "min_norm";
  const bool add_a1 = with_a1 && use_a1_;
  CMat a1;
  if (add_a1) {
    a1.resize(n, K);
    for (int k = 1; k <= K; ++k) a1.col(k - 1) = a1_.mode(k, T, shift);
  }
  double defect = 0;
  for (int k = 1; k <= K; ++k)
    for (int i = 0; i < n; ++i) {
      const CVec r = rhs[k - 1].col(i);
      defect = std::max(defect, std::abs(ms_.b.cast<cd>().dot(r)));
      CVec cvec = cod.solve(Mat(r.real())).cast<cd>() + cd(0, 1) * cod.solve(Mat(r.imag())).cast<cd>();
      if (min_norm) cvec -= (e.cast<cd>().dot(S.cast<cd>() * cvec) / e.squaredNorm()) * ec.cast<cd>();
      if (add_a1) cvec += a1(i, k - 1) * ec.cast<cd>();
      for (int q = 0; q < nin; ++q) out.tau_b[q](i, k - 1) = cvec(q);
    }
  diag_.trace_solvability = std::max(diag_.trace_solvability, defect);
  return out;
}

TrigSeries CorrectedApprox::V0(double t, double x2) const {
  const History& h = prof_.state.history;
  const int n = h.grid().n, K = h.grid().K, M = ms_.M(), N = ms_.N();
  TrigSeries out(M, N, n);
  for (const InConst& ic : in_) {
    const Vec& v = prof_.constants.v[ic.m];
    const double T = t - x2 / v(1), sh = -v(0) * x2 / v(1);
    if (T <= 0) continue;
    for (int k = 1; k <= K; ++k) {
      const CVec a = h.mode(k, T, sh);
      if (a.squaredNorm() == 0) continue;
      const CMat C = ic.s * ic.r.cast<cd>() * a.transpose();
      out.coef[single(M, ic.m, k)] = C;
      out.coef[single(M, ic.m, -k)] = C.conjugate();
    }
  }
  return out;
}

TrigSeries CorrectedApprox::V1(double t, double x2) const {
  const History& h = prof_.state.history;
  const auto& c = prof_.constants;
  const int n = h.grid().n, K = h.grid().K, M = ms_.M(), N = ms_.N();
  TrigSeries out(M, N, n);
  for (std::size_t q = 0; q < in_.size(); ++q) {
    const InConst& ic = in_[q];
    const Vec& v = c.v[ic.m];
    const double T = t - x2 / v(1), sh = -v(0) * x2 / v(1);
    if (T <= 0) continue;
    const Ray rd = ray(T, sh);
    for (int k = 1; k <= K; ++k) {
      const CVec tau = rd.tau_b[q].col(k - 1) - x2 * rd.S[q].col(k - 1);
      const CMat C = rd.ie[q][k - 1] + ic.r.cast<cd>() * tau.transpose();
      out.add(single(M, ic.m, k), C);
      out.add(single(M, ic.m, -k), C.conjugate());
    }
  }
  for (const auto& mem : c.memory) {
    const CMat Mq = memory_term_exact(h, mem, c, t, x2);
    const Vec r = ms_.modes[mem.tr.m].r.col(0);
    for (int j = 1; j <= K; ++j) {
      if (Mq.col(j - 1).squaredNorm() == 0) continue;
      const CMat C = mem.mu * r.cast<cd>() * Mq.col(j - 1).transpose();
      out.add(single(M, mem.tr.m, j), C);
      out.add(single(M, mem.tr.m, -j), C.conjugate());
    }
  }
  return out;
}

void CorrectedApprox::solve_mean(const std::vector<double>& times) {
  const History& h = prof_.state.history;
  const AmplitudeGrid& g = h.grid();
  const double T = *std::max_element(times.begin(), times.end());
  if (T <= 0) return;
  SolverGrid grid;
  grid.n1 = g.n;
  grid.L1 = g.L1;
  grid.L2 = 1.1 * largest_positive(model_.Bd()) * T;
  double dx2 = g.dx();
  if (src_.ramp > 0) dx2 = std::min(dx2, slowest_positive(model_.Bd()) * src_.ramp / opt_.mean_ppw_cells);
  grid.n2 = std::max(8, static_cast<int>(std::ceil(grid.L2 / dx2)));
  SolverOptions so;
  so.linear = true;
  so.T = T;
  const int K = g.K;
  const Vec psi = psi_ee_;
  auto energy = [&h, K](double t, double shift) {
    Vec e = Vec::Zero(h.grid().n);
    for (int k = 1; k <= K; ++k) e += 2 * h.mode(k, t, shift).cwiseAbs2();
    return e;
  };
  BoundaryData bd = [psi, energy](double t, const Vec&) -> Mat { return -psi * energy(t, 0).transpose(); };
  std::vector<Vec> Drr;
  for (const InConst& ic : in_) Drr.push_back(model_.D.is_zero() ? Vec(Vec::Zero(ms_.N())) : model_.D(ic.r, ic.r));
  InteriorSource isrc;
  if (!model_.D.is_zero())
    isrc = [this, grid, energy, Drr](double t, SpaceTimeField& rhs) {
      const int n1 = grid.n1;
      for (int j = 0; j < grid.rows(); ++j) {
        const double x2 = grid.x2(j);
        for (std::size_t q = 0; q < in_.size(); ++q) {
          const Vec& v = prof_.constants.v[in_[q].m];
          const double Tm = t - x2 / v(1);
          if (Tm <= 0) continue;
          const Vec e = energy(Tm, -v(0) * x2 / v(1)) * (in_[q].s * in_[q].s);
          for (int cc = 0; cc < rhs.N(); ++cc)
            if (Drr[q](cc) != 0) rhs.comp[cc].segment(j * n1, n1) -= Drr[q](cc) * e;
        }
      }
    };
  DirectSolver solver(model_, grid, so, bd, isrc);
  const Trajectory tr = run_solver(solver, T, stable_dt(model_, grid, so.cfl), times);
  mean_ = tr.snapshots;
  mean_dt_ = tr.dt;
  mean_times_.clear();
  for (const auto& f : mean_) mean_times_.push_back(f.t);
}

Mat CorrectedApprox::mean_field(double t, double x2) const {
  const int n = prof_.state.history.grid().n, N = ms_.N();
  Mat out = Mat::Zero(N, n);
  if (!opt_.with_mean || t <= 0) return out;
  int best = -1;
  for (std::size_t i = 0; i < mean_times_.size(); ++i)
    if (std::abs(mean_times_[i] - t) <= 0.5 * mean_dt_ + 1e-12) best = static_cast<int>(i);
  if (best < 0) fail(Status::invalid_argument, "mean field was not computed at t = " + std::to_string(t));
  const SpaceTimeField& f = mean_[best];
  const SolverGrid& g = f.grid;
  if (x2 < 0 || x2 > g.L2) return out;
  // cubic Lagrange in x_2 through the four nearest rows
  const double s = x2 / g.dx2();
  int j0 = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, std::max(0, g.n2 - 3));
  for (int a = 0; a < 4; ++a) {
    double w = 1;
    for (int b = 0; b < 4; ++b)
      if (b != a) w *= (s - (j0 + b)) / static_cast<double>(a - b);
    for (int cc = 0; cc < N; ++cc) out.row(cc) += w * f.comp[cc].segment((j0 + a) * g.n1, g.n1).transpose();
  }
  return out;
}

TrigSeries CorrectedApprox::U2_source(double t, double x2) const {
  const History& h = prof_.state.history;
  const double L1 = h.grid().L1;
  const double hs = opt_.fd_step > 0 ? opt_.fd_step : prof_.dt;
  const TrigSeries v0 = V0(t, x2);
  const int K0 = truncation_level(v0, opt_.delta);
  auto V1t = [&](double tt, double xx) { return V1(tt, xx); };
  TrigSeries dt, d2;
  if (t + hs <= h.last_time() + 1e-12)
    dt = scaled(V1t(t + hs, x2) - V1t(t - hs, x2), 0.5 / hs);
  else
    dt = scaled(scaled(V1t(t, x2), 3) - scaled(V1t(t - hs, x2), 4) + V1t(t - 2 * hs, x2), 0.5 / hs);
  TrigSeries centre;
  if (x2 >= hs) {
    d2 = scaled(V1t(t, x2 + hs) - V1t(t, x2 - hs), 0.5 / hs);
    centre = V1t(t, x2);
  } else {
    centre = V1t(t, x2);
    d2 = scaled(scaled(centre, -3) + scaled(V1t(t, x2 + hs), 4) - V1t(t, x2 + 2 * hs), 0.5 / hs);
  }
  const int K1 = truncation_level(centre, opt_.delta);
  diag_.kept_modes = std::max({diag_.kept_modes, K0, K1});
  dt = truncate(dt, K1);
  d2 = truncate(d2, K1);
  centre = truncate(centre, K1);

  TrigSeries X(ms_.M(), ms_.N(), h.grid().n);
  const CMat A0 = A0_.cast<cd>(), A1 = A1_.cast<cd>();
  for (const auto& [a, v] : dt.coef) X.add(a, A0 * v);
  for (const auto& [a, v] : d2.coef) X.add(a, v);
  for (const auto& [a, v] : centre.coef) X.add(a, A1 * d1_rows(v, L1));
  if (!model_.D.is_zero()) {
    const TrigSeries w = truncate(v0, K0);
    for (const auto& [a, va] : w.coef)
      for (const auto& [b, vb] : w.coef) {
        MultiIndex ab(a.size());
        bool zero = true;
        for (std::size_t j = 0; j < a.size(); ++j) {
          ab[j] = a[j] + b[j];
          zero = zero && ab[j] == 0;
        }
        if (zero) continue;
        CMat C(va.rows(), va.cols());
        for (int i = 0; i < va.cols(); ++i) C.col(i) = model_.D(CVec(va.col(i)), CVec(vb.col(i)));
        X.add(ab, A0 * C);
      }
  }
  return scaled(X - project_E(ms_, X), -1);
}

CMat CorrectedApprox::resample(const CMat& C, const Vec& x1) const {
  const AmplitudeGrid& g = prof_.state.history.grid();
  const int n1 = static_cast<int>(x1.size());
  bool uniform = n1 >= g.n;
  for (int i = 0; uniform && i < n1; ++i) uniform = std::abs(x1(i) - i * g.L1 / n1) <= 1e-9 * g.L1;
  CMat out(C.rows(), n1);
  for (int r = 0; r < C.rows(); ++r) {
    const CVec row = C.row(r).transpose();
    out.row(r) = (uniform ? spectral_upsample(row, n1) : spectral_resample(row, g.L1, x1)).transpose();
  }
  return out;
}

Mat CorrectedApprox::evaluate(const TrigSeries& s, const Vec& x1, double t, double x2) const {
  const double tau = model_.beta(0), eta = model_.beta(1);
  Mat out = Mat::Zero(ms_.N(), x1.size());
  for (const auto& [a, v] : s.coef) {
    const CMat C = resample(v, x1);
    const int k = n_of(a);
    const double kd = dot_omega(ms_, a);
    for (int i = 0; i < x1.size(); ++i)
      out.col(i) += (C.col(i) * std::exp(cd(0, (k * (tau * t + eta * x1(i)) + kd * x2) / eps_))).real();
  }
  return out;
}

Mat CorrectedApprox::leading(double t, const Vec& x1, double x2) const { return evaluate(V0(t, x2), x1, t, x2); }

Mat CorrectedApprox::corrected(double t, const Vec& x1, double x2) {
  Mat out = evaluate(V0(t, x2) + scaled(V1(t, x2), eps_), x1, t, x2);
  if (opt_.with_mean) out += eps_ * resample(mean_field(t, x2).cast<cd>(), x1).real();
  if (opt_.with_u2) {
    const FastSolve fs = solve_fast_system(ms_, U2_source(t, x2));
    diag_.fast_residual = std::max(diag_.fast_residual, fs.residual);
    diag_.u2_min_det = std::min(diag_.u2_min_det, fs.min_det);
    diag_.u2_terms = std::max(diag_.u2_terms, static_cast<int>(fs.U.terms.size()));
    const double tau = model_.beta(0), eta = model_.beta(1);
    for (const auto& term : fs.U.terms) {
      const CMat C = resample(term.U, x1);
      for (int i = 0; i < x1.size(); ++i)
        out.col(i) += eps_ * eps_ *
                      (C.col(i) * std::exp(cd(0, (term.kappa0 * (tau * t + eta * x1(i)) + term.kappa_d * x2) / eps_))).real();
    }
  }
  return out;
}

}  // namespace oscamp
