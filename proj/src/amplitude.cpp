#include "oscamp/amplitude.hpp"
#include "oscamp/fourier.hpp"

#include <algorithm>
#include <cmath>

namespace oscamp {

AmplitudeConstants compute_constants(const HyperbolicModel& model, const ModeSet& ms,
                                     const std::vector<ResonanceTriple>& triples) {
  for (const auto& md : ms.modes)
    if (md.multiplicity() != 1)
      fail(Status::invalid_argument, "amplitude equation is implemented for simple characteristic roots only");
  if (model.has_D0()) fail(Status::invalid_argument, "amplitude equation is implemented for D0 = 0 only");
  AmplitudeConstants c;
  c.kappa = ms.xlop;
  c.kappa_t = ms.xlop(0);
  if (std::abs(c.kappa_t) < 1e-12) fail(Status::not_wr, "boundary transport field has vanishing time coefficient");
  c.w = model.d > 1 ? ms.xlop(1) / c.kappa_t : 0;
  c.b = ms.b;
  c.e = ms.e;
  c.f2 = model.Psi.comp.empty() ? 0 : -ms.b.dot(model.Psi(ms.e, ms.e));
  c.alpha1 = c.f2 / c.kappa_t;
  for (int m = 0; m < ms.M(); ++m) {
    c.s.push_back(ms.modes[m].incoming() ? ms.e_coef[m](0) : 0.0);
    c.v.push_back(ms.modes[m].v);
  }
  const Mat A0 = model.A(0);
  for (const auto& tr : triples) {
    AmplitudeConstants::Memory mem;
    mem.tr = tr;
    const Vec rp = ms.modes[tr.p].r.col(0), rr = ms.modes[tr.r].r.col(0), rq = ms.modes[tr.m].r.col(0);
    if (!model.D.comp.empty()) mem.d = ms.modes[tr.m].l.row(0).dot(A0 * (model.D(rp, rr) + model.D(rr, rp)));
    mem.f = -ms.b.dot(model.boundary * rq);
    const double vqd = ms.modes[tr.m].v(model.d - 1);
    mem.mu = -vqd * mem.d * c.s[tr.p] * c.s[tr.r];
    mem.source = mem.mu;
    mem.alpha2 = mem.f * mem.mu / c.kappa_t;
    c.memory.push_back(mem);
  }
  if (model.euler) {
    const auto& e = *model.euler;
    const double M2 = e.mach() * e.mach();
    c.euler_normalizer = e.u * e.v * (1 + M2) / (M2 * e.eta);
  }
  return c;
}

Vec AmplitudeGrid::x() const {
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = i * dx();
  return x;
}

namespace {

CVec conj_if(const CVec& v, bool neg) { return neg ? CVec(v.conjugate()) : v; }

CMat shift_cols(const CMat& m, double shift, double L) {
  if (shift == 0) return m;
  CMat out(m.rows(), m.cols());
  for (int j = 0; j < m.cols(); ++j) out.col(j) = spectral_shift(m.col(j), shift, L);
  return out;
}

CMat deriv_cols(const CMat& m, double L) {
  CMat out(m.rows(), m.cols());
  for (int j = 0; j < m.cols(); ++j) out.col(j) = spectral_derivative(m.col(j), L, 1);
  return out;
}

}  // namespace

void History::push(double t, const CMat& a) {
  if (!t_.empty() && t <= t_.back()) fail(Status::internal, "history times must increase");
  t_.push_back(t);
  a_.push_back(a);
  adot_.push_back(CMat());
  has_dot_.push_back(false);
}

void History::set_derivative(int level, const CMat& adot) {
  adot_[level] = adot;
  has_dot_[level] = true;
}

CVec History::raw(int k, double T, const Tail* tail) const {
  const int n = grid_.n;
  if (k == 0 || std::abs(k) > grid_.K || t_.empty() || T <= t_.front()) return CVec::Zero(n);
  const int col = std::abs(k) - 1;
  const bool neg = k < 0;
  const double tol = 1e-11 * (1 + std::abs(T));
  if (T > t_.back() + tol) {
    if (!tail || T > tail->t + tol) fail(Status::history_gap, "history gap: value requested at t = " + std::to_string(T));
    const int j = levels() - 1;
    const double h = tail->t - t_[j];
    const double s = std::min(1.0, (T - t_[j]) / h);
    const CVec a0 = a_[j].col(col), a1 = tail->a->col(col);
    if (!has_dot_[j]) return conj_if(a0 + s * (a1 - a0), neg);
    const CVec d0 = adot_[j].col(col) * h;
    return conj_if(a0 + s * d0 + s * s * (a1 - a0 - d0), neg);
  }
  auto it = std::upper_bound(t_.begin(), t_.end(), T);
  int j = static_cast<int>(it - t_.begin()) - 1;
  j = std::clamp(j, 0, levels() - 1);
  if (std::abs(T - t_[j]) <= tol) return conj_if(a_[j].col(col), neg);
  if (j + 1 < levels() && std::abs(T - t_[j + 1]) <= tol) return conj_if(a_[j + 1].col(col), neg);
  if (j + 1 >= levels()) return conj_if(a_[j].col(col), neg);
  const double h = t_[j + 1] - t_[j];
  const double s = (T - t_[j]) / h;
  const CVec a0 = a_[j].col(col), a1 = a_[j + 1].col(col);
  if (has_dot_[j] && has_dot_[j + 1]) {
    const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
    return conj_if(h00 * a0 + h10 * h * adot_[j].col(col) + h01 * a1 + h11 * h * adot_[j + 1].col(col), neg);
  }
  if (has_dot_[j]) {
    const CVec d0 = adot_[j].col(col) * h;
    return conj_if(a0 + s * d0 + s * s * (a1 - a0 - d0), neg);
  }
  return conj_if(a0 + s * (a1 - a0), neg);
}

CVec History::mode_derivative(int k, double T, double shift, int order) const {
  const int n = grid_.n;
  if (order < 1 || order > 2) fail(Status::invalid_argument, "mode_derivative supports orders 1 and 2");
  if (k == 0 || std::abs(k) > grid_.K || levels() < 2 || T <= t_.front()) return CVec::Zero(n);
  const double tol = 1e-11 * (1 + std::abs(T));
  if (T > t_.back() + tol) fail(Status::history_gap, "history gap: derivative requested at t = " + std::to_string(T));
  const int col = std::abs(k) - 1;
  auto it = std::upper_bound(t_.begin(), t_.end(), T);
  const int j = std::clamp(static_cast<int>(it - t_.begin()) - 1, 0, levels() - 2);
  const double h = t_[j + 1] - t_[j];
  const double s = std::clamp((T - t_[j]) / h, 0.0, 1.0);
  const CVec a0 = a_[j].col(col), a1 = a_[j + 1].col(col);
  CVec v;
  if (has_dot_[j] && has_dot_[j + 1]) {
    const CVec d0 = adot_[j].col(col), d1 = adot_[j + 1].col(col);
    if (order == 1)
      v = ((6 * s * s - 6 * s) * a0 + (-6 * s * s + 6 * s) * a1) / h + (3 * s * s - 4 * s + 1) * d0 + (3 * s * s - 2 * s) * d1;
    else
      v = ((12 * s - 6) * a0 + (-12 * s + 6) * a1) / (h * h) + ((6 * s - 4) * d0 + (6 * s - 2) * d1) / h;
  } else {
    v = order == 1 ? CVec((a1 - a0) / h) : CVec::Zero(n);
  }
  if (k < 0) v = v.conjugate();
  if (shift != 0 && v.squaredNorm() > 0) v = spectral_shift(v, shift, grid_.L1);
  return v;
}

CVec History::mode(int k, double T, double shift, const Tail* tail) const {
  CVec v = raw(k, T, tail);
  if (shift == 0 || v.squaredNorm() == 0) return v;
  return spectral_shift(v, shift, grid_.L1);
}

CVec History::mode_at(int k, double T, const Vec& x1, const Tail* tail) const {
  CVec v = raw(k, T, tail);
  if (v.squaredNorm() == 0) return CVec::Zero(x1.size());
  return spectral_resample(v, grid_.L1, x1);
}

CMat History::values(double T, const Tail* tail) const {
  CMat out(grid_.n, grid_.K);
  for (int k = 1; k <= grid_.K; ++k) out.col(k - 1) = raw(k, T, tail);
  return out;
}

CMat TauGrid::trace() const {
  if (modes.empty()) return CMat();
  CMat out(modes[0].rows(), static_cast<int>(modes.size()));
  for (std::size_t j = 0; j < modes.size(); ++j) out.col(j) = modes[j].col(0);
  return out;
}

Forcing make_forcing(const BoundarySource& src, const AmplitudeConstants& c, const AmplitudeGrid& grid) {
  const Vec x = grid.x();
  return [&src, b = c.b, kt = c.kappa_t, x, K = grid.K](double t) {
    CMat g = CMat::Zero(x.size(), K);
    for (const auto& [k, me] : src.modes) {
      if (k > K) continue;
      for (int i = 0; i < x.size(); ++i) g(i, k - 1) = -cd(0, k) * b.cast<cd>().dot(src.G(k, t, x(i))) / kt;
    }
    return g;
  };
}

namespace {

double tau_height(const AmplitudeConstants& c, const AmplitudeConstants::Memory& mem, double T) {
  return 1.2 * std::abs(c.v[mem.tr.m](1)) * T;
}

}  // namespace

AmplitudeState initial_state(const AmplitudeGrid& grid, const AmplitudeConstants& c, MemoryMode mode, double T,
                             double tau_dx2) {
  AmplitudeState st;
  st.grid = grid;
  st.a = CMat::Zero(grid.n, grid.K);
  st.history = History(grid);
  st.history.push(0, st.a);
  if (mode == MemoryMode::grid) {
    for (const auto& mem : c.memory) {
      TauGrid tg;
      const double H = tau_height(c, mem, T);
      tg.dx2 = tau_dx2 > 0 ? tau_dx2 : H / 64;
      tg.n2 = static_cast<int>(std::ceil(H / tg.dx2)) + 4;
      tg.modes.assign(grid.K, CMat::Zero(grid.n, tg.n2));
      st.tau.push_back(tg);
    }
  }
  return st;
}

CMat square_modes(const CMat& a) {
  const int n = static_cast<int>(a.rows()), K = static_cast<int>(a.cols());
  auto get = [&](int k) -> CVec { return k > 0 ? CVec(a.col(k - 1)) : CVec(a.col(-k - 1).conjugate()); };
  CMat out = CMat::Zero(n, K);
  for (int k = 1; k <= K; ++k)
    for (int kp = k - K; kp <= K; ++kp) {
      const int kq = k - kp;
      if (kp == 0 || kq == 0 || std::abs(kq) > K) continue;
      out.col(k - 1) += get(kp).cwiseProduct(get(kq));
    }
  return out;
}

CMat memory_term_exact(const History& h, const AmplitudeConstants::Memory& mem, const AmplitudeConstants& c, double t,
                       double x2, const History::Tail* tail, int refine) {
  const AmplitudeGrid& g = h.grid();
  CMat out = CMat::Zero(g.n, g.K);
  if (t <= 0) return out;
  const ResonanceTriple& tr = mem.tr;
  std::vector<double> base;
  for (int j = 0; j < h.levels() && h.t(j) < t - 1e-12 * (1 + t); ++j) base.push_back(h.t(j));
  base.push_back(t);
  // composite Simpson on each (refined) history interval
  std::vector<double> nodes, weights;
  for (std::size_t j = 0; j + 1 < base.size(); ++j)
    for (int q = 0; q < refine; ++q) {
      const double lo = base[j] + (base[j + 1] - base[j]) * q / refine;
      const double hi = base[j] + (base[j + 1] - base[j]) * (q + 1) / refine;
      const double hs = hi - lo;
      if (nodes.empty() || nodes.back() != lo) {
        nodes.push_back(lo);
        weights.push_back(0);
      }
      weights.back() += hs / 6;
      nodes.push_back(0.5 * (lo + hi));
      weights.push_back(4 * hs / 6);
      nodes.push_back(hi);
      weights.push_back(hs / 6);
    }
  const Vec& vq = c.v[tr.m];
  const Vec& vp = c.v[tr.p];
  const Vec& vr = c.v[tr.r];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double s = nodes[i];
    const double w = weights[i];
    if (w == 0) continue;
    const double X2 = x2 - vq(1) * (t - s);
    const double sh = -vq(0) * (t - s);
    const double Tp = s - X2 / vp(1), Tr = s - X2 / vr(1);
    if (Tp <= 0 || Tr <= 0) continue;
    const double shp = sh - vp(0) * X2 / vp(1), shr = sh - vr(0) * X2 / vr(1);
    for (int k = 1; k * tr.n_m <= g.K; ++k) {
      if (std::abs(k * tr.n_p) > g.K || std::abs(k * tr.n_r) > g.K) continue;
      CVec ap = h.mode(k * tr.n_p, Tp, shp, tail);
      if (ap.squaredNorm() == 0) continue;
      CVec ar = h.mode(k * tr.n_r, Tr, shr, tail);
      out.col(k * tr.n_m - 1) += w * ap.cwiseProduct(ar);
    }
  }
  return out;
}

CMat tau_source(const History& h, const AmplitudeConstants::Memory& mem, const AmplitudeConstants& c, double t, double x2,
                const History::Tail* tail) {
  const AmplitudeGrid& g = h.grid();
  CMat out = CMat::Zero(g.n, g.K);
  if (mem.source == 0) return out;
  const ResonanceTriple& tr = mem.tr;
  const Vec& vp = c.v[tr.p];
  const Vec& vr = c.v[tr.r];
  const double Tp = t - x2 / vp(1), Tr = t - x2 / vr(1);
  if (Tp <= 0 || Tr <= 0) return out;
  for (int k = 1; k * tr.n_m <= g.K; ++k) {
    if (std::abs(k * tr.n_p) > g.K || std::abs(k * tr.n_r) > g.K) continue;
    CVec ap = h.mode(k * tr.n_p, Tp, -vp(0) * x2 / vp(1), tail);
    if (ap.squaredNorm() == 0) continue;
    CVec ar = h.mode(k * tr.n_r, Tr, -vr(0) * x2 / vr(1), tail);
    out.col(k * tr.n_m - 1) += mem.source * ap.cwiseProduct(ar);
  }
  return out;
}

namespace {

// -v2 d_2 tau + source, upwind-biased third order (v2 < 0: information from above); zero
// values above the top row, one-sided stencil at the outflow row x_2 = 0.
std::vector<CMat> tau_rhs(const TauGrid& tg, const History& h, const AmplitudeConstants::Memory& mem,
                          const AmplitudeConstants& c, double t, const History::Tail* tail) {
  const double v2 = c.v[mem.tr.m](1);
  const int K = static_cast<int>(tg.modes.size());
  std::vector<CMat> out(K);
  for (int j = 0; j < K; ++j) {
    const CMat& f = tg.modes[j];
    const int n2 = tg.n2;
    auto at = [&](int i) -> CVec { return i < n2 ? CVec(f.col(i)) : CVec::Zero(f.rows()); };
    CMat d(f.rows(), n2);
    for (int i = 0; i < n2; ++i) {
      if (i == 0) d.col(i) = (-11.0 * at(0) + 18.0 * at(1) - 9.0 * at(2) + 2.0 * at(3)) / (6 * tg.dx2);
      else d.col(i) = (-2.0 * at(i - 1) - 3.0 * at(i) + 6.0 * at(i + 1) - at(i + 2)) / (6 * tg.dx2);
    }
    out[j] = -v2 * d;
  }
  for (int i = 0; i < tg.n2; ++i) {
    const CMat S = tau_source(h, mem, c, t, i * tg.dx2, tail);
    for (int j = 0; j < K; ++j) out[j].col(i) += S.col(j);
  }
  return out;
}

CMat nonlinear_rhs(const CMat& a, const std::vector<CMat>& traces, const AmplitudeConstants& c, const CMat& g) {
  const int K = static_cast<int>(a.cols());
  CMat N = g;
  if (c.alpha1 != 0) {
    const CMat sq = square_modes(a);
    for (int k = 1; k <= K; ++k) N.col(k - 1) -= c.alpha1 * cd(0, k) * sq.col(k - 1);
  }
  for (std::size_t q = 0; q < c.memory.size() && q < traces.size(); ++q) {
    const double coef = c.memory[q].f / c.kappa_t;
    if (coef == 0) continue;
    for (int j = 1; j <= K; ++j) N.col(j - 1) -= coef * cd(0, j) * traces[q].col(j - 1);
  }
  return N;
}

std::vector<CMat> boundary_traces(const AmplitudeState& st, const AmplitudeConstants& c, MemoryMode mode, double t,
                                  const History::Tail* tail, const std::vector<TauGrid>* tau) {
  std::vector<CMat> tr;
  for (std::size_t q = 0; q < c.memory.size(); ++q) {
    const auto& mem = c.memory[q];
    if (mem.f == 0 || mem.mu == 0) {
      tr.push_back(CMat::Zero(st.grid.n, st.grid.K));
      continue;
    }
    if (mode == MemoryMode::exact) tr.push_back(mem.mu * memory_term_exact(st.history, mem, c, t, 0, tail));
    else tr.push_back((*tau)[q].trace());
  }
  return tr;
}

double theta_mean(const CMat& a) {
  // average of sum_k a_k e^{ik theta} + c.c. over 2K+1 theta nodes
  const int K = static_cast<int>(a.cols());
  const int nodes = 2 * K + 1;
  double worst = 0;
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0;
    for (int q = 0; q < nodes; ++q) {
      const double th = 2 * pi * q / nodes;
      for (int k = 1; k <= K; ++k) s += 2 * (a(i, k - 1) * std::exp(cd(0, k * th))).real();
    }
    worst = std::max(worst, std::abs(s / nodes));
  }
  return worst;
}

}  // namespace

void evolve_tau(std::vector<TauGrid>& tau, const History& h, const AmplitudeConstants& c, double t, double dt,
                const History::Tail* tail) {
  for (std::size_t q = 0; q < tau.size(); ++q) {
    TauGrid& tg = tau[q];
    const auto& mem = c.memory[q];
    const double sh = -c.v[mem.tr.m](0) * dt;
    const double L = h.grid().L1;
    const auto k1 = tau_rhs(tg, h, mem, c, t, nullptr);
    TauGrid pred = tg;
    for (std::size_t j = 0; j < tg.modes.size(); ++j) pred.modes[j] = shift_cols(tg.modes[j] + dt * k1[j], sh, L);
    const auto k2 = tau_rhs(pred, h, mem, c, t + dt, tail);
    for (std::size_t j = 0; j < tg.modes.size(); ++j)
      tg.modes[j] = shift_cols(tg.modes[j] + 0.5 * dt * k1[j], sh, L) + 0.5 * dt * k2[j];
  }
}

void step_amplitude(AmplitudeState& st, double dt, const AmplitudeConstants& c, const Forcing& g, MemoryMode mode) {
  const AmplitudeGrid& grid = st.grid;
  const double L = grid.L1;
  if (std::abs(c.w) * dt > grid.dx() * (1 + 1e-9))
    fail(Status::cfl_violation, "amplitude step violates the transport CFL condition");
  const double amax = st.a.size() ? st.a.cwiseAbs().maxCoeff() : 0;
  if (2 * std::abs(c.alpha1) * amax * grid.K * dt > 1)
    fail(Status::cfl_violation, "amplitude step violates the Burgers CFL condition at t = " + std::to_string(st.t));
  const double t0 = st.t, t1 = st.t + dt;
  const int level = st.history.levels() - 1;

  const auto tr0 = boundary_traces(st, c, mode, t0, nullptr, &st.tau);
  const CMat k1 = nonlinear_rhs(st.a, tr0, c, g(t0));
  st.history.set_derivative(level, k1 - c.w * deriv_cols(st.a, L));

  std::vector<std::vector<CMat>> tk1;
  std::vector<TauGrid> tau_pred = st.tau;
  if (mode == MemoryMode::grid) {
    for (std::size_t q = 0; q < st.tau.size(); ++q) {
      tk1.push_back(tau_rhs(st.tau[q], st.history, c.memory[q], c, t0, nullptr));
      const double sh = -c.v[c.memory[q].tr.m](0) * dt;
      for (std::size_t j = 0; j < st.tau[q].modes.size(); ++j)
        tau_pred[q].modes[j] = shift_cols(st.tau[q].modes[j] + dt * tk1[q][j], sh, L);
    }
  }
  const CMat pred = shift_cols(st.a + dt * k1, -c.w * dt, L);
  const History::Tail tail{t1, &pred};
  const auto tr1 = boundary_traces(st, c, mode, t1, &tail, &tau_pred);
  const CMat k2 = nonlinear_rhs(pred, tr1, c, g(t1));
  st.a = shift_cols(st.a + 0.5 * dt * k1, -c.w * dt, L) + 0.5 * dt * k2;
  if (mode == MemoryMode::grid) {
    for (std::size_t q = 0; q < st.tau.size(); ++q) {
      const auto tk2 = tau_rhs(tau_pred[q], st.history, c.memory[q], c, t1, &tail);
      const double sh = -c.v[c.memory[q].tr.m](0) * dt;
      for (std::size_t j = 0; j < st.tau[q].modes.size(); ++j)
        st.tau[q].modes[j] = shift_cols(st.tau[q].modes[j] + 0.5 * dt * tk1[q][j], sh, L) + 0.5 * dt * tk2[j];
    }
  }
  st.t = t1;
  st.history.push(t1, st.a);

  const double mx = st.a.size() ? st.a.cwiseAbs().maxCoeff() : 0;
  if (!std::isfinite(mx) || mx > 1e8) fail(Status::blow_up, "amplitude blow-up at t = " + std::to_string(t1));
  if (grid.K >= 6 && mx > 0) {
    double hi = 0, all = 0;
    for (int k = 1; k <= grid.K; ++k) {
      const double e = st.a.col(k - 1).squaredNorm();
      all += e;
      if (3 * k > 2 * grid.K) hi += e;
    }
    if (hi > 0.05 * all)
      fail(Status::blow_up, "amplitude blow-up at t = " + std::to_string(t1) + ": spectral blocking in theta_0 (shock formation)");
  }
  st.max_abs = std::max(st.max_abs, mx);
  st.max_theta_mean = std::max(st.max_theta_mean, theta_mean(st.a));
  st.sup_trace.push_back({t1, mx});
}

CMat reconstruct_sigma(const History& h, const AmplitudeConstants& c, int m, double t, double x2) {
  const AmplitudeGrid& g = h.grid();
  CMat out = CMat::Zero(g.n, g.K);
  if (c.s[m] == 0) return out;
  const Vec& v = c.v[m];
  const double T = t - x2 / v(1), sh = -v(0) * x2 / v(1);
  for (int k = 1; k <= g.K; ++k) out.col(k - 1) = c.s[m] * h.mode(k, T, sh);
  return out;
}

double default_amplitude_dt(const AmplitudeConstants& c, const AmplitudeGrid& grid, double cfl, MemoryMode mode,
                            double T, double tau_dx2) {
  double dt = cfl * grid.dx() / std::max(std::abs(c.w), 1.0);
  if (mode == MemoryMode::grid)
    for (const auto& mem : c.memory) {
      const double H = tau_height(c, mem, T);
      const double dx2 = tau_dx2 > 0 ? tau_dx2 : H / 64;
      dt = std::min(dt, cfl * dx2 / std::abs(c.v[mem.tr.m](1)));
    }
  const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
  return T / steps;
}

ProfileSolution solve_key_subsystem(const HyperbolicModel& model, const ModeSet& ms, const BoundarySource& src,
                                    const RunConfig& cfg, std::optional<MemoryMode> mode, double dt) {
  ProfileSolution sol;
  sol.triples = find_resonances(ms, cfg.K);
  sol.constants = compute_constants(model, ms, sol.triples);
  sol.mode = mode.value_or(cfg.memory == "grid" ? MemoryMode::grid : MemoryMode::exact);
  AmplitudeGrid grid{cfg.n_x1_amp, cfg.K, src.L1};
  sol.dt = dt > 0 ? dt : default_amplitude_dt(sol.constants, grid, cfg.cfl_amp, sol.mode, cfg.T, cfg.tau_dx2);
  sol.state = initial_state(grid, sol.constants, sol.mode, cfg.T, cfg.tau_dx2);
  const Forcing g = make_forcing(src, sol.constants, grid);
  const int steps = static_cast<int>(std::lround(cfg.T / sol.dt));
  for (int i = 0; i < steps; ++i) step_amplitude(sol.state, sol.dt, sol.constants, g, sol.mode);
  // derivative at the final level, for Hermite reads up to T
  const auto tr = boundary_traces(sol.state, sol.constants, sol.mode, sol.state.t, nullptr, &sol.state.tau);
  sol.state.history.set_derivative(sol.state.history.levels() - 1,
                                   nonlinear_rhs(sol.state.a, tr, sol.constants, g(sol.state.t)) -
                                       sol.constants.w * deriv_cols(sol.state.a, grid.L1));
  return sol;
}

}  // namespace oscamp
