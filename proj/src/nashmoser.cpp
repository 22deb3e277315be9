#include "oscamp/nashmoser.hpp"

#include "oscamp/fourier.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>

namespace oscamp {

namespace {

double psi(double x) { return x > 0 ? std::exp(-1 / x) : 0.0; }

double cutoff_derivative(double r) {
  if (r <= 1 || r >= 2) return 0;
  const double A = psi(2 - r), B = psi(r - 1);
  const double dA = -A / ((2 - r) * (2 - r)), dB = B / ((r - 1) * (r - 1));
  return (dA * B - A * dB) / ((A + B) * (A + B));
}

// Applies w(|(xi, k)|) to the spectrum of every column.
template <class W>
CMat spectral_multiply(const CMat& u, double L1, W w) {
  const int n = static_cast<int>(u.rows());
  const Vec xi = wavenumbers(n, L1, false);
  CMat out(u.rows(), u.cols());
  for (int c = 0; c < u.cols(); ++c) {
    CVec f = u.col(c);
    fft(f);
    const double k = c + 1;
    for (int j = 0; j < n; ++j) f(j) *= w(std::sqrt(xi(j) * xi(j) + k * k));
    ifft(f);
    out.col(c) = f;
  }
  return out;
}

CMat product_modes(const CMat& a, const CMat& b) {
  const int n = static_cast<int>(a.rows()), K = static_cast<int>(a.cols());
  auto get = [K](const CMat& x, int k) -> CVec {
    return k > 0 ? CVec(x.col(k - 1)) : CVec(x.col(-k - 1).conjugate());
  };
  CMat out = CMat::Zero(n, K);
  for (int k = 1; k <= K; ++k)
    for (int kp = k - K; kp <= K; ++kp) {
      const int kq = k - kp;
      if (kp == 0 || kq == 0 || std::abs(kq) > K) continue;
      out.col(k - 1) += get(a, kp).cwiseProduct(get(b, kq));
    }
  return out;
}

double sup_of(const std::vector<CMat>& v) {
  double s = 0;
  for (const auto& x : v)
    if (x.size() > 0) s = std::max(s, x.cwiseAbs().maxCoeff());
  return s;
}

}  // namespace

double cutoff(double r) {
  if (r <= 1) return 1;
  if (r >= 2) return 0;
  const double A = psi(2 - r), B = psi(r - 1);
  return A / (A + B);
}

CMat smooth(const CMat& u, double theta, double L1) {
  return spectral_multiply(u, L1, [theta](double r) { return cutoff(r / theta); });
}

CMat smooth_dtheta(const CMat& u, double theta, double L1) {
  return spectral_multiply(u, L1, [theta](double r) { return -cutoff_derivative(r / theta) * r / (theta * theta); });
}

double sobolev_norm(const CMat& u, double s, double L1) {
  const int n = static_cast<int>(u.rows());
  const Vec xi = wavenumbers(n, L1, false);
  double sum = 0;
  for (int c = 0; c < u.cols(); ++c) {
    CVec f = u.col(c);
    fft(f);
    const double k = c + 1;
    for (int j = 0; j < n; ++j) sum += std::pow(1 + xi(j) * xi(j) + k * k, s) * std::norm(f(j) / static_cast<double>(n));
  }
  return std::sqrt(L1 * sum);
}

std::vector<SmoothingCheck> smoothing_constants(const std::vector<double>& thetas, int n, int K, int samples,
                                                std::uint64_t seed) {
  const double L1 = 2 * pi;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const Vec xi = wavenumbers(n, L1, false);
  std::vector<CMat> us;
  for (int s = 0; s < samples; ++s) {
    // algebraic decay with a random exponent in [1, 3]
    const double p = 1 + 2 * std::uniform_real_distribution<double>(0, 1)(rng);
    CMat u(n, K);
    for (int c = 0; c < K; ++c) {
      CVec f(n);
      for (int j = 0; j < n; ++j)
        f(j) = cd(g(rng), g(rng)) * std::pow(1 + xi(j) * xi(j) + (c + 1.0) * (c + 1.0), -p / 2) * static_cast<double>(n);
      ifft(f);
      u.col(c) = f;
    }
    us.push_back(u);
  }
  std::vector<SmoothingCheck> out;
  auto add = [&](char prop, double beta, double alpha) {
    SmoothingCheck ch;
    ch.property = prop;
    ch.alpha = alpha;
    ch.beta = beta;
    ch.thetas = thetas;
    for (double th : thetas) {
      double worst = 0;
      for (const CMat& u : us) {
        const double ua = sobolev_norm(u, alpha, L1);
        double r = 0;
        if (prop == 'a') r = sobolev_norm(smooth(u, th, L1), beta, L1) / (std::pow(th, std::max(beta - alpha, 0.0)) * ua);
        if (prop == 'b') r = sobolev_norm(smooth(u, th, L1) - u, beta, L1) / (std::pow(th, beta - alpha) * ua);
        if (prop == 'c') r = sobolev_norm(smooth_dtheta(u, th, L1), beta, L1) / (std::pow(th, beta - alpha - 1) * ua);
        worst = std::max(worst, r);
      }
      ch.constants.push_back(worst);
      ch.worst = std::max(ch.worst, worst);
    }
    out.push_back(ch);
  };
  add('a', 1, 3);
  add('a', 3, 1);
  add('a', 2, 2);
  add('b', 0, 2);
  add('b', 1, 3);
  add('c', 1, 3);
  add('c', 3, 1);
  add('c', 0, 0);
  return out;
}

SpaceTimeData& SpaceTimeData::operator+=(const SpaceTimeData& o) {
  for (std::size_t j = 0; j < a.size(); ++j) a[j] += o.a[j];
  for (std::size_t q = 0; q < m.size(); ++q)
    for (std::size_t j = 0; j < m[q].size(); ++j) m[q][j] += o.m[q][j];
  return *this;
}

SpaceTimeData& SpaceTimeData::operator-=(const SpaceTimeData& o) {
  for (std::size_t j = 0; j < a.size(); ++j) a[j] -= o.a[j];
  for (std::size_t q = 0; q < m.size(); ++q)
    for (std::size_t j = 0; j < m[q].size(); ++j) m[q][j] -= o.m[q][j];
  return *this;
}

SpaceTimeData SpaceTimeData::operator+(const SpaceTimeData& o) const {
  SpaceTimeData r = *this;
  return r += o;
}

SpaceTimeData SpaceTimeData::operator-(const SpaceTimeData& o) const {
  SpaceTimeData r = *this;
  return r -= o;
}

SpaceTimeData SpaceTimeData::operator*(double c) const {
  SpaceTimeData r = *this;
  for (auto& x : r.a) x *= c;
  for (auto& mq : r.m)
    for (auto& x : mq) x *= c;
  return r;
}

double SpaceTimeData::sup_a() const { return sup_of(a); }

double SpaceTimeData::sup_m() const {
  double s = 0;
  for (const auto& mq : m) s = std::max(s, sup_of(mq));
  return s;
}

double SpaceTimeData::sup() const { return std::max(sup_a(), sup_m()); }

ProfileSystem::ProfileSystem(const AmplitudeConstants& c, const AmplitudeGrid& grid, const Forcing& g, double T, double dt)
    : c_(c), grid_(grid) {
  if (T <= 0 || dt <= 0) fail(Status::invalid_argument, "profile system needs T > 0 and dt > 0");
  J_ = std::max(1, static_cast<int>(std::lround(T / dt)));
  dt_ = T / J_;
  if (std::abs(c.w) * dt_ > grid.dx() * (1 + 1e-9)) fail(Status::cfl_violation, "profile system step violates the transport CFL");
  for (int j = 0; j <= J_; ++j) g_.push_back(g(j * dt_));
}

SpaceTimeData ProfileSystem::zero() const {
  SpaceTimeData z;
  z.a.assign(J_ + 1, CMat::Zero(grid_.n, grid_.K));
  z.m.assign(c_.memory.size(), std::vector<CMat>(J_ + 1, CMat::Zero(grid_.n, grid_.K)));
  return z;
}

CMat ProfileSystem::transport(const CMat& a) const {
  CMat out(a.rows(), a.cols());
  const double sh = -c_.w * dt_;
  for (int k = 0; k < a.cols(); ++k) out.col(k) = sh == 0 ? CVec(a.col(k)) : spectral_shift(CVec(a.col(k)), sh, grid_.L1);
  return out;
}

CMat ProfileSystem::burgers(const CMat& a, const CMat& b) const {
  CMat out = CMat::Zero(a.rows(), a.cols());
  if (c_.alpha1 == 0) return out;
  const CMat p = product_modes(a, b);
  for (int k = 1; k <= grid_.K; ++k) out.col(k - 1) = -c_.alpha1 * cd(0, k) * p.col(k - 1);
  return out;
}

CMat ProfileSystem::memory_flux(const std::vector<CMat>& m, int j) const {
  (void)j;
  CMat out = CMat::Zero(grid_.n, grid_.K);
  for (std::size_t q = 0; q < c_.memory.size(); ++q) {
    const double coef = c_.memory[q].f / c_.kappa_t;
    if (coef == 0) continue;
    for (int k = 1; k <= grid_.K; ++k) out.col(k - 1) -= coef * cd(0, k) * m[q].col(k - 1);
  }
  return out;
}

CVec ProfileSystem::sample(const std::vector<CMat>& a, int k, double T, double shift) const {
  const int n = grid_.n;
  if (k == 0 || std::abs(k) > grid_.K || T <= 0) return CVec::Zero(n);
  const double x = T / dt_;
  int j0 = std::clamp(static_cast<int>(std::floor(x)), 0, J_ - 1);
  const double s = std::clamp(x - j0, 0.0, 1.0);
  CVec v = (1 - s) * a[j0].col(std::abs(k) - 1) + s * a[j0 + 1].col(std::abs(k) - 1);
  if (k < 0) v = v.conjugate();
  if (shift != 0 && v.squaredNorm() > 0) v = spectral_shift(v, shift, grid_.L1);
  return v;
}

CMat ProfileSystem::endpoint(int q, const CMat& a, const CMat& b) const {
  const ResonanceTriple& tr = c_.memory[q].tr;
  CMat out = CMat::Zero(grid_.n, grid_.K);
  auto get = [](const CMat& x, int k) -> CVec { return k > 0 ? CVec(x.col(k - 1)) : CVec(x.col(-k - 1).conjugate()); };
  for (int k = 1; k * tr.n_m <= grid_.K; ++k) {
    if (std::abs(k * tr.n_p) > grid_.K || std::abs(k * tr.n_r) > grid_.K) continue;
    out.col(k * tr.n_m - 1) += get(a, k * tr.n_p).cwiseProduct(get(b, k * tr.n_r));
  }
  return out;
}

CMat ProfileSystem::memory(int q, const std::vector<CMat>& a, const std::vector<CMat>& b, int j) const {
  CMat out = CMat::Zero(grid_.n, grid_.K);
  if (j == 0) return out;
  const auto& mem = c_.memory[q];
  const ResonanceTriple& tr = mem.tr;
  const Vec& vq = c_.v[tr.m];
  const Vec& vp = c_.v[tr.p];
  const Vec& vr = c_.v[tr.r];
  const double t = j * dt_;
  for (int i = 0; i <= j; ++i) {
    const double s = i * dt_;
    const double w = (i == 0 || i == j) ? 0.5 * dt_ : dt_;
    const double X2 = -vq(1) * (t - s);
    const double sh = -vq(0) * (t - s);
    const double Tp = s - X2 / vp(1), Tr = s - X2 / vr(1);
    if (Tp <= 0 || Tr <= 0) continue;
    if (i == j) {
      out += w * endpoint(q, a[j], b[j]);
      continue;
    }
    const double shp = sh - vp(0) * X2 / vp(1), shr = sh - vr(0) * X2 / vr(1);
    for (int k = 1; k * tr.n_m <= grid_.K; ++k) {
      if (std::abs(k * tr.n_p) > grid_.K || std::abs(k * tr.n_r) > grid_.K) continue;
      const CVec ap = sample(a, k * tr.n_p, Tp, shp);
      if (ap.squaredNorm() == 0) continue;
      out.col(k * tr.n_m - 1) += w * ap.cwiseProduct(sample(b, k * tr.n_r, Tr, shr));
    }
  }
  return out;
}

SpaceTimeData ProfileSystem::target() const {
  SpaceTimeData r = zero();
  for (int j = 0; j < J_; ++j) r.a[j + 1] = 0.5 * (transport(g_[j]) + g_[j + 1]);
  return r;
}

SpaceTimeData ProfileSystem::apply(const SpaceTimeData& V) const {
  SpaceTimeData r = zero();
  std::vector<CMat> N(J_ + 1);
  for (int j = 0; j <= J_; ++j) {
    std::vector<CMat> mj;
    for (const auto& mq : V.m) mj.push_back(mq[j]);
    N[j] = burgers(V.a[j], V.a[j]) + memory_flux(mj, j);
  }
  for (int j = 0; j < J_; ++j)
    r.a[j + 1] = (V.a[j + 1] - transport(V.a[j]) - 0.5 * dt_ * (transport(N[j]) + N[j + 1])) / dt_;
  for (std::size_t q = 0; q < c_.memory.size(); ++q)
    for (int j = 0; j <= J_; ++j) {
      r.m[q][j] = V.m[q][j];
      if (c_.memory[q].mu != 0) r.m[q][j] -= c_.memory[q].mu * memory(static_cast<int>(q), V.a, V.a, j);
    }
  return r;
}

SpaceTimeData ProfileSystem::derivative(const SpaceTimeData& V, const SpaceTimeData& dV) const {
  SpaceTimeData r = zero();
  std::vector<CMat> N(J_ + 1);
  for (int j = 0; j <= J_; ++j) {
    std::vector<CMat> mj;
    for (const auto& mq : dV.m) mj.push_back(mq[j]);
    N[j] = 2.0 * burgers(V.a[j], dV.a[j]) + memory_flux(mj, j);
  }
  for (int j = 0; j < J_; ++j)
    r.a[j + 1] = (dV.a[j + 1] - transport(dV.a[j]) - 0.5 * dt_ * (transport(N[j]) + N[j + 1])) / dt_;
  for (std::size_t q = 0; q < c_.memory.size(); ++q)
    for (int j = 0; j <= J_; ++j) {
      r.m[q][j] = dV.m[q][j];
      const double mu = c_.memory[q].mu;
      if (mu != 0)
        r.m[q][j] -= mu * (memory(static_cast<int>(q), V.a, dV.a, j) + memory(static_cast<int>(q), dV.a, V.a, j));
    }
  return r;
}

SpaceTimeData ProfileSystem::solve_linear(const SpaceTimeData& Vb, const SpaceTimeData& rhs) const {
  const int n = grid_.n, K = grid_.K, Q = static_cast<int>(c_.memory.size());
  SpaceTimeData d = zero();
  for (int q = 0; q < Q; ++q) d.m[q][0] = rhs.m[q][0];
  auto level_m = [&](int j) {
    std::vector<CMat> mj;
    for (const auto& mq : d.m) mj.push_back(mq[j]);
    return mj;
  };
  auto interior = [&](int j) {
    for (int q = 0; q < Q; ++q) {
      d.m[q][j] = rhs.m[q][j];
      const double mu = c_.memory[q].mu;
      if (mu != 0) d.m[q][j] += mu * (memory(q, Vb.a, d.a, j) + memory(q, d.a, Vb.a, j));
    }
  };
  for (int j = 0; j < J_; ++j) {
    const CMat Nj = 2.0 * burgers(Vb.a[j], d.a[j]) + memory_flux(level_m(j), j);
    // level j+1 with da_{j+1} = 0: every non-endpoint foot lies at or below t_j
    interior(j + 1);
    const CMat b = dt_ * rhs.a[j + 1] + transport(d.a[j]) + 0.5 * dt_ * transport(Nj) + 0.5 * dt_ * memory_flux(level_m(j + 1), j + 1);
    const CMat& ab = Vb.a[j + 1];
    auto Lambda = [&](const CMat& x) {
      std::vector<CMat> em;
      for (int q = 0; q < Q; ++q) {
        const double mu = c_.memory[q].mu;
        em.push_back(mu == 0 ? CMat(CMat::Zero(n, K)) : CMat(mu * 0.5 * dt_ * (endpoint(q, ab, x) + endpoint(q, x, ab))));
      }
      return CMat(x - 0.5 * dt_ * (2.0 * burgers(ab, x) + memory_flux(em, j + 1)));
    };
    // pointwise real 2K x 2K systems, assembled by probing all points at once
    std::vector<Mat> A(n, Mat(2 * K, 2 * K));
    for (int c = 0; c < K; ++c)
      for (int part = 0; part < 2; ++part) {
        CMat X = CMat::Zero(n, K);
        X.col(c).setConstant(part == 0 ? cd(1, 0) : cd(0, 1));
        const CMat Y = Lambda(X);
        for (int i = 0; i < n; ++i)
          for (int r = 0; r < K; ++r) {
            A[i](2 * r, 2 * c + part) = Y(i, r).real();
            A[i](2 * r + 1, 2 * c + part) = Y(i, r).imag();
          }
      }
    CMat x(n, K);
    for (int i = 0; i < n; ++i) {
      Vec rb(2 * K);
      for (int r = 0; r < K; ++r) {
        rb(2 * r) = b(i, r).real();
        rb(2 * r + 1) = b(i, r).imag();
      }
      const Vec z = A[i].partialPivLu().solve(rb);
      for (int r = 0; r < K; ++r) x(i, r) = cd(z(2 * r), z(2 * r + 1));
    }
    d.a[j + 1] = x;
    interior(j + 1);
  }
  return d;
}

SpaceTimeData ProfileSystem::smooth(const SpaceTimeData& V, double theta) const {
  SpaceTimeData r = V;
  for (auto& x : r.a) x = oscamp::smooth(x, theta, grid_.L1);
  for (auto& mq : r.m)
    for (auto& x : mq) x = oscamp::smooth(x, theta, grid_.L1);
  return r;
}

double ProfileSystem::norm(const SpaceTimeData& V, double s) const {
  double sum = 0;
  for (const auto& x : V.a) sum += std::pow(sobolev_norm(x, s, grid_.L1), 2);
  for (const auto& mq : V.m)
    for (const auto& x : mq) sum += std::pow(sobolev_norm(x, s, grid_.L1), 2);
  return std::sqrt(dt_ * sum);
}

NashMoserResult nash_moser_solve(const ProfileSystem& sys, const NashMoserOptions& opt) {
  if (opt.theta0 < 1) fail(Status::invalid_argument, "theta0 must be at least 1");
  NashMoserResult res;
  const SpaceTimeData g = sys.target();
  SpaceTimeData V = sys.zero();
  SpaceTimeData FV = sys.apply(V);
  std::vector<SpaceTimeData> rhs_hist, e_hist;  // (f_k, g_k) and (e_k, e~_k), interior in .m, boundary in .a
  for (int n = 0; n < opt.max_steps; ++n) {
    const double theta = std::sqrt(opt.theta0 * opt.theta0 + n);
    const double theta_next = std::sqrt(opt.theta0 * opt.theta0 + n + 1);
    SpaceTimeData E = sys.zero();
    for (const auto& e : e_hist) E += e;
    SpaceTimeData sum_prev = sys.zero();
    for (const auto& r : rhs_hist) sum_prev += r;
    const SpaceTimeData SE = sys.smooth(E, theta);
    const SpaceTimeData Sg = sys.smooth(g, theta);
    SpaceTimeData rhs = sys.zero();
    for (std::size_t q = 0; q < rhs.m.size(); ++q)
      for (std::size_t j = 0; j < rhs.m[q].size(); ++j) rhs.m[q][j] = -SE.m[q][j] - sum_prev.m[q][j];
    for (std::size_t j = 0; j < rhs.a.size(); ++j) rhs.a[j] = Sg.a[j] - SE.a[j] - sum_prev.a[j];

    const SpaceTimeData Vb = sys.smooth(V, theta);
    const SpaceTimeData dV = sys.solve_linear(Vb, rhs);
    const SpaceTimeData V1 = V + dV;
    const SpaceTimeData FV1 = sys.apply(V1);
    const SpaceTimeData lin = sys.derivative(V, dV);
    const SpaceTimeData e = FV1 - FV - rhs;
    const SpaceTimeData eq = FV1 - FV - lin;
    const SpaceTimeData es = lin - sys.derivative(Vb, dV);

    NashMoserStep st;
    st.n = n;
    st.theta = theta;
    st.Delta = theta_next - theta;
    st.quadratic_error = eq.sup();
    st.substitution_error = es.sup();
    st.linear_defect = (e - eq - es).sup();
    st.accumulated = E.sup_m();
    st.accumulated_boundary = E.sup_a();
    st.residual_interior = FV1.sup_m();
    st.residual_boundary = (FV1 - g).sup_a();
    st.induction_holds = true;
    for (int s = 0; s <= std::max(opt.s_max, static_cast<int>(opt.alpha_tilde)); ++s) {
      const double nv = sys.norm(dV, s);
      if (s <= opt.s_max) st.increment_norms.push_back(nv);
      if (nv > opt.delta * std::pow(theta, s - opt.alpha - 1) * st.Delta) st.induction_holds = false;
    }

    rhs_hist.push_back(rhs);
    e_hist.push_back(e);
    // replay of the accumulation identities from the stored sequences
    SpaceTimeData fsum = sys.zero(), Esum = sys.zero();
    for (const auto& r : rhs_hist) fsum += r;
    for (std::size_t k = 0; k + 1 < e_hist.size(); ++k) Esum += e_hist[k];
    const SpaceTimeData SEn = sys.smooth(Esum, theta);
    double bk = 0, bkb = 0;
    for (std::size_t q = 0; q < fsum.m.size(); ++q)
      for (std::size_t j = 0; j < fsum.m[q].size(); ++j)
        bk = std::max(bk, (fsum.m[q][j] + SEn.m[q][j]).cwiseAbs().maxCoeff());
    for (std::size_t j = 0; j < fsum.a.size(); ++j)
      bkb = std::max(bkb, (fsum.a[j] + SEn.a[j] - Sg.a[j]).cwiseAbs().maxCoeff());
    st.bookkeeping = bk;
    st.bookkeeping_boundary = bkb;
    res.trace.push_back(st);

    V = V1;
    FV = FV1;
    if (!std::isfinite(V.sup())) break;
    if (st.residual_interior < opt.tol && st.residual_boundary < opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.V = V;
  return res;
}

PicardResult picard_solve(const ProfileSystem& sys, int max_steps, double tol) {
  PicardResult res;
  const SpaceTimeData g = sys.target();
  const SpaceTimeData Z = sys.zero();
  SpaceTimeData V = Z;
  const int K = sys.grid().K;
  for (int n = 0; n < max_steps; ++n) {
    const SpaceTimeData r = sys.apply(V) - g;
    const SpaceTimeData dV = sys.solve_linear(Z, r) * -1.0;
    V += dV;
    const SpaceTimeData r1 = sys.apply(V) - g;
    PicardStep st;
    st.n = n;
    st.residual_interior = r1.sup_m();
    st.residual_boundary = r1.sup_a();
    st.increment = dV.sup();
    for (const auto& x : V.a)
      for (int k = K / 2 + 1; k <= K; ++k) st.high_mode_norm = std::max(st.high_mode_norm, x.col(k - 1).norm());
    res.trace.push_back(st);
    if (!std::isfinite(V.sup()) || V.sup() > 1e8) break;
    if (st.residual_interior < tol && st.residual_boundary < tol) {
      res.converged = true;
      break;
    }
  }
  res.V = V;
  return res;
}

ProfileSystem profile_system(const HyperbolicModel& model, const ModeSet& ms, const BoundarySource& src,
                             const RunConfig& cfg, double dt) {
  const auto triples = find_resonances(ms, cfg.K);
  const AmplitudeConstants c = compute_constants(model, ms, triples);
  const AmplitudeGrid grid{cfg.n_x1_amp, cfg.K, src.L1};
  if (dt <= 0) dt = default_amplitude_dt(c, grid, cfg.cfl_amp, MemoryMode::exact, cfg.T, cfg.tau_dx2);
  return ProfileSystem(c, grid, make_forcing(src, c, grid), cfg.T, dt);
}

NashMoserOptions nash_moser_options(const RunConfig& cfg) {
  NashMoserOptions o;
  o.theta0 = cfg.theta0;
  o.delta = cfg.nm_delta;
  o.max_steps = cfg.nm_steps;
  o.tol = cfg.nm_tol;
  return o;
}

}  // namespace oscamp
