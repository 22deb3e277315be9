#include "oscamp/linear_oracle.hpp"
#include "oscamp/fourier.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace oscamp {

namespace {

// Laplace transform of the ramp: int_0^w chi e^{-st} dt + e^{-sw}/s.
cd ramp_transform(cd s, double width) {
  const int panels = 32;
  const double h = width / panels;
  cd acc = 0;
  for (int q = 0; q < panels; ++q) {
    const double a = q * h;
    acc += boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double t) { return ramp_chi(t, width) * std::exp(-s * t); }, a, a + h);
  }
  return acc + std::exp(-s * width) / s;
}

}  // namespace

LinearOracle::LinearOracle(const HyperbolicModel& model, const BoundarySource& src, double eps, double T)
    : LinearOracle(model, src, eps, T, Options{}) {}

LinearOracle::LinearOracle(const HyperbolicModel& model, const BoundarySource& src, double eps, double T,
                           const Options& opt)
    : N_(model.N), eps_(eps) {
  if (model.d != 2) fail(Status::invalid_argument, "linear oracle supports d = 2 only");
  if (model.has_D0()) fail(Status::invalid_argument, "linear oracle requires D0 = 0");
  gamma_ = opt.gamma_T / T;
  period_ = opt.period_T * T;
  tau_ = model.beta(0);
  eta_ = model.beta(1);
  const int p = model.p(), n = opt.x1_samples;
  const Mat B2inv = model.Bd().inverse();
  const Mat& B1 = model.B[0];
  const double t_check[] = {0.25 * src.ramp, 0.5 * src.ramp, 0.8 * src.ramp, 2 * src.ramp};
  const double t_full = src.ramp + 1;

  for (const auto& [k, me] : src.modes) {
    CMat h(p, n);
    for (int i = 0; i < n; ++i) h.col(i) = src.G(k, t_full, i * src.L1 / n);
    for (double t : t_check)
      for (int i = 0; i < n; ++i) {
        const double x = (i + 0.37) * src.L1 / n;
        const CVec want = ramp_chi(t, src.ramp) * src.G(k, t_full, x);
        if ((src.G(k, t, x) - want).cwiseAbs().maxCoeff() > 1e-12 * (1 + want.cwiseAbs().maxCoeff()))
          fail(Status::invalid_argument, "linear oracle needs data of the form chi(t) h_k(x1)");
      }
    CMat hhat(p, n);
    for (int c = 0; c < p; ++c) {
      CVec row = h.row(c).transpose();
      fft(row);
      hhat.row(c) = row.transpose() / static_cast<double>(n);
    }
    const Vec xis = wavenumbers(n, src.L1, false);
    const double scale = hhat.cwiseAbs().maxCoeff();
    for (int j = 0; j < n; ++j) {
      const CVec hj = hhat.col(j);
      if (hj.cwiseAbs().maxCoeff() <= opt.coef_floor * std::max(scale, 1e-300)) continue;
      if (2 * j == n) fail(Status::invalid_argument, "boundary data under-resolved in x1 for the linear oracle");
      Block b;
      b.k = k;
      b.xi = xis(j);
      const int nmax = static_cast<int>(std::floor(opt.omega_max * period_ / (2 * pi)));
      for (int m = -nmax; m <= nmax; ++m) {
        const double om = 2 * pi * m / period_;
        const cd s(gamma_, om);
        const CMat M = -B2inv.cast<cd>() * ((s + cd(0, k * tau_ / eps)) * CMat::Identity(N_, N_) +
                                            cd(0, k * eta_ / eps + b.xi) * B1.cast<cd>());
        Eigen::ComplexEigenSolver<CMat> es(M);
        std::vector<int> stable;
        for (int q = 0; q < N_; ++q)
          if (es.eigenvalues()(q).real() < 0) stable.push_back(q);
        if (static_cast<int>(stable.size()) != p)
          fail(Status::internal, "stable dimension mismatch in linear oracle");
        CMat S(N_, p);
        CVec mu(p);
        for (int a = 0; a < p; ++a) {
          S.col(a) = es.eigenvectors().col(stable[a]);
          mu(a) = es.eigenvalues()(stable[a]);
        }
        const CVec c = (model.boundary.cast<cd>() * S).fullPivLu().solve(eps * eps * ramp_transform(s, src.ramp) * hj);
        CMat w = S;
        for (int a = 0; a < p; ++a) w.col(a) *= c(a);
        b.omega.push_back(om);
        b.mu.push_back(mu);
        b.w.push_back(w);
      }
      blocks_.push_back(std::move(b));
    }
  }
}

CVec LinearOracle::block_value(const Block& b, double t, double x2) const {
  CVec u = CVec::Zero(N_);
  for (size_t q = 0; q < b.omega.size(); ++q) {
    CVec e = (b.mu[q] * x2).array().exp();
    u += std::exp(cd(0, b.omega[q] * t)) * (b.w[q] * e);
  }
  return u * (std::exp(gamma_ * t) / period_);
}

Mat LinearOracle::row(double t, const Vec& x1, double x2) const {
  Mat out = Mat::Zero(N_, x1.size());
  if (t <= 0) return out;
  for (const Block& b : blocks_) {
    const CVec u = block_value(b, t, x2);
    for (int i = 0; i < x1.size(); ++i) {
      const cd ph = std::exp(cd(0, b.k * (tau_ * t + eta_ * x1(i)) / eps_ + b.xi * x1(i)));
      out.col(i) += 2 * (ph * u).real();
    }
  }
  return out;
}

}  // namespace oscamp
