#include "oscamp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oscamp {

namespace {

Mat symbol(const HyperbolicModel& model, const Vec& xi) {
  Mat S = Mat::Zero(model.N, model.N);
  for (int j = 0; j < model.d; ++j) S += xi(j) * model.B[j];
  return S;
}

Mat normal_at(const HyperbolicModel& model, const Vec& beta) {
  Mat K = beta(0) * Mat::Identity(model.N, model.N);
  for (int j = 1; j < model.d; ++j) K += beta(j) * model.B[j - 1];
  return model.Bd().partialPivLu().solve(K);
}

// Orthonormal basis of the (numerical) null space.
Mat null_space(const Mat& A, double rel_tol, int expected = -1) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * scale) ++rank;
  int nullity = static_cast<int>(A.cols()) - rank;
  if (expected >= 0) nullity = expected;
  return svd.matrixV().rightCols(nullity);
}

void fix_sign(Vec& x) {
  const double mx = x.cwiseAbs().maxCoeff();
  for (int i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) > mx * (1 - 1e-8)) {
      if (x(i) < 0) x = -x;
      return;
    }
}

}  // namespace

Mat ModeSet::L(int m) const { return modes[m].omega * Mat::Identity(N(), N()) + normal; }

Mat ModeSet::L_at(double k, double xi_d) const { return k * normal + xi_d * Mat::Identity(N(), N()); }

Vec ModeSet::omegas() const {
  Vec w(M());
  for (int m = 0; m < M(); ++m) w(m) = modes[m].omega;
  return w;
}

std::vector<double> dispersion_roots(const HyperbolicModel& model, const Vec& beta) {
  if (beta.size() != model.d || beta.norm() == 0) fail(Status::invalid_argument, "beta must be a nonzero d-vector");
  Eigen::EigenSolver<Mat> es(normal_at(model, beta), false);
  std::vector<double> roots;
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (int i = 0; i < model.N; ++i) {
    if (std::abs(es.eigenvalues()(i).imag()) > 1e-9 * scale)
      fail(Status::not_hyperbolic, "beta not in hyperbolic region (complex root)");
    roots.push_back(-es.eigenvalues()(i).real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

namespace {

Vec characteristic_covector(const HyperbolicModel& model, const Vec& beta, double omega) {
  Vec xi(model.d);
  xi.head(model.d - 1) = beta.tail(model.d - 1);
  xi(model.d - 1) = omega;
  return xi;
}

}  // namespace

Vec group_velocity(const HyperbolicModel& model, const Vec& beta, double omega) {
  const Vec xi = characteristic_covector(model, beta, omega);
  const Mat S = symbol(model, xi);
  const double lambda = -beta(0);
  const Mat K = S - lambda * Mat::Identity(model.N, model.N);
  const Mat Rn = null_space(K, 1e-7);
  const Mat Ln = null_space(K.transpose(), 1e-7);
  if (Rn.cols() == 0) fail(Status::invalid_argument, "group_velocity: (beta, omega) is not a characteristic point");
  if (Rn.cols() != Ln.cols()) fail(Status::glancing, "group_velocity: eigenvalue is not semi-simple");
  const Mat lr = Ln.transpose() * Rn;
  if (std::abs(lr.determinant()) < 1e-10) fail(Status::glancing, "group_velocity: eigenvalue collision");
  const int nu = static_cast<int>(Rn.cols());
  Vec v(model.d);
  for (int j = 0; j < model.d; ++j) v(j) = lr.partialPivLu().solve(Ln.transpose() * model.B[j] * Rn).trace() / nu;
  return v;
}

Vec group_velocity_fd(const HyperbolicModel& model, const Vec& beta, double omega, double h) {
  const Vec xi = characteristic_covector(model, beta, omega);
  auto sorted_eigs = [&](const Vec& x) {
    Eigen::EigenSolver<Mat> es(symbol(model, x), false);
    std::vector<double> e(model.N);
    for (int i = 0; i < model.N; ++i) e[i] = es.eigenvalues()(i).real();
    std::sort(e.begin(), e.end());
    return e;
  };
  const std::vector<double> base = sorted_eigs(xi);
  int idx = 0;
  for (int i = 1; i < model.N; ++i)
    if (std::abs(base[i] + beta(0)) < std::abs(base[idx] + beta(0))) idx = i;
  Vec v(model.d);
  for (int j = 0; j < model.d; ++j) {
    Vec xp = xi, xm = xi;
    xp(j) += h;
    xm(j) -= h;
    v(j) = (sorted_eigs(xp)[idx] - sorted_eigs(xm)[idx]) / (2 * h);
  }
  return v;
}

Direction classify(const Vec& v, double tol) {
  const double vd = v(v.size() - 1);
  if (std::abs(vd) < tol * std::max(1.0, v.norm())) fail(Status::glancing, "glancing mode: normal group velocity vanishes");
  return vd > 0 ? Direction::incoming : Direction::outgoing;
}

ModeSet mode_package(const HyperbolicModel& model, const Vec& beta, bool require_wr) {
  const int N = model.N;
  ModeSet ms;
  ms.beta = beta;
  ms.normal = normal_at(model, beta);
  std::vector<double> roots = dispersion_roots(model, beta);
  std::reverse(roots.begin(), roots.end());
  const double scale = std::max(1.0, std::abs(roots.front()) + std::abs(roots.back()));
  // group equal roots
  std::vector<std::pair<double, int>> groups;
  for (double w : roots) {
    if (!groups.empty() && std::abs(groups.back().first - w) <= 1e-7 * scale) {
      auto& g = groups.back();
      g.first = (g.first * g.second + w) / (g.second + 1);
      ++g.second;
    } else {
      groups.push_back({w, 1});
    }
  }
  Mat Rfull(N, N);
  int col = 0;
  for (auto& [w, nu] : groups) {
    Mat basis = null_space(ms.normal + w * Mat::Identity(N, N), 1e-7, nu);
    if (nu == 1) {
      Vec r = basis.col(0);
      fix_sign(r);
      basis.col(0) = r;
    }
    Rfull.middleCols(col, nu) = basis;
    col += nu;
  }
  auto lu = Rfull.fullPivLu();
  if (!lu.isInvertible() || lu.rcond() < 1e-12) fail(Status::not_hyperbolic, "eigenvector basis is defective at beta");
  const Mat Lfull = lu.inverse();

  Vec eta = beta.tail(model.d - 1);
  col = 0;
  for (auto& [w, nu] : groups) {
    Mode md;
    md.omega = w;
    md.r = Rfull.middleCols(col, nu);
    md.l = Lfull.middleRows(col, nu);
    md.P = md.r * md.l;
    col += nu;
    // Group velocity from l~ = l B_d^{-1}, the left null vector of tau I + sum eta B + omega B_d.
    const Mat lt = model.Bd().transpose().partialPivLu().solve(md.l.transpose()).transpose();
    const Mat lr = lt * md.r;
    md.v.resize(model.d);
    for (int j = 0; j < model.d; ++j) md.v(j) = lr.partialPivLu().solve(lt * model.B[j] * md.r).trace() / nu;
    md.direction = classify(md.v);
    ms.modes.push_back(md);
  }
  for (int m = 0; m < ms.M(); ++m) {
    Mat R = Mat::Zero(N, N);
    for (int k = 0; k < ms.M(); ++k)
      if (k != m) R += ms.modes[k].P / (ms.modes[m].omega - ms.modes[k].omega);
    ms.modes[m].R = R;
    (ms.modes[m].incoming() ? ms.incoming_ids : ms.outgoing_ids).push_back(m);
  }

  int p_stable = 0;
  for (int m : ms.incoming_ids) p_stable += ms.modes[m].multiplicity();
  if (p_stable != model.p())
    fail(Status::not_wr, "stable subspace has dimension " + std::to_string(p_stable) + " but B has " + std::to_string(model.p()) + " rows");
  ms.stable_basis.resize(N, p_stable);
  col = 0;
  for (int m : ms.incoming_ids) {
    ms.stable_basis.middleCols(col, ms.modes[m].multiplicity()) = ms.modes[m].r;
    col += ms.modes[m].multiplicity();
  }
  const Mat BS = model.boundary * ms.stable_basis;
  Eigen::JacobiSVD<Mat> svd(BS, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  int small = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= 1e-8 * std::max(1.0, sv(0))) ++small;
  if (small == 0 && !require_wr) return ms;
  if (small != 1)
    fail(Status::not_wr, "not in WR configuration at beta: dim(ker B on stable subspace) = " + std::to_string(small));
  Vec c = svd.matrixV().col(p_stable - 1);
  ms.e = ms.stable_basis * c;
  const double emax = ms.e.cwiseAbs().maxCoeff();
  double sgn = 1;
  for (int i = 0; i < N; ++i)
    if (std::abs(ms.e(i)) > emax * (1 - 1e-8)) {
      sgn = ms.e(i) > 0 ? 1 : -1;
      break;
    }
  c *= sgn / emax;
  ms.e *= sgn / emax;
  ms.e_coef.assign(ms.M(), Vec());
  col = 0;
  for (int m = 0; m < ms.M(); ++m) ms.e_coef[m] = Vec::Zero(ms.modes[m].multiplicity());
  for (int m : ms.incoming_ids) {
    ms.e_coef[m] = c.segment(col, ms.modes[m].multiplicity());
    col += ms.modes[m].multiplicity();
  }
  ms.b = svd.matrixU().col(p_stable - 1);
  for (int i = 0; i < ms.b.size(); ++i)
    if (std::abs(ms.b(i)) > 1e-8 * ms.b.cwiseAbs().maxCoeff()) {
      ms.b /= ms.b(i);
      break;
    }

  ms.xlop = Vec::Zero(model.d);
  for (int j = 0; j < model.d; ++j) {
    const Mat Aj = model.A(j);
    Vec acc = Vec::Zero(N);
    for (int m : ms.incoming_ids) acc += ms.modes[m].R * Aj * ms.modes[m].r * ms.e_coef[m];
    ms.xlop(j) = ms.b.dot(model.boundary * acc);
  }
  return ms;
}

std::vector<ResonanceTriple> find_resonances(const ModeSet& ms, int n_max, double tol) {
  std::vector<ResonanceTriple> out;
  if (n_max <= 0) return out;
  const double wmax = ms.omegas().cwiseAbs().maxCoeff();
  for (int m : ms.outgoing_ids)
    for (std::size_t a = 0; a < ms.incoming_ids.size(); ++a)
      for (std::size_t bb = a + 1; bb < ms.incoming_ids.size(); ++bb) {
        const int p = ms.incoming_ids[a], r = ms.incoming_ids[bb];
        for (int np = -n_max; np <= n_max; ++np)
          for (int nr = -n_max; nr <= n_max; ++nr) {
            const int nm = np + nr;
            if (np == 0 || nr == 0 || nm <= 0 || nm > n_max) continue;
            if (std::gcd(std::gcd(std::abs(np), std::abs(nr)), nm) != 1) continue;
            const double defect = std::abs(nm * ms.modes[m].omega - np * ms.modes[p].omega - nr * ms.modes[r].omega);
            const int nabs = std::max({std::abs(np), std::abs(nr), nm});
            if (defect <= tol * nabs * std::max(wmax, 1e-300)) out.push_back({m, p, r, nm, np, nr, defect});
          }
      }
  return out;
}

std::optional<std::pair<long, long>> euler_resonance_pq(const EulerParams& prm, long max_den, double tol) {
  const double M2 = prm.mach() * prm.mach();
  const double x = 2 * M2 / (1 - M2);
  // continued-fraction convergents h/k
  long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rem = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(rem);
    const long h2 = static_cast<long>(a) * h1 + h0, k2 = static_cast<long>(a) * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(static_cast<double>(h1) / k1 - x) <= tol * std::max(1.0, x)) return std::make_pair(h1, k1);
    const double frac = rem - a;
    if (frac < 1e-15) break;
    rem = 1 / frac;
  }
  return std::nullopt;
}

}  // namespace oscamp
