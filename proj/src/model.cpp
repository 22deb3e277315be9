#include "oscamp/model.hpp"

#include <cmath>
#include <random>

namespace oscamp {

Quadratic::Quadratic(int out, int n) : comp(out, Mat::Zero(n, n)) {}

bool Quadratic::is_zero() const {
  for (const auto& m : comp)
    if (m.norm() > 0) return false;
  return true;
}

double Quadratic::asymmetry() const {
  double worst = 0;
  for (const auto& m : comp) worst = std::max(worst, (m - m.transpose()).cwiseAbs().maxCoeff());
  return worst;
}

Vec Quadratic::operator()(const Vec& u, const Vec& w) const {
  Vec out(out_dim());
  for (int i = 0; i < out_dim(); ++i) out(i) = u.dot(comp[i] * w);
  return out;
}

CVec Quadratic::operator()(const CVec& u, const CVec& w) const {
  CVec out(out_dim());
  for (int i = 0; i < out_dim(); ++i) out(i) = (u.transpose() * comp[i].cast<cd>() * w)(0, 0);
  return out;
}

Mat Quadratic::jacobian(const Vec& u) const {
  Mat J(out_dim(), in_dim());
  for (int i = 0; i < out_dim(); ++i) J.row(i) = u.transpose() * (comp[i] + comp[i].transpose());
  return J;
}

Mat HyperbolicModel::A(int j) const {
  auto lu = Bd().partialPivLu();
  if (j == 0) return lu.inverse();
  return lu.solve(B[j - 1]);
}

Mat HyperbolicModel::normal_form() const {
  Mat K = beta(0) * Mat::Identity(N, N);
  for (int j = 1; j < d; ++j) K += beta(j) * B[j - 1];
  return Bd().partialPivLu().solve(K);
}

HyperbolicModel euler_model(double v, double u, double c, double eta) {
  if (!(v > 0) || !(u > 0) || !(c > 0) || !(eta > 0))
    fail(Status::invalid_argument, "euler_model: v, u, c, eta must be positive");
  if (u >= c) fail(Status::invalid_argument, "euler_model: requires 0 < u < c (subsonic incoming flow), got u >= c");
  HyperbolicModel m;
  m.d = 2;
  m.N = 3;
  Mat A1(3, 3), A2(3, 3);
  A1 << 0, -v, 0, -c * c / v, 0, 0, 0, 0, 0;
  A2 << u, 0, -v, 0, u, 0, -c * c / v, 0, u;
  m.B = {A1, A2};
  m.boundary.resize(2, 3);
  m.boundary << 0, v, 0, u, 0, v;
  m.D0 = Mat::Zero(3, 3);
  m.D = Quadratic(3, 3);
  m.Psi = Quadratic(2, 3);
  m.beta.resize(2);
  m.beta << c * eta, eta;
  m.euler = EulerParams{v, u, c, eta};
  return m;
}

ValidationReport validate(const HyperbolicModel& model, int n_samples, std::uint64_t seed) {
  ValidationReport rep;
  auto bad = [&](const std::string& why) {
    rep.pass = false;
    rep.failures.push_back(why);
  };
  const int N = model.N;
  if (static_cast<int>(model.B.size()) != model.d || N <= 0) {
    bad("inconsistent dimensions");
    return rep;
  }
  Eigen::JacobiSVD<Mat> svd(model.Bd());
  const Vec s = svd.singularValues();
  rep.bd_condition = s(0) > 0 ? s(0) / std::max(s(N - 1), 1e-300) : INFINITY;
  if (s(N - 1) <= 1e-12 * std::max(1.0, s(0))) {
    bad("B_d singular");
    return rep;
  }
  Eigen::EigenSolver<Mat> es(model.Bd());
  for (int i = 0; i < N; ++i)
    if (es.eigenvalues()(i).real() > 1e-12) ++rep.p_positive;
  Eigen::JacobiSVD<Mat> bsvd(model.boundary);
  const Vec bs = bsvd.singularValues();
  for (int i = 0; i < bs.size(); ++i)
    if (bs(i) > 1e-12 * std::max(1.0, bs(0))) ++rep.boundary_rank;
  if (rep.boundary_rank != model.p() || model.p() != rep.p_positive)
    bad("rank(B) = " + std::to_string(rep.boundary_rank) + ", rows = " + std::to_string(model.p()) +
        ", positive eigenvalues of B_d = " + std::to_string(rep.p_positive));
  if (model.p() < 1 || model.p() > N - 1) bad("p must lie in [1, N-1]");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int s_i = 0; s_i < n_samples; ++s_i) {
    Vec xi(model.d);
    for (int j = 0; j < model.d; ++j) xi(j) = gauss(rng);
    xi /= xi.norm();
    Mat S = Mat::Zero(N, N);
    for (int j = 0; j < model.d; ++j) S += xi(j) * model.B[j];
    Eigen::EigenSolver<Mat> ev(S);
    for (int i = 0; i < N; ++i) rep.max_imag = std::max(rep.max_imag, std::abs(ev.eigenvalues()(i).imag()));
    Eigen::JacobiSVD<CMat> vs(ev.eigenvectors());
    const Vec sv = vs.singularValues();
    rep.max_eigvec_condition = std::max(rep.max_eigvec_condition, sv(0) / std::max(sv(N - 1), 1e-300));
  }
  if (rep.max_imag > 1e-9) bad("sum xi_j B_j has complex eigenvalues (max imag " + std::to_string(rep.max_imag) + ")");
  if (rep.max_eigvec_condition > 1e8) bad("eigenvector basis nearly defective");
  if (!model.D.comp.empty()) {
    rep.d_asymmetry = model.D.asymmetry();
    if (model.D.out_dim() != N || model.D.in_dim() != N) bad("D has wrong shape");
    if (rep.d_asymmetry > 1e-12) bad("D not symmetric");
  }
  if (!model.Psi.comp.empty() && (model.Psi.out_dim() != model.p() || model.Psi.in_dim() != N)) bad("Psi has wrong shape");
  if (model.beta.size() != model.d || model.beta.norm() == 0) bad("beta must be a nonzero d-vector");
  return rep;
}

void BoundarySource::set_mode(int k, const std::vector<std::string>& re, const std::vector<std::string>& im) {
  if (k <= 0) fail(Status::invalid_argument, "source modes are given for k >= 1 (k <= 0 follows from mean zero and symmetry)");
  if (static_cast<int>(re.size()) != p || static_cast<int>(im.size()) != p)
    fail(Status::invalid_argument, "source mode " + std::to_string(k) + " needs " + std::to_string(p) + " components");
  ModeExpr m;
  for (const auto& s : re) m.re.push_back(Expr::parse(s, ramp));
  for (const auto& s : im) m.im.push_back(Expr::parse(s, ramp));
  modes[k] = std::move(m);
}

CVec BoundarySource::G(int k, double t, double x1) const {
  CVec g = CVec::Zero(p);
  auto it = modes.find(std::abs(k));
  if (k == 0 || it == modes.end()) return g;
  for (int i = 0; i < p; ++i) g(i) = cd(it->second.re[i](t, x1), it->second.im[i](t, x1));
  return k > 0 ? g : CVec(g.conjugate());
}

void BoundarySource::check_causal() const {
  for (const auto& [k, m] : modes)
    for (double t : {-1.0, -0.1, -1e-3})
      for (double x : {0.0, 0.3 * L1, 0.71 * L1})
        if (G(k, t, x).norm() != 0)
          fail(Status::invalid_argument, "source mode " + std::to_string(k) + " is nonzero for t < 0 (multiply by chi(t))");
}

}  // namespace oscamp
