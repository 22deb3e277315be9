#include "oscamp/profiles.hpp"

#include <algorithm>
#include <cmath>

namespace oscamp {

CMat& TrigSeries::at(const MultiIndex& alpha) {
  auto it = coef.find(alpha);
  if (it == coef.end()) it = coef.emplace(alpha, CMat::Zero(N, P)).first;
  return it->second;
}

const CMat* TrigSeries::find(const MultiIndex& alpha) const {
  auto it = coef.find(alpha);
  return it == coef.end() ? nullptr : &it->second;
}

void TrigSeries::add(const MultiIndex& alpha, const CMat& value) { at(alpha) += value; }

int TrigSeries::support_width() const {
  int w = 0;
  for (const auto& [a, v] : coef) w = std::max(w, static_cast<int>(std::count_if(a.begin(), a.end(), [](int x) { return x != 0; })));
  return w;
}

bool TrigSeries::single_phase() const { return support_width() <= 1; }

double TrigSeries::max_abs() const {
  double mx = 0;
  for (const auto& [a, v] : coef)
    if (v.size()) mx = std::max(mx, v.cwiseAbs().maxCoeff());
  return mx;
}

double TrigSeries::max_diff(const TrigSeries& other) const { return (*this - other).max_abs(); }

TrigSeries TrigSeries::operator-(const TrigSeries& other) const {
  TrigSeries out = *this;
  for (const auto& [a, v] : other.coef) out.add(a, -v);
  return out;
}

TrigSeries TrigSeries::operator+(const TrigSeries& other) const {
  TrigSeries out = *this;
  for (const auto& [a, v] : other.coef) out.add(a, v);
  return out;
}

CVec TrigSeries::eval(const Vec& theta, int point) const {
  CVec out = CVec::Zero(N);
  for (const auto& [a, v] : coef) {
    double ph = 0;
    for (int j = 0; j < M; ++j) ph += a[j] * theta(j);
    out += v.col(point) * std::exp(cd(0, ph));
  }
  return out;
}

MultiIndex single(int M, int m, int n) {
  MultiIndex a(M, 0);
  a[m] = n;
  return a;
}

namespace {

double alpha_dot_omega(const ModeSet& ms, const MultiIndex& a) {
  double s = 0;
  for (int j = 0; j < ms.M(); ++j) s += a[j] * ms.modes[j].omega;
  return s;
}

int alpha_sum(const MultiIndex& a) {
  int s = 0;
  for (int x : a) s += x;
  return s;
}

double min_gap(const ModeSet& ms) {
  double g = INFINITY;
  for (int i = 0; i < ms.M(); ++i)
    for (int j = i + 1; j < ms.M(); ++j) g = std::min(g, std::abs(ms.modes[i].omega - ms.modes[j].omega));
  return std::isfinite(g) ? g : 1.0;
}

}  // namespace

ModeLabel classify_mode(const ModeSet& ms, const MultiIndex& alpha) {
  if (static_cast<int>(alpha.size()) != ms.M()) fail(Status::invalid_argument, "multi-index has wrong length");
  ModeLabel lab;
  if (std::all_of(alpha.begin(), alpha.end(), [](int x) { return x == 0; })) return lab;
  const int n = alpha_sum(alpha);
  const double aw = alpha_dot_omega(ms, alpha);
  int width = 0;
  for (int x : alpha) width += std::abs(x);
  const double tol = 1e-8 * min_gap(ms) * std::max(1, width);
  if (n == 0) {
    if (std::abs(aw) <= tol) fail(Status::ambiguous_mode, "multi-index has identically vanishing phase");
    lab.kind = ModeLabel::noncharacteristic;
    return lab;
  }
  int found = -1;
  for (int m = 0; m < ms.M(); ++m)
    if (std::abs(aw - n * ms.modes[m].omega) <= tol) {
      if (found >= 0) fail(Status::ambiguous_mode, "multi-index matches two characteristic phases");
      found = m;
    }
  if (found < 0) {
    lab.kind = ModeLabel::noncharacteristic;
    return lab;
  }
  lab.kind = ModeLabel::characteristic;
  lab.m = found;
  lab.n = n;
  return lab;
}

TrigSeries project_E(const ModeSet& ms, const TrigSeries& V) {
  TrigSeries out(V.M, V.N, V.P);
  for (const auto& [a, v] : V.coef) {
    const ModeLabel lab = classify_mode(ms, a);
    if (lab.kind == ModeLabel::zero) out.add(a, v);
    else if (lab.kind == ModeLabel::characteristic) out.add(single(V.M, lab.m, lab.n), ms.modes[lab.m].P.cast<cd>() * v);
  }
  return out;
}

RResult partial_inverse_R(const ModeSet& ms, const TrigSeries& F, double det_floor) {
  RResult res;
  res.value = TrigSeries(F.M, F.N, F.P);
  const cd I(0, 1);
  for (const auto& [a, v] : F.coef) {
    const ModeLabel lab = classify_mode(ms, a);
    if (lab.kind == ModeLabel::zero) continue;
    if (lab.kind == ModeLabel::characteristic) {
      res.value.add(a, (ms.modes[lab.m].R.cast<cd>() * v) / (I * static_cast<double>(lab.n)));
      continue;
    }
    const Mat L = ms.L_at(alpha_sum(a), alpha_dot_omega(ms, a));
    auto lu = L.partialPivLu();
    const double det = std::abs(lu.determinant());
    res.min_det = std::min(res.min_det, det);
    if (det < det_floor) {
      std::string s;
      for (int x : a) s += (s.empty() ? "" : ",") + std::to_string(x);
      fail(Status::small_divisor, "small divisor at alpha = (" + s + "), |det| = " + std::to_string(det));
    }
    res.value.add(a, lu.inverse().cast<cd>() * v / I);
  }
  return res;
}

TrigSeries apply_cL(const ModeSet& ms, const TrigSeries& V) {
  TrigSeries out(V.M, V.N, V.P);
  for (const auto& [a, v] : V.coef) {
    if (alpha_sum(a) == 0 && std::all_of(a.begin(), a.end(), [](int x) { return x == 0; })) continue;
    out.add(a, cd(0, 1) * ms.L_at(alpha_sum(a), alpha_dot_omega(ms, a)).cast<cd>() * v);
  }
  return out;
}

ScalarSeries prepare(const ScalarSeries& a, int n) {
  if (n == 0) fail(Status::invalid_argument, "prepare: n must be nonzero");
  ScalarSeries out;
  for (const auto& [k, v] : a)
    if (k % n == 0) out[k] = v;
  return out;
}

double l2_norm(const ScalarSeries& a) {
  double s = 0;
  for (const auto& [k, v] : a) s += std::norm(v);
  return std::sqrt(s);
}

cd eval(const ScalarSeries& a, double theta) {
  cd s = 0;
  for (const auto& [k, v] : a) s += v * std::exp(cd(0, k * theta));
  return s;
}

ScalarSeries interaction_integral(const ScalarSeries& sp, const ScalarSeries& sr, const ResonanceTriple& tr) {
  ScalarSeries out;
  for (const auto& [j, vp] : sp) {
    if (j % tr.n_p) continue;
    const int k = j / tr.n_p;
    auto it = sr.find(k * tr.n_r);
    if (it == sr.end()) continue;
    out[k * tr.n_m] += vp * it->second;
  }
  return out;
}

cd interaction_quadrature(const ScalarSeries& sp, const ScalarSeries& sr, const ResonanceTriple& tr, double theta, int nodes) {
  cd s = 0;
  for (int q = 0; q < nodes; ++q) {
    const double u = 2 * pi * q / nodes;
    s += eval(sp, theta + tr.n_r * u) * eval(sr, theta - tr.n_p * u);
  }
  return s / static_cast<double>(nodes);
}

ScalarSeries primitive_mean_zero(const ScalarSeries& a) {
  double scale = 0;
  for (const auto& [k, v] : a) scale = std::max(scale, std::abs(v));
  auto it = a.find(0);
  if (it != a.end() && std::abs(it->second) > 1e-13 * std::max(1.0, scale))
    fail(Status::invalid_argument, "primitive_mean_zero: input has nonzero mean");
  ScalarSeries out;
  for (const auto& [k, v] : a)
    if (k != 0) out[k] = v / cd(0, k);
  return out;
}

ScalarSeries derivative(const ScalarSeries& a) {
  ScalarSeries out;
  for (const auto& [k, v] : a)
    if (k != 0) out[k] = cd(0, k) * v;
  return out;
}

}  // namespace oscamp
