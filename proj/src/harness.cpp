#include "oscamp/harness.hpp"

#include "oscamp/corrector.hpp"
#include "oscamp/linear_oracle.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace oscamp {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string row(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) s += (s.empty() ? "" : ",") + c;
  return s + "\n";
}

double spread(const std::vector<double>& v) {
  double lo = INFINITY, hi = 0;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return lo > 0 ? hi / lo : INFINITY;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double a = std::log(x[i]), b = std::log(std::max(y[i], 1e-300));
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Stable spectral projector of A by the scaled Newton iteration for the matrix sign.
CMat stable_projector(const CMat& A) {
  const int N = static_cast<int>(A.rows());
  CMat X = A;
  for (int it = 0; it < 200; ++it) {
    const auto lu = X.partialPivLu();
    const double mu = std::pow(std::abs(lu.determinant()), -1.0 / N);
    const CMat Xn = 0.5 * (mu * X + lu.inverse() / mu);
    const double d = (Xn - X).norm();
    X = Xn;
    if (d < 1e-14 * X.norm()) break;
  }
  return 0.5 * (CMat::Identity(N, N) - X);
}

std::vector<TrigSeries> random_series(std::mt19937_64& rng, const ModeSet& ms, int K, int terms, bool single_only,
                                      int count) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> pick(-K, K), slot(0, ms.M() - 1);
  std::vector<TrigSeries> out;
  for (int c = 0; c < count; ++c) {
    TrigSeries V(ms.M(), ms.N());
    while (static_cast<int>(V.coef.size()) < terms) {
      MultiIndex a(ms.M(), 0);
      a[slot(rng)] = pick(rng);
      if (!single_only) a[slot(rng)] = pick(rng);
      try {
        if (classify_mode(ms, a).kind == ModeLabel::zero) continue;
      } catch (const Error&) {
        continue;
      }
      V.at(a) = CMat::NullaryExpr(ms.N(), 1, [&] { return cd(g(rng), g(rng)); });
    }
    out.push_back(V);
  }
  return out;
}

TrigSeries realify(const TrigSeries& F) {
  TrigSeries R(F.M, F.N, F.P);
  for (const auto& [a, c] : F.coef) {
    MultiIndex b = a;
    for (int& x : b) x = -x;
    R.at(a) = c;
    R.at(b) = c.conjugate();
  }
  return R;
}

}  // namespace

void ExperimentPlan::validate() const {
  for (std::size_t i = 1; i < eps.size(); ++i)
    if (!(eps[i] < eps[i - 1])) fail(Status::invalid_argument, "plan eps list must be strictly decreasing");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] > ladder[i - 1])) fail(Status::invalid_argument, "plan grid ladder must be strictly refining");
  for (double e : eps)
    if (!(e > 0 && e <= 1)) fail(Status::invalid_argument, "plan eps must lie in (0,1]");
}

ExperimentPlan default_plan(const std::string& id, const RunConfig& cfg) {
  ExperimentPlan p;
  p.id = id;
  p.eps = cfg.eps_list;
  p.ladder = {cfg.ppw, 2 * cfg.ppw};
  p.out = cfg.out + "/" + id;
  return p;
}

double lopatinskii_margin(const HyperbolicModel& model, int samples) {
  if (model.d != 2) fail(Status::invalid_argument, "Lopatinskii scan supports d = 2 only");
  const int N = model.N;
  const CMat B2inv = model.Bd().inverse().cast<cd>();
  const CMat B1 = model.B[0].cast<cd>();
  Eigen::JacobiSVD<Mat> bs(model.boundary);
  const CMat Bn = (model.boundary / bs.singularValues()(0)).cast<cd>();
  const int p = model.p();
  auto at = [&](double gamma, double tau, double eta) {
    const CMat A = -B2inv * (cd(gamma, tau) * CMat::Identity(N, N) + cd(0, eta) * B1);
    const CMat P = stable_projector(A);
    if (std::lround(P.trace().real()) != p) return 0.0;
    Eigen::ColPivHouseholderQR<CMat> qr(P);
    const CMat Q = qr.householderQ() * CMat::Identity(N, p);
    Eigen::JacobiSVD<CMat> svd(Bn * Q);
    return svd.singularValues()(p - 1);
  };
  const double bn = model.beta.norm();
  double worst = INFINITY;
  for (double gamma : {1e-4, 1e-2, 0.1, 0.3, 0.6, 0.9}) {
    const double r = std::sqrt(1 - gamma * gamma);
    for (int i = 0; i < samples; ++i) {
      const double ph = 2 * pi * i / samples;
      worst = std::min(worst, at(gamma, r * std::cos(ph), r * std::sin(ph)));
    }
    worst = std::min(worst, at(gamma, r * model.beta(0) / bn, r * model.beta(1) / bn));
  }
  return worst;
}

Problem control_problem(const Problem& pb) {
  if (!pb.model.euler) fail(Status::invalid_argument, "control model needs the Euler family");
  Problem c = pb;
  const EulerParams& e = *pb.model.euler;
  Mat B(2, 3);
  B << 0, 1, 0, e.c / e.v, 0, -1;
  c.model.boundary = B;
  return c;
}

AmplificationTable run_amplification_study(const Problem& pb, const ExperimentPlan& plan) {
  plan.validate();
  AmplificationTable t;
  std::vector<double> a, b;
  for (double eps : plan.eps) {
    const Trajectory tr = solve_direct(pb.model, pb.source, solver_options(pb.run, eps));
    AmplificationRow r;
    r.eps = eps;
    r.sup = tr.sup();
    r.per_eps = r.sup / eps;
    r.per_eps2 = r.sup / (eps * eps);
    t.rows.push_back(r);
    a.push_back(r.per_eps);
    b.push_back(r.per_eps2);
  }
  t.spread_eps = spread(a);
  t.spread_eps2 = spread(b);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const double h = t.rows[i - 1].eps / t.rows[i].eps;
    // normalized to one halving of eps
    t.growth_eps2.push_back(std::pow(b[i] / b[i - 1], std::log(2.0) / std::log(h)));
    t.growth_eps.push_back(std::pow(a[i] / a[i - 1], std::log(2.0) / std::log(h)));
  }
  return t;
}

bool amplified(const AmplificationTable& t, const Tolerances& tol) {
  if (t.rows.size() < 2 || !(t.spread_eps <= tol.amp_spread)) return false;
  for (double g : t.growth_eps2)
    if (g < tol.amp_growth_lo || g > tol.amp_growth_hi) return false;
  return true;
}

bool bounded_response(const AmplificationTable& t, const Tolerances& tol) {
  if (t.rows.size() < 2 || !(t.spread_eps2 <= tol.amp_spread)) return false;
  for (double g : t.growth_eps)
    if (1 / g < tol.amp_growth_lo || 1 / g > tol.amp_growth_hi) return false;
  return true;
}

ConvergenceRow convergence_row(const SpaceTimeField& v, const ApproxField& leading, const ApproxField& corrected,
                               double eps) {
  ConvergenceRow r;
  r.eps = eps;
  const ErrorReport l = compare_to_approx(v, leading, eps);
  const ErrorReport c = compare_to_approx(v, corrected, eps);
  r.sup_ref = l.sup_ref;
  r.leading = l.sup_error;
  r.corrected = c.sup_error;
  return r;
}

ConvergenceTable tabulate(std::vector<ConvergenceRow> rows) {
  ConvergenceTable t;
  t.rows = std::move(rows);
  std::vector<double> e, l, c;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    e.push_back(t.rows[i].eps);
    l.push_back(t.rows[i].leading);
    c.push_back(t.rows[i].corrected);
    if (i > 0) {
      t.ratio_leading.push_back(t.rows[i].leading / t.rows[i - 1].leading);
      t.ratio_corrected.push_back(t.rows[i].corrected / t.rows[i - 1].corrected);
    }
  }
  t.slope_leading = loglog_slope(e, l);
  t.slope_corrected = loglog_slope(e, c);
  return t;
}

ConvergenceTable run_convergence_study(const Problem& pb, const ExperimentPlan& plan) {
  plan.validate();
  const ModeSet ms = mode_package(pb.model);
  const ProfileSolution prof = solve_key_subsystem(pb.model, ms, pb.source, pb.run);
  const CorrectorOptions co = corrector_options(pb.run);
  std::vector<ConvergenceRow> rows;
  for (double eps : plan.eps) {
    SolverOptions opt = solver_options(pb.run, eps);
    opt.snapshot_times = {pb.run.T};
    const Trajectory tr = solve_direct(pb.model, pb.source, opt);
    const SpaceTimeField& v = tr.snapshots.back();
    const Vec x1 = v.grid.x1();
    CorrectedApprox ca(pb.model, ms, prof, pb.source, eps, {v.t}, co);
    rows.push_back(convergence_row(
        v, [&](double t, int j) { return Mat(eps * ca.leading(t, x1, v.grid.x2(j))); },
        [&](double t, int j) { return Mat(eps * ca.corrected(t, x1, v.grid.x2(j))); }, eps));
  }
  return tabulate(rows);
}

bool converges(const ConvergenceTable& t, const Tolerances& tol) {
  if (t.rows.size() < 2) return false;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (!(t.rows[i].corrected <= t.rows[i].leading)) return false;
    if (i > 0 && !(t.rows[i].corrected < t.rows[i - 1].corrected)) return false;
  }
  for (double r : t.ratio_corrected)
    if (!(r <= tol.conv_ratio)) return false;
  return true;
}

OracleStudy run_oracle_study(const Problem& pb, double eps, const std::vector<double>& ppw) {
  OracleStudy s;
  s.eps = eps;
  const LinearOracle orc(pb.model, pb.source, eps, pb.run.T);
  for (double p : ppw) {
    SolverOptions opt = solver_options(pb.run, eps);
    opt.ppw = p;
    opt.linear = true;
    opt.snapshot_times = {pb.run.T};
    const Trajectory tr = solve_direct(pb.model, pb.source, opt);
    const SpaceTimeField& v = tr.snapshots.back();
    const Vec x1 = v.grid.x1();
    const ErrorReport rep = compare_to_approx(v, [&](double t, int j) { return orc.row(t, x1, v.grid.x2(j)); }, eps);
    s.rows.push_back({p, rep.sup_error / rep.sup_ref});
  }
  for (std::size_t i = 1; i < s.rows.size(); ++i)
    s.orders.push_back(std::log(s.rows[i - 1].rel_error / s.rows[i].rel_error) /
                       std::log(s.rows[i].ppw / s.rows[i - 1].ppw));
  return s;
}

IdentityReport run_identity_suite(std::uint64_t seed, Fault fault) {
  const Tolerances tol;
  const HyperbolicModel model = euler_model(1, 1, std::sqrt(3.0), 1);
  ModeSet ms = mode_package(model);
  if (fault == Fault::projector) ms.modes[0].P += 1e-6 * Mat::Ones(ms.N(), ms.N());
  std::mt19937_64 rng(seed);
  IdentityReport rep;
  auto add = [&](const std::string& name, double defect, double t) {
    rep.rows.push_back({name, defect, t, defect <= t});
    rep.pass = rep.pass && defect <= t;
  };
  const int M = ms.M(), N = ms.N();

  double d = 0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      d = std::max(d, std::abs((ms.modes[i].l * ms.modes[j].r)(0, 0) - (i == j ? 1.0 : 0.0)));
  add("biorthogonality l_i r_j", d, tol.spectral);

  d = 0;
  Mat sum = Mat::Zero(N, N);
  for (int i = 0; i < M; ++i) {
    sum += ms.modes[i].P;
    for (int j = 0; j < M; ++j)
      d = std::max(d, (ms.modes[i].P * ms.modes[j].P - (i == j ? ms.modes[i].P : Mat::Zero(N, N))).cwiseAbs().maxCoeff());
  }
  d = std::max(d, (sum - Mat::Identity(N, N)).cwiseAbs().maxCoeff());
  add("projectors P_m P_n = delta P_m, sum P_m = I", d, tol.spectral);

  d = 0;
  for (int m = 0; m < M; ++m) d = std::max(d, (ms.L(m) * ms.modes[m].r).norm());
  add("characteristic L(d phi_m) r_m = 0", d, tol.spectral);

  d = 0;
  for (int m = 0; m < M; ++m) {
    const Mat RL = ms.modes[m].R * ms.L(m);
    d = std::max(d, (RL - (Mat::Identity(N, N) - ms.modes[m].P)).cwiseAbs().maxCoeff());
  }
  add("partial inverse R_m L(d phi_m) = I - P_m", d, tol.spectral);

  d = 0;
  for (int m = 0; m < M; ++m)
    d = std::max(d, (group_velocity(model, ms.beta, ms.modes[m].omega) - group_velocity_fd(model, ms.beta, ms.modes[m].omega)).norm());
  add("group velocity vs eigenvalue differences", d, 1e-6);

  add("boundary kernel B e = 0", (model.boundary * ms.e).norm(), tol.spectral);
  d = 0;
  for (int m : ms.incoming_ids) d = std::max(d, std::abs(ms.b.dot(model.boundary * ms.modes[m].r.col(0))));
  add("left kernel b . B r_m = 0 on incoming modes", d, tol.spectral);

  double e2 = 0, ecl = 0, clr = 0, rcl = 0;
  const auto multi = random_series(rng, ms, 6, 12, false, 50);
  const auto singles = random_series(rng, ms, 6, 8, true, 50);
  for (int t = 0; t < 50; ++t) {
    const TrigSeries E1 = project_E(ms, multi[t]);
    e2 = std::max(e2, project_E(ms, E1).max_diff(E1));
    ecl = std::max(ecl, project_E(ms, apply_cL(ms, multi[t])).max_abs());
    const TrigSeries& F = singles[t];
    const TrigSeries IE = F - project_E(ms, F);
    clr = std::max(clr, apply_cL(ms, partial_inverse_R(ms, F).value).max_diff(IE));
    rcl = std::max(rcl, partial_inverse_R(ms, apply_cL(ms, F)).value.max_diff(IE));
  }
  add("E E = E", e2, tol.identity);
  add("E cL = 0", ecl, tol.identity);
  add("cL R = I - E (single phase)", clr, tol.identity);
  add("R cL = I - E (single phase)", rcl, tol.identity);

  std::normal_distribution<double> g;
  const auto triples = find_resonances(ms, 4);
  d = 0;
  for (const auto& tr : triples)
    for (int t = 0; t < 50; ++t) {
      ScalarSeries p, r;
      for (int k = -8; k <= 8; ++k)
        if (k) {
          p[k] = cd(g(rng), g(rng));
          r[k] = cd(g(rng), g(rng));
        }
      const ScalarSeries J = interaction_integral(p, r, tr);
      for (double th : {0.0, 1.3, 4.4}) d = std::max(d, std::abs(eval(J, th) - interaction_quadrature(p, r, tr, th)));
    }
  add("interaction integral vs 256-node quadrature", d, tol.identity);

  d = 0;
  for (const auto& F0 : random_series(rng, ms, 3, 6, false, 50)) {
    TrigSeries F = realify(F0);
    F = F - project_E(ms, F);
    try {
      d = std::max(d, solve_fast_system(ms, F, 1e-10, INFINITY).residual);
    } catch (const Error&) {
      d = INFINITY;
    }
  }
  add("fast system forward residual (EF = 0)", d, tol.fast_residual);

  double worst = 0;
  for (const auto& c : smoothing_constants({2, 4, 8, 16, 32, 64}, 256, 128, 4, seed)) worst = std::max(worst, c.worst);
  add("smoothing inequality constants", worst, tol.smoothing_bound);
  return rep;
}

NashMoserStudy run_nash_moser_study(const Problem& pb, const NashMoserOptions& opt, bool with_smoothing) {
  NashMoserStudy s;
  if (with_smoothing) s.smoothing = smoothing_constants({2, 4, 8, 16, 32, 64});
  const ModeSet ms = mode_package(pb.model);
  const ProfileSystem sys = profile_system(pb.model, ms, pb.source, pb.run);
  s.nm = nash_moser_solve(sys, opt);
  s.picard = picard_solve(sys, opt.max_steps, opt.tol);
  const ProfileSolution prof = solve_key_subsystem(pb.model, ms, pb.source, pb.run, MemoryMode::exact, sys.dt());
  const History& h = prof.state.history;
  for (int k = 1; k <= sys.grid().K; ++k)
    s.limit_error = std::max(
        s.limit_error, (h.mode(k, h.last_time(), 0) - CVec(s.nm.V.a.back().col(k - 1))).cwiseAbs().maxCoeff());
  return s;
}

std::string to_csv(const AmplificationTable& t) {
  std::string s = row({"eps [1]", "sup_v [solution units]", "sup_v_over_eps [1]", "sup_v_over_eps2 [1]"});
  for (const auto& r : t.rows) s += row({num(r.eps), num(r.sup), num(r.per_eps), num(r.per_eps2)});
  return s;
}

std::string to_csv(const ConvergenceTable& t) {
  std::string s = row({"eps [1]", "sup_u [solution units]", "err_leading [solution units]", "err_corrected [solution units]",
                       "ratio_leading [1]", "ratio_corrected [1]"});
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    s += row({num(r.eps), num(r.sup_ref), num(r.leading), num(r.corrected), i ? num(t.ratio_leading[i - 1]) : "",
              i ? num(t.ratio_corrected[i - 1]) : ""});
  }
  return s;
}

std::string to_csv(const OracleStudy& st) {
  std::string s = row({"eps [1]", "ppw [points per wavelength]", "rel_sup_error [1]", "order [1]"});
  for (std::size_t i = 0; i < st.rows.size(); ++i)
    s += row({num(st.eps), num(st.rows[i].ppw), num(st.rows[i].rel_error), i ? num(st.orders[i - 1]) : ""});
  return s;
}

std::string to_csv(const IdentityReport& r) {
  std::string s = row({"identity", "max_defect [1]", "tolerance [1]", "pass"});
  for (const auto& x : r.rows) s += row({"\"" + x.name + "\"", num(x.defect), num(x.tol), x.pass ? "1" : "0"});
  return s;
}

std::string to_csv(const std::vector<NashMoserStep>& trace) {
  std::string s = row({"n", "theta [frequency]", "Delta [frequency]", "increment_s0", "increment_s1", "increment_s2",
                       "quadratic_error", "substitution_error", "accumulated_interior", "accumulated_boundary",
                       "residual_interior", "residual_boundary", "bookkeeping_interior", "bookkeeping_boundary",
                       "induction_holds"});
  for (const auto& t : trace) {
    auto inc = [&](int i) { return i < static_cast<int>(t.increment_norms.size()) ? num(t.increment_norms[i]) : ""; };
    s += row({std::to_string(t.n), num(t.theta), num(t.Delta), inc(0), inc(1), inc(2), num(t.quadratic_error),
              num(t.substitution_error), num(t.accumulated), num(t.accumulated_boundary), num(t.residual_interior),
              num(t.residual_boundary), num(t.bookkeeping), num(t.bookkeeping_boundary), t.induction_holds ? "1" : "0"});
  }
  return s;
}

std::string to_csv(const std::vector<PicardStep>& trace) {
  std::string s = row({"n", "residual_interior", "residual_boundary", "high_mode_norm", "increment_sup"});
  for (const auto& t : trace)
    s += row({std::to_string(t.n), num(t.residual_interior), num(t.residual_boundary), num(t.high_mode_norm), num(t.increment)});
  return s;
}

std::string to_csv(const std::vector<SmoothingCheck>& checks) {
  std::string s = row({"property", "beta [Sobolev index]", "alpha [Sobolev index]", "theta [frequency]", "constant [1]"});
  for (const auto& c : checks)
    for (std::size_t i = 0; i < c.thetas.size(); ++i)
      s += row({std::string(1, c.property), num(c.beta), num(c.alpha), num(c.thetas[i]), num(c.constants[i])});
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) fail(Status::io_error, "cannot write " + path);
  f << text;
}

}  // namespace oscamp
