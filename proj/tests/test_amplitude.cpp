#include "doctest.h"
#include "oscamp/amplitude.hpp"
#include "oscamp/config.hpp"

#include <cmath>

using namespace oscamp;

namespace {

const double s3 = std::sqrt(3.0);

// Gauss-Legendre nodes/weights on [-1,1] by Newton on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2 / ((1 - z * z) * dp * dp);
  }
}

template <class F>
cd integrate(F f, double a, double b, int n = 64) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  cd s = 0;
  for (int i = 0; i < n; ++i) s += w[i] * f(0.5 * (a + b) + 0.5 * (b - a) * x[i]);
  return 0.5 * (b - a) * s;
}

Problem euler_problem(const std::string& extra = "") {
  return parse_config(R"(
[system]
v = 1
u = 1
c = sqrt(3)
eta = 1
[source]
G.1.re = 0.4*chi(t)*(1 + 0.5*cos(x1)), 0
G.1.im = 0, 0.2*chi(t)*sin(x1)
[run]
T = 0.8
K = 8
n_x1_amp = 32
)" + extra);
}

}  // namespace

TEST_CASE("constants") {
  Problem pb = euler_problem();
  ModeSet ms = mode_package(pb.model);
  auto tr = find_resonances(ms, 8);
  auto c = compute_constants(pb.model, ms, tr);
  CHECK(c.alpha1 == 0);
  REQUIRE(c.memory.size() == 1);
  CHECK(c.memory[0].alpha2 == 0);
  CHECK(c.w == doctest::Approx(-s3));
  CHECK(*c.euler_normalizer == doctest::Approx(4));
  CHECK(c.s[1] * ms.modes[1].r(0, 0) == doctest::Approx(1).epsilon(1e-12));

  pb.model.Psi.comp[1](0, 0) = 1;  // Psi(e,e) = (0, e_1^2) = (0, 1)
  auto c2 = compute_constants(pb.model, ms, tr);
  // b = (1, -sqrt3), raw transport time coefficient -2
  CHECK(c2.alpha1 == doctest::Approx(-s3 / 2).epsilon(1e-12));
}

TEST_CASE("linear transport against characteristics") {
  Problem pb = euler_problem();
  ModeSet ms = mode_package(pb.model);
  auto errors = std::vector<double>();
  for (double dt : {0.04, 0.02, 0.01}) {
    auto sol = solve_key_subsystem(pb.model, ms, pb.source, pb.run, MemoryMode::exact, dt);
    const auto& c = sol.constants;
    const Vec x = sol.state.grid.x();
    double err = 0;
    for (int i = 0; i < x.size(); ++i) {
      const double t = pb.run.T;
      cd exact = integrate(
          [&](double s) {
            const double xs = x(i) - c.w * (t - s);
            return -cd(0, 1) * c.b.cast<cd>().dot(pb.source.G(1, s, xs)) / c.kappa_t;
          },
          0, t, 80);
      err = std::max(err, std::abs(sol.state.a(i, 0) - exact));
    }
    CHECK(sol.state.a.rightCols(7).norm() == 0);
    errors.push_back(err);
  }
  CHECK(errors[2] < 1e-4);
  CHECK(std::log2(errors[1] / errors[2]) > 1.8);
  CHECK(std::log2(errors[0] / errors[1]) > 1.8);
}

TEST_CASE("zero forcing gives zero amplitude") {
  Problem pb = euler_problem();
  pb.source.modes.clear();
  pb.model.Psi.comp[1](0, 0) = 1;
  ModeSet ms = mode_package(pb.model);
  auto sol = solve_key_subsystem(pb.model, ms, pb.source, pb.run);
  CHECK(sol.state.a.norm() == 0);
  CHECK(sol.state.max_abs == 0);
}

TEST_CASE("theta mean stays zero with Burgers term") {
  Problem pb = euler_problem();
  pb.model.Psi.comp[1](0, 0) = 1;
  ModeSet ms = mode_package(pb.model);
  auto sol = solve_key_subsystem(pb.model, ms, pb.source, pb.run);
  CHECK(sol.state.max_abs > 0.05);
  CHECK(sol.state.max_theta_mean < 1e-12);
  CHECK(sol.state.a.col(1).norm() > 0);  // a^2 feeds mode 2
}

TEST_CASE("memory term against refined quadrature") {
  AmplitudeGrid g{32, 4, 2 * pi};
  History h(g);
  auto exact = [](int k, double t, double x) -> cd {
    if (t <= 0) return 0;
    const double f = t * t * t;
    if (k == 1) return f * cd(std::cos(x), 0.3);
    if (k == 2) return f * cd(0.5, std::sin(2 * x));
    return 0;
  };
  auto dexact = [&](int k, double t, double x) -> cd { return t <= 0 ? 0.0 : exact(k, t, x) * 3.0 / t; };
  const Vec x = g.x();
  const double dt = 0.02;
  for (int j = 0; j <= 40; ++j) {
    const double t = j * dt;
    CMat a = CMat::Zero(g.n, g.K), ad = CMat::Zero(g.n, g.K);
    for (int i = 0; i < g.n; ++i)
      for (int k = 1; k <= 2; ++k) {
        a(i, k - 1) = exact(k, t, x(i));
        ad(i, k - 1) = dexact(k, t, x(i));
      }
    h.push(t, a);
    h.set_derivative(j, ad);
  }
  HyperbolicModel m = euler_model(1, 1, s3, 1);
  m.D.comp[0](1, 2) = m.D.comp[0](2, 1) = 1;
  ModeSet ms = mode_package(m);
  auto c = compute_constants(m, ms, find_resonances(ms, 4));
  REQUIRE(c.memory.size() == 1);
  const auto& mem = c.memory[0];
  const double t = 0.8;
  CMat M = memory_term_exact(h, mem, c, t);
  CHECK(memory_term_exact(h, mem, c, 0).norm() == 0);
  // k = 1: a_2((3s-t)/2, x + c(t-s)) a_{-1}((3s-t)/2, x + (c/2)(t-s))
  double num = 0, den = 0;
  for (int i = 0; i < g.n; ++i) {
    cd ref = integrate(
        [&](double s) {
          const double T = (3 * s - t) / 2;
          return exact(2, T, x(i) + s3 * (t - s)) * std::conj(exact(1, T, x(i) + s3 / 2 * (t - s)));
        },
        t / 3, t, 80);
    num += std::norm(M(i, 0) - ref);
    den += std::norm(ref);
  }
  CHECK(std::sqrt(num / den) < 1e-3);
  // mode 2 would need a_4 and a_{-2}; a_4 = 0
  CHECK(M.col(1).norm() == 0);
}

TEST_CASE("grid tau trace converges to exact memory") {
  Problem pb = euler_problem();
  pb.model.D.comp[0](1, 2) = pb.model.D.comp[0](2, 1) = 1;
  pb.model.Psi.comp[1](0, 0) = 1;
  ModeSet ms = mode_package(pb.model);
  std::vector<double> rel;
  for (int level = 0; level < 2; ++level) {
    RunConfig cfg = pb.run;
    cfg.memory = "grid";
    AmplitudeGrid grid{cfg.n_x1_amp, cfg.K, pb.source.L1};
    auto c0 = compute_constants(pb.model, ms, find_resonances(ms, cfg.K));
    const double H = 1.2 * 0.5 * cfg.T;
    cfg.tau_dx2 = H / (32 << level);
    const double dt = default_amplitude_dt(c0, grid, cfg.cfl_amp, MemoryMode::grid, cfg.T, cfg.tau_dx2);
    auto sol = solve_key_subsystem(pb.model, ms, pb.source, cfg, MemoryMode::grid, dt);
    const auto& mem = sol.constants.memory[0];
    CMat ex = mem.mu * memory_term_exact(sol.state.history, mem, sol.constants, sol.state.t);
    CMat gr = sol.state.tau[0].trace();
    REQUIRE(ex.norm() > 0);
    rel.push_back((gr - ex).norm() / ex.norm());
  }
  MESSAGE("tau trace rel diff: " << rel[0] << " -> " << rel[1]);
  CHECK(rel[0] < 1e-2);
  CHECK(rel[0] / rel[1] >= 2);
}

TEST_CASE("sigma reconstruction") {
  Problem pb = euler_problem();
  ModeSet ms = mode_package(pb.model);
  auto sol = solve_key_subsystem(pb.model, ms, pb.source, pb.run);
  const auto& h = sol.state.history;
  const auto& c = sol.constants;
  const double t = sol.state.t;
  CMat s2 = reconstruct_sigma(h, c, 1, t, 0), s3m = reconstruct_sigma(h, c, 2, t, 0);
  CHECK((s2 - c.s[1] * sol.state.a).norm() < 1e-14);
  CHECK((s3m - c.s[2] * sol.state.a).norm() < 1e-14);
  // e-scaling: sigma_2 r_2 + sigma_3 r_3 = a e at the boundary
  CHECK(std::abs(c.s[1] * ms.modes[1].r(0, 0) + c.s[2] * ms.modes[2].r(0, 0) - 1) < 1e-12);
  // transport residual d_t sigma + v.grad sigma at an interior point, by finite differences
  const double x2 = 0.2, h2 = 1e-3, tt = 0.6;
  const Vec& v = c.v[1];
  CMat dt_ = (reconstruct_sigma(h, c, 1, tt + h2, x2) - reconstruct_sigma(h, c, 1, tt - h2, x2)) / (2 * h2);
  CMat dx2 = (reconstruct_sigma(h, c, 1, tt, x2 + h2) - reconstruct_sigma(h, c, 1, tt, x2 - h2)) / (2 * h2);
  CMat base = reconstruct_sigma(h, c, 1, tt, x2);
  CMat dx1(base.rows(), base.cols());
  for (int k = 0; k < base.cols(); ++k)
    dx1.col(k) = (h.mode(k + 1, tt - x2 / v(1), -v(0) * x2 / v(1) + h2) - h.mode(k + 1, tt - x2 / v(1), -v(0) * x2 / v(1) - h2)) *
                 c.s[1] / (2 * h2);
  CHECK((dt_ + v(0) * dx1 + v(1) * dx2).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(reconstruct_sigma(h, c, 1, 0.1, 0.5).norm() == 0);
}

TEST_CASE("linear regime doubling") {
  Problem pb = euler_problem();
  pb.model.Psi.comp[1](0, 0) = 1;
  pb.model.D.comp[0](1, 2) = pb.model.D.comp[0](2, 1) = 1;
  ModeSet ms = mode_package(pb.model);
  pb.run.T = 0.1;
  auto s1 = solve_key_subsystem(pb.model, ms, pb.source, pb.run);
  Problem pb2 = parse_config(save_config(pb) + "");
  for (auto& [k, me] : pb2.source.modes) {
    std::vector<std::string> re, im;
    for (auto& e : me.re) re.push_back("2*(" + e.text() + ")");
    for (auto& e : me.im) im.push_back("2*(" + e.text() + ")");
    pb2.source.set_mode(k, re, im);
  }
  auto s2 = solve_key_subsystem(pb2.model, ms, pb2.source, pb2.run);
  CHECK(s2.state.a.col(0).norm() / s1.state.a.col(0).norm() == doctest::Approx(2).epsilon(0.05));
}
