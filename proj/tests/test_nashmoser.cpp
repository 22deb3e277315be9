#include "doctest.h"
#include "oscamp/config.hpp"
#include "oscamp/nashmoser.hpp"

#include <cmath>
#include <random>
#include <string>

using namespace oscamp;

namespace {

std::string small_cfg(double amp, int K) {
  return "[system]\nv = 1\nu = 1\nc = sqrt(3)\neta = 1\nD.1 = 0,0,0, 0,0,1, 0,1,0\n"
         "[boundary]\nPsi.2 = 1,0,0, 0,0,0, 0,0,0\n"
         "[source]\nramp = 0.3\nG.1.re = " +
         std::to_string(amp) + "*chi(t)*(1+0.5*cos(x1)), 0\nG.1.im = 0, 0\n[run]\nT = 0.5\nK = " + std::to_string(K) +
         "\nn_x1_amp = 32\n";
}

CMat random_block(std::mt19937_64& rng, int n, int K) {
  std::normal_distribution<double> g;
  return CMat::NullaryExpr(n, K, [&] { return cd(g(rng), g(rng)); });
}

SpaceTimeData random_iterate(const ProfileSystem& sys, std::mt19937_64& rng, double scale) {
  SpaceTimeData d = sys.zero();
  for (std::size_t j = 1; j < d.a.size(); ++j) d.a[j] = scale * random_block(rng, sys.grid().n, sys.grid().K);
  for (auto& mq : d.m)
    for (auto& x : mq) x = scale * random_block(rng, sys.grid().n, sys.grid().K);
  return d;
}

}  // namespace

TEST_CASE("cutoff profile") {
  CHECK(cutoff(0) == 1);
  CHECK(cutoff(1) == 1);
  CHECK(cutoff(2) == 0);
  CHECK(cutoff(3) == 0);
  CHECK(std::abs(cutoff(1.5) - 0.5) < 1e-14);
  double prev = 1;
  for (double r = 1; r <= 2; r += 0.01) {
    CHECK(cutoff(r) <= prev + 1e-15);
    prev = cutoff(r);
  }
}

TEST_CASE("smoothing is the identity above the grid band") {
  std::mt19937_64 rng(2);
  const CMat u = random_block(rng, 32, 8);
  CHECK((smooth(u, 64, 2 * pi) - u).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(smooth(u, 1e-3, 2 * pi).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("theta derivative of the smoothing matches a difference quotient") {
  std::mt19937_64 rng(5);
  const CMat u = random_block(rng, 64, 16);
  const double L1 = 2 * pi, h = 1e-5;
  for (double th : {2.5, 7.0}) {
    const CMat fd = (smooth(u, th + h, L1) - smooth(u, th - h, L1)) / (2 * h);
    const CMat ex = smooth_dtheta(u, th, L1);
    CHECK((fd - ex).cwiseAbs().maxCoeff() < 1e-6 * (1 + ex.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("smoothing inequalities hold with bounded constants on theta in [2, 64]") {
  const auto checks = smoothing_constants({2, 4, 8, 16, 32, 64});
  CHECK(checks.size() == 8);
  for (const auto& c : checks) {
    INFO(c.property << " beta " << c.beta << " alpha " << c.alpha);
    CHECK(c.worst > 0);
    CHECK(c.worst <= 16);
  }
}

TEST_CASE("theta sequence satisfies the step bounds") {
  for (double th0 : {1.0, 4.0, 10.0})
    for (int n = 0; n < 200; ++n) {
      const double th = std::sqrt(th0 * th0 + n), th1 = std::sqrt(th0 * th0 + n + 1);
      CHECK(th1 - th >= 1 / (3 * th));
      CHECK(th1 - th <= 1 / (2 * th));
    }
  Problem pb = parse_config(small_cfg(0.05, 4));
  const ModeSet ms = mode_package(pb.model);
  const NashMoserResult r = nash_moser_solve(profile_system(pb.model, ms, pb.source, pb.run));
  for (const auto& s : r.trace) {
    CHECK(s.Delta >= 1 / (3 * s.theta));
    CHECK(s.Delta <= 1 / (2 * s.theta));
  }
}

TEST_CASE("derivative matches a difference quotient and the linear solve inverts it") {
  Problem pb = parse_config(small_cfg(0.5, 4));
  const ModeSet ms = mode_package(pb.model);
  const ProfileSystem sys = profile_system(pb.model, ms, pb.source, pb.run);
  std::mt19937_64 rng(9);
  const SpaceTimeData V = random_iterate(sys, rng, 0.1);
  const SpaceTimeData dV = random_iterate(sys, rng, 1.0);
  const double h = 1e-6;
  const SpaceTimeData fd = (sys.apply(V + dV * h) - sys.apply(V - dV * h)) * (0.5 / h);
  const SpaceTimeData ex = sys.derivative(V, dV);
  CHECK((fd - ex).sup() < 1e-6 * (1 + ex.sup()));

  const SpaceTimeData rhs = random_iterate(sys, rng, 1.0);
  const SpaceTimeData x = sys.solve_linear(V, rhs);
  CHECK((sys.derivative(V, x) - rhs).sup() < 1e-10 * (1 + rhs.sup()));
}

TEST_CASE("zero data gives the zero iterate") {
  Problem pb = parse_config(small_cfg(0, 4));
  const ModeSet ms = mode_package(pb.model);
  const ProfileSystem sys = profile_system(pb.model, ms, pb.source, pb.run);
  const NashMoserResult r = nash_moser_solve(sys);
  CHECK(r.converged);
  CHECK(r.V.sup() == 0);
  const PicardResult p = picard_solve(sys);
  CHECK(p.converged);
  CHECK(p.V.sup() == 0);
}

TEST_CASE("Nash-Moser converges for small data and matches the direct profile solve") {
  Problem pb = parse_config(small_cfg(0.5, 8));
  const ModeSet ms = mode_package(pb.model);
  REQUIRE(!find_resonances(ms, pb.run.K).empty());
  const ProfileSystem sys = profile_system(pb.model, ms, pb.source, pb.run);
  const NashMoserResult r = nash_moser_solve(sys, nash_moser_options(pb.run));
  REQUIRE(r.converged);
  CHECK(r.trace.size() <= 30);
  const auto& last = r.trace.back();
  CHECK(last.residual_interior < 1e-6);
  CHECK(last.residual_boundary < 1e-6);
  for (std::size_t n = 1; n < r.trace.size(); ++n) {
    const auto& a = r.trace[n - 1];
    const auto& b = r.trace[n];
    CHECK(std::max(b.residual_interior, b.residual_boundary) < 0.5 * std::max(a.residual_interior, a.residual_boundary));
  }
  for (const auto& s : r.trace) {
    CHECK(s.bookkeeping < 1e-13);
    CHECK(s.bookkeeping_boundary < 1e-13);
    CHECK(s.linear_defect < 1e-12);
    CHECK(s.increment_norms.size() == 5);
  }
  CHECK(r.V.sup_m() > 0);

  const ProfileSolution prof = solve_key_subsystem(pb.model, ms, pb.source, pb.run, MemoryMode::exact, sys.dt());
  const History& h = prof.state.history;
  double diff = 0;
  for (int k = 1; k <= pb.run.K; ++k)
    diff = std::max(diff, (h.mode(k, pb.run.T, 0) - CVec(r.V.a.back().col(k - 1))).cwiseAbs().maxCoeff());
  CHECK(diff < 1e-4);
}

TEST_CASE("Picard iteration converges at coarse truncation") {
  Problem pb = parse_config(small_cfg(0.05, 4));
  const ModeSet ms = mode_package(pb.model);
  const ProfileSystem sys = profile_system(pb.model, ms, pb.source, pb.run);
  const PicardResult p = picard_solve(sys);
  CHECK(p.converged);
  const NashMoserResult r = nash_moser_solve(sys);
  REQUIRE(r.converged);
  CHECK((p.V - r.V).sup() < 1e-6);
}
