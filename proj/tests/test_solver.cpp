#include "doctest.h"
#include "oscamp/config.hpp"
#include "oscamp/fourier.hpp"
#include "oscamp/linear_oracle.hpp"
#include "oscamp/solver.hpp"
#include "oscamp/spectral.hpp"

#include <cmath>

using namespace oscamp;

namespace {

const double s3 = std::sqrt(3.0);

Problem small_problem(const std::string& g1re = "chi(t)*(1 + 0.5*cos(x1)), 0", const std::string& extra = "") {
  return parse_config(R"(
[system]
v = 1
u = 1
c = sqrt(3)
eta = 1
[source]
G.1.re = )" + g1re + R"(
G.1.im = 0, 0.5*chi(t)*sin(x1)
[run]
T = 0.3
ppw = 12
L2 = 0.9
)" + extra);
}

Trajectory run(const Problem& pb, double eps, SolverOptions opt) {
  const ModeSet ms = mode_package(pb.model);
  const SolverGrid g = make_grid(pb.model, ms, pb.source.L1, opt);
  DirectSolver s(pb.model, g, opt, oscillatory_data(pb.source, pb.model.beta, eps));
  return run_solver(s, opt.T, stable_dt(pb.model, g, opt.cfl), {opt.T});
}

double field_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
  double d = 0;
  for (int c = 0; c < a.N(); ++c) d = std::max(d, (a.comp[c] - b.comp[c]).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

TEST_CASE("solver grid sizing follows the wavelength") {
  const Problem pb = small_problem();
  SolverOptions opt = solver_options(pb.run, 0.25);
  const SolverGrid g = make_grid(pb.model, mode_package(pb.model), pb.source.L1, opt);
  CHECK(g.n1 == 48);
  CHECK(g.dx1() <= 2 * pi * 0.25 / 12 + 1e-14);
  CHECK(g.dx2() <= 2 * pi * 0.25 / s3 / 12 + 1e-14);
  CHECK(g.L2 == doctest::Approx(0.9));
  opt.ppw = 8;
  CHECK_THROWS_AS(make_grid(pb.model, mode_package(pb.model), pb.source.L1, opt), Error);
}

TEST_CASE("zero boundary data keeps the zero state") {
  Problem pb = small_problem("0, 0");
  pb.source.modes.clear();
  pb.model.Psi.comp[1](0, 0) = 1;
  pb.model.D.comp[0](1, 2) = pb.model.D.comp[0](2, 1) = 1;
  const Trajectory tr = run(pb, 0.25, solver_options(pb.run, 0.25));
  CHECK(tr.sup() == 0.0);
  CHECK(tr.snapshots.back().sup() == 0.0);
}

TEST_CASE("state is zero at t = 0 under causal data") {
  const Problem pb = small_problem();
  SolverOptions opt = solver_options(pb.run, 0.25);
  const ModeSet ms = mode_package(pb.model);
  const SolverGrid g = make_grid(pb.model, ms, pb.source.L1, opt);
  DirectSolver s(pb.model, g, opt, oscillatory_data(pb.source, pb.model.beta, 0.25));
  const Trajectory tr = run_solver(s, 0.05, stable_dt(pb.model, g, opt.cfl), {0.0});
  CHECK(tr.sup_log.front().second == 0.0);
  CHECK(tr.snapshots.front().sup() == 0.0);
}

TEST_CASE("linear solver is linear in the data") {
  const Problem pa = small_problem();
  const Problem pb = small_problem("chi(t)*sin(x1)^2, 0.3*chi(t)");
  Problem sum = small_problem();
  sum.source.set_mode(1, {"chi(t)*(1 + 0.5*cos(x1) + sin(x1)^2)", "0.3*chi(t)"}, {"0", "chi(t)*sin(x1)"});
  Problem twice = small_problem("2*chi(t)*(1 + 0.5*cos(x1)), 0");
  twice.source.set_mode(1, {"2*chi(t)*(1 + 0.5*cos(x1))", "0"}, {"0", "chi(t)*sin(x1)"});
  SolverOptions opt = solver_options(pa.run, 0.25);
  opt.linear = true;
  const SpaceTimeField ua = run(pa, 0.25, opt).snapshots.back();
  const SpaceTimeField ub = run(pb, 0.25, opt).snapshots.back();
  const SpaceTimeField us = run(sum, 0.25, opt).snapshots.back();
  const SpaceTimeField u2 = run(twice, 0.25, opt).snapshots.back();
  SpaceTimeField combo = ua;
  SpaceTimeField dbl = ua;
  for (int c = 0; c < 3; ++c) {
    combo.comp[c] += ub.comp[c];
    dbl.comp[c] *= 2;
  }
  CHECK(ua.sup() > 1e-3);
  CHECK(field_diff(combo, us) <= 1e-12 * us.sup());
  CHECK(field_diff(dbl, u2) <= 1e-12 * u2.sup());
}

TEST_CASE("boundary residual stays within the Newton tolerance") {
  Problem pb = small_problem("chi(t)*(1 + 0.5*cos(x1)), 0");
  pb.model.Psi.comp[1](0, 0) = 1;
  pb.model.Psi.comp[0](1, 2) = pb.model.Psi.comp[0](2, 1) = 0.5;
  pb.model.D.comp[0](1, 2) = pb.model.D.comp[0](2, 1) = 1;
  const Trajectory tr = run(pb, 0.25, solver_options(pb.run, 0.25));
  CHECK(tr.sup() > 1e-2);
  CHECK(tr.max_boundary_residual <= 1e-12);
}

TEST_CASE("direct solver self-converges") {
  Problem pb = small_problem();
  pb.source.ramp = 0.5;
  pb.source.set_mode(1, {"chi(t)*(1 + 0.5*cos(x1))", "0"}, {"0", "0.5*chi(t)*sin(x1)"});
  pb.model.Psi.comp[1](0, 0) = 1;
  pb.model.D.comp[0](1, 2) = pb.model.D.comp[0](2, 1) = 1;
  const double eps = 0.25;
  std::vector<SpaceTimeField> f;
  SolverOptions opt = solver_options(pb.run, eps);
  const double dx2 = 2 * pi * eps / s3 / 12;
  opt.L2 = 48 * dx2;
  for (double ppw : {12.0, 24.0, 48.0}) {
    opt.ppw = ppw;
    f.push_back(run(pb, eps, opt).snapshots.back());
  }
  auto diff = [&](const SpaceTimeField& c, const SpaceTimeField& fine) {
    const int r = fine.grid.n1 / c.grid.n1;
    REQUIRE(fine.grid.n2 == r * c.grid.n2);
    double d = 0;
    for (int j = 0; j < c.grid.rows(); ++j)
      for (int i = 0; i < c.grid.n1; ++i) d = std::max(d, (c.at(j, i) - fine.at(r * j, r * i)).cwiseAbs().maxCoeff());
    return d;
  };
  const double e1 = diff(f[0], f[1]), e2 = diff(f[1], f[2]);
  const double order = std::log2(e1 / e2);
  MESSAGE("self-convergence differences " << e1 << " " << e2 << " order " << order);
  CHECK(order >= 1.8);
}

TEST_CASE("rk3 and rk2 integrators run and agree with rk4") {
  const Problem pb = small_problem();
  SolverOptions opt = solver_options(pb.run, 0.25);
  const SpaceTimeField ref = run(pb, 0.25, opt).snapshots.back();
  for (const char* name : {"rk3", "rk2"}) {
    opt.integrator = name;
    opt.cfl = 0.5;
    const SpaceTimeField u = run(pb, 0.25, opt).snapshots.back();
    CHECK(field_diff(u, ref) < 0.05 * ref.sup());
  }
  opt.integrator = "rk4";
  opt.upwind_order = 3;
  CHECK(field_diff(run(pb, 0.25, opt).snapshots.back(), ref) < 0.1 * ref.sup());
}

TEST_CASE("compare_to_approx of identical fields is zero") {
  const Problem pb = small_problem();
  const SpaceTimeField v = run(pb, 0.25, solver_options(pb.run, 0.25)).snapshots.back();
  const ErrorReport rep = compare_to_approx(
      v,
      [&](double, int j) {
        Mat A(3, v.grid.n1);
        for (int i = 0; i < v.grid.n1; ++i) A.col(i) = v.at(j, i);
        return A;
      },
      0.25);
  CHECK(rep.sup_error == 0.0);
  CHECK(rep.l2_error == 0.0);
  CHECK(rep.sup_ref == doctest::Approx(v.sup() / 0.25));
}

TEST_CASE("singular norms") {
  const int n1 = 32, nt = 16;
  const double L1 = 2 * pi, eps = 0.125, eta = 1;
  CMat f(n1, nt);
  for (int i = 0; i < n1; ++i)
    for (int q = 0; q < nt; ++q) {
      const double x = i * L1 / n1, th = q * 2 * pi / nt;
      f(i, q) = std::sin(x) + 0.3 * std::cos(2 * x + th) + 0.1 * std::sin(3 * th);
    }
  double l2 = 0;
  for (int i = 0; i < n1; ++i)
    for (int q = 0; q < nt; ++q) l2 += std::norm(f(i, q)) * (L1 / n1) * (2 * pi / nt);
  CHECK(singular_norm(f, L1, 0, 1, eps, eta) == doctest::Approx(std::sqrt(l2)).epsilon(1e-12));

  CMat g(n1, nt);
  for (int i = 0; i < n1; ++i)
    for (int q = 0; q < nt; ++q) g(i, q) = std::exp(cd(0, q * 2 * pi / nt));
  const double a = singular_norm(g, L1, 1, 1, eps, eta), b = singular_norm(g, L1, 1, 1, eps / 2, eta);
  const double base = singular_norm(g, L1, 0, 1, eps, eta);
  CHECK(a / base == doctest::Approx(std::sqrt(1 + std::pow(eta / eps, 2))));
  CHECK(b / a == doctest::Approx(std::sqrt((1 + std::pow(2 * eta / eps, 2)) / (1 + std::pow(eta / eps, 2)))));
  double prev = 0;
  for (double gam : {0.5, 1.0, 2.0, 4.0}) {
    const double n = singular_norm(f, L1, 1.5, gam, eps, eta);
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("linear oracle agrees with the direct solver") {
  Problem pb = small_problem("chi(t)*(1 + 0.5*cos(x1)), 0.3*chi(t)");
  pb.run.T = 0.4;
  pb.run.L2 = 0;
  const double eps = 0.25;
  const LinearOracle orc(pb.model, pb.source, eps, pb.run.T);
  CHECK(orc.block_count() == 3);
  std::vector<double> err;
  for (double ppw : {16.0, 32.0}) {
    SolverOptions opt = solver_options(pb.run, eps);
    opt.linear = true;
    opt.ppw = ppw;
    const SpaceTimeField v = solve_direct(pb.model, pb.source, opt).snapshots.back();
    const ErrorReport rep =
        compare_to_approx(v, [&](double t, int j) { return orc.row(t, v.grid.x1(), j * v.grid.dx2()); }, eps);
    err.push_back(rep.sup_error / rep.sup_ref);
  }
  MESSAGE("oracle relative errors " << err[0] << " " << err[1]);
  CHECK(err[0] < 2e-2);
  CHECK(std::log2(err[0] / err[1]) >= 1.8);
}

TEST_CASE("linear oracle rejects data that is not ramp-separable") {
  Problem pb = small_problem("chi(t)*(1 + t*cos(x1)), 0");
  CHECK_THROWS_AS(LinearOracle(pb.model, pb.source, 0.25, 0.3), Error);
}

TEST_CASE("linear oracle satisfies the boundary condition") {
  const Problem pb = small_problem();
  const double eps = 0.25;
  const LinearOracle orc(pb.model, pb.source, eps, 0.5);
  const Vec x1 = Vec::LinSpaced(7, 0.1, 5.9);
  const BoundaryData h = oscillatory_data(pb.source, pb.model.beta, eps);
  for (double t : {0.05, 0.2, 0.45}) {
    const Mat res = pb.model.boundary * orc.row(t, x1, 0) - h(t, x1);
    CHECK(res.cwiseAbs().maxCoeff() < 1e-4 * eps * eps);
  }
}
