#include "doctest.h"
#include "oscamp/config.hpp"

#include <cmath>
#include <random>

using namespace oscamp;

namespace {

const std::string kMinimal = R"(
[system]
v = 1
u = 1
c = sqrt(3)
eta = 1

[source]
G.1.re = 0, chi(t)*sin(x1)
)";

}  // namespace

TEST_CASE("euler model matrices") {
  auto m = euler_model(1, 1, std::sqrt(3.0), 1);
  const Mat A2 = m.B[1];
  CHECK(A2(0, 0) == 1);
  CHECK(A2(0, 2) == -1);
  CHECK(A2(2, 0) == doctest::Approx(-3));
  CHECK(A2(2, 2) == 1);
  CHECK(m.beta(0) == doctest::Approx(std::sqrt(3.0)));
  CHECK(m.beta(1) == 1);
  Vec r2(3), r3(3);
  r2 << 1, std::sqrt(3.0), 0;
  r3 << 0, std::sqrt(3.0), 1;
  CHECK((m.boundary * (r2 - r3)).norm() < 1e-14);
  CHECK_THROWS_AS(euler_model(1, 2, 1, 1), Error);
}

TEST_CASE("validate") {
  auto m = euler_model(1, 1, std::sqrt(3.0), 1);
  auto rep = validate(m);
  CHECK(rep.pass);
  CHECK(rep.p_positive == 2);
  CHECK(rep.boundary_rank == 2);
  Eigen::EigenSolver<Mat> es(m.Bd(), false);
  std::vector<double> ev;
  for (int i = 0; i < 3; ++i) ev.push_back(es.eigenvalues()(i).real());
  std::sort(ev.begin(), ev.end());
  CHECK(ev[0] == doctest::Approx(1 - std::sqrt(3.0)));
  CHECK(ev[1] == doctest::Approx(1));
  CHECK(ev[2] == doctest::Approx(1 + std::sqrt(3.0)));

  auto bad = m;
  bad.B[1].setZero();
  auto r = validate(bad);
  CHECK_FALSE(r.pass);
  REQUIRE(!r.failures.empty());
  CHECK(r.failures[0] == "B_d singular");
}

TEST_CASE("quadratic symmetry on random pairs") {
  Quadratic D(3, 3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto& c : D.comp) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j) c(i, j) = c(j, i) = g(rng);
  }
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    Vec u = Vec::NullaryExpr(3, [&] { return g(rng); });
    Vec w = Vec::NullaryExpr(3, [&] { return g(rng); });
    worst = std::max(worst, (D(u, w) - D(w, u)).norm());
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("config loading") {
  Problem pb = parse_config(kMinimal);
  auto ref = euler_model(1, 1, std::sqrt(3.0), 1);
  CHECK((pb.model.B[0] - ref.B[0]).norm() == 0);
  CHECK((pb.model.B[1] - ref.B[1]).norm() == 0);
  CHECK((pb.model.boundary - ref.boundary).norm() == 0);
  CHECK(pb.source.modes.size() == 1);
  CHECK(pb.source.max_mode() == 1);
  CHECK(std::abs(pb.source.G(1, 0.5, 0.3)(1) - std::sin(0.3)) < 1e-15);
  CHECK(std::abs(pb.source.G(-1, 0.5, 0.3)(1) - std::sin(0.3)) < 1e-15);
  CHECK(pb.source.G(1, -0.5, 0.3).norm() == 0);

  std::string missing = kMinimal;
  missing.replace(missing.find("c = sqrt(3)"), 11, "");
  try {
    parse_config(missing);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("'c'") != std::string::npos);
  }
  try {
    parse_config(kMinimal + "[run]\nbogus = 1\n");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.status() == Status::parse_error);
    CHECK(std::string(e.what()).find(":11:") != std::string::npos);
  }
}

TEST_CASE("config round trip") {
  Problem pb = parse_config(kMinimal + "[boundary]\nPsi.2 = 0,0,0, 0,0,0, 0,0,1\n[run]\neps = 0.0625\nmemory = grid\n");
  pb.model.D.comp[0](1, 2) = pb.model.D.comp[0](2, 1) = 0.25;
  Problem back = parse_config(save_config(pb));
  for (int j = 0; j < 2; ++j) CHECK((back.model.B[j] - pb.model.B[j]).norm() == 0);
  CHECK((back.model.boundary - pb.model.boundary).norm() == 0);
  CHECK((back.model.beta - pb.model.beta).norm() == 0);
  for (int i = 0; i < 3; ++i) CHECK((back.model.D.comp[i] - pb.model.D.comp[i]).norm() == 0);
  for (int i = 0; i < 2; ++i) CHECK((back.model.Psi.comp[i] - pb.model.Psi.comp[i]).norm() == 0);
  CHECK(back.model.euler.has_value());
  CHECK(back.source.L1 == pb.source.L1);
  CHECK(back.run.eps == 0.0625);
  CHECK(back.run.memory == "grid");
  CHECK(back.source.G(1, 0.4, 1.1) == pb.source.G(1, 0.4, 1.1));
}

TEST_CASE("expression grammar") {
  Expr e = Expr::parse("2*sin(x1)^2 + exp(-t) - 3/4");
  CHECK(e(0.5, 0.7) == doctest::Approx(2 * std::pow(std::sin(0.7), 2) + std::exp(-0.5) - 0.75));
  CHECK(Expr::parse("chi(t)", 0.1)(0.2, 0) == 1);
  CHECK(Expr::parse("chi(t)", 0.1)(-0.2, 0) == 0);
  CHECK(ramp_chi(0.05, 0.1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Expr::parse("sin(x1"), Error);
  CHECK_THROWS_AS(Expr::parse("y + 1"), Error);
}
