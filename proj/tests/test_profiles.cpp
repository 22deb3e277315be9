#include "doctest.h"
#include "oscamp/profiles.hpp"

#include <cmath>
#include <random>

using namespace oscamp;

namespace {

const double s3 = std::sqrt(3.0);

struct Fixture {
  HyperbolicModel model = euler_model(1, 1, s3, 1);
  ModeSet ms = mode_package(model);
};

CMat random_coef(std::mt19937_64& rng, int N) {
  std::normal_distribution<double> g;
  return CMat::NullaryExpr(N, 1, [&] { return cd(g(rng), g(rng)); });
}

// Random series over Z^{3;2} with |alpha_i| <= K, skipping noncharacteristic alphas that are
// degenerate for this model.
TrigSeries random_series(std::mt19937_64& rng, const ModeSet& ms, int K, int terms, bool single_only) {
  TrigSeries V(3, 3);
  std::uniform_int_distribution<int> pick(-K, K), slot(0, 2);
  while (static_cast<int>(V.coef.size()) < terms) {
    MultiIndex a(3, 0);
    a[slot(rng)] = pick(rng);
    if (!single_only) a[slot(rng)] = pick(rng);
    try {
      classify_mode(ms, a);
    } catch (const Error&) {
      continue;
    }
    V.at(a) = random_coef(rng, 3);
  }
  return V;
}

}  // namespace

TEST_CASE("classify_mode") {
  Fixture f;
  auto l = classify_mode(f.ms, {0, 1, 0});
  CHECK(l.kind == ModeLabel::characteristic);
  CHECK(l.m == 1);
  CHECK(l.n == 1);
  l = classify_mode(f.ms, {0, 2, -1});
  CHECK(l.kind == ModeLabel::characteristic);
  CHECK(l.m == 0);
  CHECK(l.n == 1);
  CHECK(classify_mode(f.ms, {0, 1, 1}).kind == ModeLabel::noncharacteristic);
  CHECK(classify_mode(f.ms, {0, 0, 0}).kind == ModeLabel::zero);
}

TEST_CASE("projector E") {
  Fixture f;
  std::mt19937_64 rng(5);
  TrigSeries V(3, 3);
  V.at({0, 1, 1}) = random_coef(rng, 3);
  CHECK(project_E(f.ms, V).max_abs() == 0);

  TrigSeries W(3, 3);
  W.at({0, 2, -1}) = f.ms.modes[0].r.cast<cd>();
  TrigSeries EW = project_E(f.ms, W);
  REQUIRE(EW.find({1, 0, 0}));
  CHECK((*EW.find({1, 0, 0}) - f.ms.modes[0].r.cast<cd>()).norm() < 1e-12);

  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    TrigSeries S = random_series(rng, f.ms, 6, 12, false);
    TrigSeries E1 = project_E(f.ms, S);
    worst = std::max(worst, project_E(f.ms, E1).max_diff(E1));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("partial inverse and cL identities") {
  Fixture f;
  std::mt19937_64 rng(7);
  TrigSeries V(3, 3);
  V.at({0, 1, 0}) = f.ms.modes[2].r.cast<cd>();
  TrigSeries RV = partial_inverse_R(f.ms, V).value;
  const CMat expect = f.ms.modes[1].R.cast<cd>() * f.ms.modes[2].r.cast<cd>() / cd(0, 1);
  CHECK((*RV.find({0, 1, 0}) - expect).norm() < 1e-12);
  CHECK((f.ms.L(1) * f.ms.modes[1].R * f.ms.modes[2].r - f.ms.modes[2].r).norm() < 1e-12);

  TrigSeries mean(3, 3);
  mean.at({0, 0, 0}) = random_coef(rng, 3);
  CHECK(partial_inverse_R(f.ms, mean).value.max_abs() == 0);
  CHECK(apply_cL(f.ms, mean).max_abs() == 0);

  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    TrigSeries S = random_series(rng, f.ms, 6, 12, false);
    worst = std::max(worst, project_E(f.ms, apply_cL(f.ms, S)).max_abs());
    TrigSeries F = random_series(rng, f.ms, 6, 8, true);
    TrigSeries IE = F - project_E(f.ms, F);
    worst = std::max(worst, apply_cL(f.ms, partial_inverse_R(f.ms, F).value).max_diff(IE));
    worst = std::max(worst, partial_inverse_R(f.ms, apply_cL(f.ms, F)).value.max_diff(IE));
  }
  CHECK(worst < 1e-11);
}

TEST_CASE("prepare") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  ScalarSeries a{{1, 1.0}, {2, 2.0}, {3, 3.0}, {4, 4.0}};
  CHECK(prepare(a, 1) == a);
  ScalarSeries p = prepare(a, 2);
  CHECK(p.size() == 2);
  CHECK(p.count(2));
  CHECK(p.count(4));
  for (int t = 0; t < 20; ++t) {
    ScalarSeries r;
    for (int k = -8; k <= 8; ++k) r[k] = cd(g(rng), g(rng));
    CHECK(l2_norm(prepare(r, 3)) <= l2_norm(r));
    CHECK(prepare(prepare(r, 3), 3) == prepare(r, 3));
  }
}

TEST_CASE("interaction integral") {
  ResonanceTriple tr{0, 1, 2, 1, 2, -1, 0};
  ScalarSeries s2{{2, 1.0}, {-2, 1.0}}, s3v{{-1, 1.0}, {1, 1.0}};
  ScalarSeries I = interaction_integral(s2, s3v, tr);
  CHECK(I.size() == 2);
  CHECK(std::abs(I[1] - 1.0) < 1e-15);
  CHECK(std::abs(I[-1] - 1.0) < 1e-15);
  for (double th : {0.0, 0.4, 2.1}) CHECK(std::abs(eval(I, th) - interaction_quadrature(s2, s3v, tr, th)) < 1e-13);
  CHECK(interaction_integral({}, s3v, tr).empty());

  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    ScalarSeries p, r;
    for (int k = -8; k <= 8; ++k)
      if (k) {
        p[k] = cd(g(rng), g(rng));
        r[k] = cd(g(rng), g(rng));
      }
    ScalarSeries J = interaction_integral(p, r, tr);
    for (double th : {0.0, 1.3, 4.4}) worst = std::max(worst, std::abs(eval(J, th) - interaction_quadrature(p, r, tr, th)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("primitive") {
  ScalarSeries sinus{{1, cd(0, -0.5)}, {-1, cd(0, 0.5)}};
  ScalarSeries A = primitive_mean_zero(sinus);
  for (double th : {0.0, 0.7, 2.0}) CHECK(std::abs(eval(A, th) + std::cos(th)) < 1e-15);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  ScalarSeries r;
  for (int k = -10; k <= 10; ++k)
    if (k) r[k] = cd(g(rng), g(rng));
  ScalarSeries back = derivative(primitive_mean_zero(r));
  double worst = 0;
  for (const auto& [k, v] : r) worst = std::max(worst, std::abs(back[k] - v));
  CHECK(worst < 1e-13);
  CHECK_THROWS_AS(primitive_mean_zero({{0, 1.0}, {1, 1.0}}), Error);
}
