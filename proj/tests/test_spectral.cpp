#include "doctest.h"
#include "oscamp/spectral.hpp"

#include <cmath>
#include <random>

using namespace oscamp;

namespace {

const double s3 = std::sqrt(3.0);

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

// Scale factor s with x = s y, or NaN when not collinear.
double collinear(const Vec& x, const Vec& y) {
  const double s = x.dot(y) / y.squaredNorm();
  return (x - s * y).norm() < 1e-10 * x.norm() ? s : NAN;
}

HyperbolicModel random_model(std::mt19937_64& rng) {
  // symmetric hyperbolic, B_2 with two positive eigenvalues
  std::normal_distribution<double> g;
  auto sym = [&] {
    Mat X = Mat::NullaryExpr(3, 3, [&] { return g(rng); });
    return Mat(X + X.transpose());
  };
  HyperbolicModel m;
  m.d = 2;
  m.N = 3;
  Mat Q = Eigen::HouseholderQR<Mat>(Mat::NullaryExpr(3, 3, [&] { return g(rng); })).householderQ();
  Vec lam(3);
  lam << 1 + std::abs(g(rng)), 0.5 + std::abs(g(rng)), -1 - std::abs(g(rng));
  m.B = {sym(), Q * lam.asDiagonal() * Q.transpose()};
  m.boundary = Mat::NullaryExpr(2, 3, [&] { return g(rng); });
  m.D0 = Mat::Zero(3, 3);
  m.D = Quadratic(3, 3);
  m.Psi = Quadratic(2, 3);
  m.beta = Vec(2);
  m.beta << 3.0 + std::abs(g(rng)) * 10, 0.3 * g(rng);
  // Make B vanish on one vector of the stable subspace (weak stability at beta).
  Mat S(3, 0);
  try {
    for (double w : dispersion_roots(m, m.beta)) {
      if (group_velocity(m, m.beta, w)(1) <= 0) continue;
      Mat K = m.Bd().partialPivLu().solve(m.beta(0) * Mat::Identity(3, 3) + m.beta(1) * m.B[0]) + w * Mat::Identity(3, 3);
      Eigen::JacobiSVD<Mat> svd(K, Eigen::ComputeFullV);
      S.conservativeResize(3, S.cols() + 1);
      S.col(S.cols() - 1) = svd.matrixV().col(2);
    }
  } catch (const Error&) {
    return m;
  }
  if (S.cols() == 2) {
    Vec e = S * Eigen::Vector2d(g(rng), g(rng));
    m.boundary = m.boundary * (Mat::Identity(3, 3) - e * e.transpose() / e.squaredNorm());
  }
  return m;
}

}  // namespace

TEST_CASE("euler dispersion roots") {
  auto m = euler_model(1, 1, s3, 1);
  auto roots = dispersion_roots(m, m.beta);
  REQUIRE(roots.size() == 3);
  const double M = 1 / s3;
  CHECK(roots[0] == doctest::Approx(-1 / M).epsilon(1e-12));
  CHECK(std::abs(roots[1]) < 1e-12);
  CHECK(roots[2] == doctest::Approx(2 * M / (1 - M * M)).epsilon(1e-12));
  for (double w : roots) {
    Mat L = m.beta(0) * Mat::Identity(3, 3) + m.beta(1) * m.B[0] + w * m.B[1];
    CHECK(std::abs(L.determinant()) < 1e-10);
  }
  Vec b2 = 2.5 * m.beta;
  auto scaled = dispersion_roots(m, b2);
  for (int i = 0; i < 3; ++i) CHECK(scaled[i] == doctest::Approx(2.5 * roots[i]));
}

TEST_CASE("euler mode package") {
  auto m = euler_model(1, 1, s3, 1);
  ModeSet ms = mode_package(m);
  REQUIRE(ms.M() == 3);
  CHECK(ms.modes[0].omega == doctest::Approx(s3));
  CHECK(std::abs(ms.modes[1].omega) < 1e-12);
  CHECK(ms.modes[2].omega == doctest::Approx(-s3));

  const Vec v1 = ms.modes[0].v, v2 = ms.modes[1].v, v3 = ms.modes[2].v;
  CHECK((v1 - Eigen::Vector2d(-s3 / 2, -0.5)).norm() < 1e-10);
  CHECK((v2 - Eigen::Vector2d(-s3, 1)).norm() < 1e-10);
  CHECK((v3 - Eigen::Vector2d(0, 1)).norm() < 1e-10);
  CHECK(!ms.modes[0].incoming());
  CHECK(ms.modes[1].incoming());
  CHECK(ms.modes[2].incoming());

  const Vec r_ref[3] = {vec3(2, s3, 3), vec3(1, s3, 0), vec3(0, s3, 1)};
  const Vec l_ref[3] = {0.25 * vec3(1, -1 / s3, 1), 0.5 * vec3(1, 1 / s3, -1), 0.75 * vec3(-1, 1 / s3, 1.0 / 3)};
  for (int k = 0; k < 3; ++k) {
    const double s = collinear(ms.modes[k].r.col(0), r_ref[k]);
    REQUIRE(std::isfinite(s));
    // l scales inversely with r
    CHECK((ms.modes[k].l.row(0).transpose() * s - l_ref[k]).norm() < 1e-10);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(l_ref[k].dot(r_ref[j]) - (j == k)) < 1e-12);
  }
  CHECK((ms.e - vec3(1, 0, -1)).norm() < 1e-10);
  CHECK((m.boundary * ms.e).norm() < 1e-12);
  CHECK((ms.b - Eigen::Vector2d(1, -s3)).norm() < 1e-10);
  CHECK(std::abs(ms.b.dot(m.boundary * ms.modes[1].r.col(0))) < 1e-12);
  CHECK(std::abs(ms.b.dot(m.boundary * ms.modes[2].r.col(0))) < 1e-12);
  CHECK((m.boundary * r_ref[1] - Eigen::Vector2d(s3, 1)).norm() < 1e-12);
  CHECK((m.boundary * r_ref[2] - Eigen::Vector2d(s3, 1)).norm() < 1e-12);

  // boundary transport d_t - c d_x1; raw time coefficient -2 for e = r2 - r3, b = (u, -c)
  CHECK(ms.xlop(1) / ms.xlop(0) == doctest::Approx(-s3).epsilon(1e-12));
  CHECK(ms.xlop(0) == doctest::Approx(-2).epsilon(1e-12));
}

TEST_CASE("group velocity vs finite differences") {
  auto m = euler_model(1, 1, s3, 1);
  for (double w : dispersion_roots(m, m.beta)) {
    Vec a = group_velocity(m, m.beta, w), f = group_velocity_fd(m, m.beta, w, 1e-4);
    CHECK((a - f).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(classify(Eigen::Vector2d(-s3 / 2, -0.5)) == Direction::outgoing);
  CHECK(classify(Eigen::Vector2d(-s3, 1)) == Direction::incoming);
  CHECK_THROWS_AS(classify(Eigen::Vector2d(1, 0)), Error);
}

TEST_CASE("projector identities on random models") {
  std::mt19937_64 rng(11);
  int tested = 0;
  for (int trial = 0; trial < 200 && tested < 20; ++trial) {
    auto m = random_model(rng);
    ModeSet ms;
    try {
      ms = mode_package(m);
    } catch (const Error&) {
      continue;  // glancing, complex or not WR: outside the class
    }
    ++tested;
    Mat sum = Mat::Zero(3, 3);
    for (int k = 0; k < ms.M(); ++k) {
      const auto& md = ms.modes[k];
      sum += md.P;
      CHECK((md.P * md.P - md.P).norm() < 1e-10);
      CHECK((ms.L(k) * md.R - (Mat::Identity(3, 3) - md.P)).norm() < 1e-10);
      CHECK((md.R * ms.L(k) - (Mat::Identity(3, 3) - md.P)).norm() < 1e-10);
      CHECK((md.R * md.P).norm() < 1e-10);
      for (int j = 0; j < ms.M(); ++j)
        if (j != k) CHECK((md.P * ms.modes[j].P).norm() < 1e-10);
    }
    CHECK((sum - Mat::Identity(3, 3)).norm() < 1e-10);
    CHECK(ms.stable_basis.cols() == m.p());
    ModeSet sc = mode_package(m, 2.0 * m.beta);
    for (int k = 0; k < ms.M(); ++k) {
      CHECK(sc.modes[k].omega == doctest::Approx(2 * ms.modes[k].omega));
      CHECK((sc.modes[k].P - ms.modes[k].P).norm() < 1e-9);
      CHECK((2 * sc.modes[k].R - ms.modes[k].R).norm() < 1e-9 * ms.modes[k].R.norm());
      CHECK(sc.modes[k].direction == ms.modes[k].direction);
    }
  }
  CHECK(tested >= 5);
}

TEST_CASE("resonances") {
  auto m = euler_model(1, 1, s3, 1);
  auto tr = find_resonances(mode_package(m), 10);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0].m == 0);
  CHECK(tr[0].n_m == 1);
  CHECK(tr[0].n_p == 2);
  CHECK(tr[0].n_r == -1);
  auto pq = euler_resonance_pq(*m.euler);
  REQUIRE(pq.has_value());
  CHECK(pq->first == 1);
  CHECK(pq->second == 1);

  const double c = 1 / 0.55;
  auto m2 = euler_model(1, 1, c, 1);
  CHECK(find_resonances(mode_package(m2), 50, 1e-12).empty());
  auto pq2 = euler_resonance_pq(*m2.euler);
  REQUIRE(pq2.has_value());
  CHECK(pq2->first == 242);
  CHECK(pq2->second == 279);
  CHECK(find_resonances(mode_package(m), 0).empty());
}
