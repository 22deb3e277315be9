#include "doctest.h"
#include "oscamp/harness.hpp"

#include <cmath>

using namespace oscamp;

namespace {

const char* euler_cfg = "[system]\nv = 1\nu = 1\nc = sqrt(3)\neta = 1\n[source]\nG.1.re = chi(t), 0\nG.1.im = 0, 0\n";

AmplificationTable synthetic(const std::vector<double>& eps, double power) {
  AmplificationTable t;
  std::vector<AmplificationRow> rows;
  for (double e : eps) rows.push_back({e, std::pow(e, power), std::pow(e, power - 1), std::pow(e, power - 2)});
  t.rows = rows;
  double lo1 = INFINITY, hi1 = 0, lo2 = INFINITY, hi2 = 0;
  for (const auto& r : rows) {
    lo1 = std::min(lo1, r.per_eps);
    hi1 = std::max(hi1, r.per_eps);
    lo2 = std::min(lo2, r.per_eps2);
    hi2 = std::max(hi2, r.per_eps2);
  }
  t.spread_eps = hi1 / lo1;
  t.spread_eps2 = hi2 / lo2;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    t.growth_eps.push_back(rows[i].per_eps / rows[i - 1].per_eps);
    t.growth_eps2.push_back(rows[i].per_eps2 / rows[i - 1].per_eps2);
  }
  return t;
}

}  // namespace

TEST_CASE("experiment plans are validated") {
  ExperimentPlan p;
  p.eps = {0.25, 0.125};
  p.ladder = {20, 40};
  CHECK_NOTHROW(p.validate());
  p.eps = {0.125, 0.25};
  CHECK_THROWS_AS(p.validate(), Error);
  p.eps = {0.25, 0.125};
  p.ladder = {40, 20};
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("Lopatinskii margin separates the weakly stable and control boundaries") {
  const Problem pb = parse_config(euler_cfg);
  CHECK(lopatinskii_margin(pb.model) < 1e-3);
  const Problem ctl = control_problem(pb);
  CHECK(lopatinskii_margin(ctl.model) > 0.1);
  Problem alt = pb;
  alt.model.boundary = (Mat(2, 3) << 1, 0, 0, 0, 0, 1).finished();
  CHECK(lopatinskii_margin(alt.model) < 1e-3);
}

TEST_CASE("amplification verdicts on synthetic scalings") {
  const Tolerances tol;
  const std::vector<double> eps{0.25, 0.125, 0.0625};
  CHECK(amplified(synthetic(eps, 1), tol));
  CHECK(!bounded_response(synthetic(eps, 1), tol));
  CHECK(bounded_response(synthetic(eps, 2), tol));
  CHECK(!amplified(synthetic(eps, 2), tol));
}

TEST_CASE("zero data gives a zero amplification table") {
  Problem pb = parse_config("[system]\nv = 1\nu = 1\nc = sqrt(3)\neta = 1\n[source]\nG.1.re = 0, 0\nG.1.im = 0, 0\n[run]\nT = 0.1\n");
  ExperimentPlan plan;
  plan.eps = {0.25};
  const AmplificationTable t = run_amplification_study(pb, plan);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].sup == 0);
  CHECK(t.rows[0].per_eps == 0);
}

TEST_CASE("identical fields give a zero convergence row") {
  SolverGrid g;
  g.n1 = 8;
  g.n2 = 4;
  g.L1 = 2 * pi;
  g.L2 = 1;
  SpaceTimeField v(g, 3);
  for (int c = 0; c < 3; ++c) v.comp[c] = Vec::LinSpaced(g.size(), 0, 1 + c);
  auto same = [&](double, int j) {
    Mat m(3, g.n1);
    for (int i = 0; i < g.n1; ++i) m.col(i) = v.at(j, i);
    return m;
  };
  const ConvergenceRow r = convergence_row(v, same, same, 0.125);
  CHECK(r.leading == 0);
  CHECK(r.corrected == 0);
  CHECK(r.sup_ref > 0);
}

TEST_CASE("convergence table ratios and slope") {
  const ConvergenceTable t = tabulate({{0.25, 1, 0.4, 0.2}, {0.125, 1, 0.2, 0.05}, {0.0625, 1, 0.1, 0.0125}});
  REQUIRE(t.ratio_corrected.size() == 2);
  CHECK(std::abs(t.ratio_leading[0] - 0.5) < 1e-14);
  CHECK(std::abs(t.ratio_corrected[1] - 0.25) < 1e-14);
  CHECK(std::abs(t.slope_leading - 1) < 1e-12);
  CHECK(std::abs(t.slope_corrected - 2) < 1e-12);
  CHECK(converges(t, Tolerances{}));
  CHECK(!converges(tabulate({{0.25, 1, 0.4, 0.5}, {0.125, 1, 0.2, 0.1}}), Tolerances{}));
}

TEST_CASE("identity suite passes and flags an injected projector fault") {
  const IdentityReport ok = run_identity_suite(1);
  for (const auto& r : ok.rows) {
    INFO(r.name << " defect " << r.defect);
    CHECK(r.pass);
  }
  CHECK(ok.pass);
  const IdentityReport bad = run_identity_suite(1, Fault::projector);
  CHECK(!bad.pass);
  bool flagged = false;
  for (const auto& r : bad.rows)
    if (r.name.find("projectors") == 0) flagged = !r.pass;
  CHECK(flagged);
}

TEST_CASE("identity suite verdicts do not depend on the seed") {
  const IdentityReport ref = run_identity_suite(1);
  for (std::uint64_t seed = 2; seed <= 10; ++seed) {
    const IdentityReport r = run_identity_suite(seed);
    REQUIRE(r.rows.size() == ref.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(r.rows[i].pass == ref.rows[i].pass);
  }
}

TEST_CASE("CSV tables carry unit headers") {
  const std::string a = to_csv(synthetic({0.25, 0.125}, 1));
  CHECK(a.rfind("eps [1],sup_v [solution units]", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 3);
  const std::string c = to_csv(tabulate({{0.25, 1, 0.4, 0.2}, {0.125, 1, 0.2, 0.05}}));
  CHECK(c.find("err_corrected") != std::string::npos);
}
