#include "CLI11.hpp"
#include "oscamp/oscamp.h"

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

const char* builtin_config =
    "[system]\nmodel = euler\nv = 1\nu = 1\nc = sqrt(3)\neta = 1\n"
    "[source]\nG.1.re = chi(t), 0\nG.1.im = 0, 0\n";

struct Global {
  std::string config, out;
  long long seed = -1;
  int threads = 0;
};

int report(int rc) {
  if (rc != OSCAMP_OK) std::fprintf(stderr, "error (%s): %s\n", oscamp_status_name(rc), oscamp_last_error());
  return rc;
}

struct Session {
  oscamp_problem* p = nullptr;
  ~Session() { oscamp_problem_free(p); }
};

int open(const Global& g, Session& s) {
  int rc = g.config.empty() ? oscamp_problem_parse(builtin_config, &s.p) : oscamp_problem_load(g.config.c_str(), &s.p);
  if (rc) return report(rc);
  if (g.seed >= 0 && (rc = oscamp_problem_set(s.p, "seed", static_cast<double>(g.seed)))) return report(rc);
  if (!g.out.empty() && (rc = oscamp_problem_set_out(s.p, g.out.c_str()))) return report(rc);
  oscamp_set_threads(g.threads);
  return OSCAMP_OK;
}

std::string out_dir(const Global& g, const std::string& sub) { return (g.out.empty() ? std::string("out") : g.out) + "/" + sub; }

int study(const Global& g, const std::string& name, const std::string& dir) {
  Session s;
  if (open(g, s)) return 2;
  int pass = 0;
  std::vector<char> text(1 << 16);
  const int rc = oscamp_study(s.p, name.c_str(), dir.c_str(), &pass, text.data(), text.size());
  if (rc) {
    report(rc);
    return 2;
  }
  std::printf("%s", text.data());
  std::printf("%s %s (csv in %s)\n", pass ? "PASS" : "FAIL", name.c_str(), dir.c_str());
  return pass ? 0 : 1;
}

int cmd_spectral(const Global& g) {
  Session s;
  if (open(g, s)) return 2;
  int N = 0, d = 0, p = 0, M = 0;
  if (report(oscamp_problem_dims(s.p, &N, &d, &p)) || report(oscamp_mode_count(s.p, &M))) return 2;
  std::printf("%-4s %-14s %-9s %-30s %-44s %s\n", "mode", "omega", "kind", "group velocity", "r", "l");
  for (int m = 0; m < M; ++m) {
    double omega = 0;
    int in = 0;
    std::vector<double> v(d), r(N), l(N);
    if (report(oscamp_mode(s.p, m, &omega, v.data(), &in, r.data(), l.data()))) return 2;
    std::string vs, rs, ls;
    for (double x : v) vs += (vs.empty() ? "" : ", ") + std::to_string(x);
    for (double x : r) rs += (rs.empty() ? "" : ", ") + std::to_string(x);
    for (double x : l) ls += (ls.empty() ? "" : ", ") + std::to_string(x);
    std::printf("%-4d %-14.10f %-9s (%-28s) (%-42s) (%s)\n", m + 1, omega, in ? "incoming" : "outgoing", vs.c_str(), rs.c_str(), ls.c_str());
  }
  std::vector<double> e(N), b(p);
  if (oscamp_boundary_vectors(s.p, e.data(), b.data()) == OSCAMP_OK) {
    std::printf("e =");
    for (double x : e) std::printf(" %.10f", x);
    std::printf("\nb =");
    for (double x : b) std::printf(" %.10f", x);
    std::printf("\n");
  } else {
    std::printf("no e, b: %s\n", oscamp_last_error());
  }
  double margin = 0;
  if (report(oscamp_lopatinskii_margin(s.p, &margin))) return 2;
  std::printf("Lopatinskii margin %.3e (%s)\n", margin, margin < 1e-3 ? "weakly stable" : "uniformly stable");
  return 0;
}

int cmd_resonances(const Global& g, int nmax) {
  Session s;
  if (open(g, s)) return 2;
  int count = 0;
  if (report(oscamp_resonances(s.p, nmax, nullptr, 0, &count))) return 2;
  std::vector<int> t(6 * static_cast<std::size_t>(count) + 6);
  if (report(oscamp_resonances(s.p, nmax, t.data(), count, &count))) return 2;
  std::printf("%d resonant triple(s) with |n| <= %d\n", count, nmax);
  for (int i = 0; i < count; ++i) {
    const int* x = &t[6 * i];
    std::printf("  %d phi_%d = %d phi_%d + %d phi_%d\n", x[3], x[0] + 1, x[4], x[1] + 1, x[5], x[2] + 1);
  }
  return 0;
}

int cmd_profiles(const Global& g) {
  Session s;
  if (open(g, s)) return 2;
  oscamp_profiles* h = nullptr;
  if (report(oscamp_profiles_solve(s.p, &h))) return 2;
  int n = 0, K = 0;
  double T = 0, a1 = 0, kt = 0, w = 0, a2 = 0;
  oscamp_profiles_grid(h, &n, &K, &T);
  oscamp_profiles_constants(h, &a1, &kt, &w, &a2);
  std::printf("boundary transport: kappa_t %.10f, speed %.10f\nalpha1 %.10f, alpha2 %.10f\n", kt, w, a1, a2);
  std::vector<double> re(static_cast<std::size_t>(n) * K), im(re.size());
  oscamp_profiles_amplitude(h, T, re.data(), im.data());
  double amax = 0;
  for (std::size_t i = 0; i < re.size(); ++i) amax = std::max(amax, std::hypot(re[i], im[i]));
  const std::string dir = out_dir(g, "profiles");
  std::filesystem::create_directories(dir);
  const int rc = oscamp_profiles_write_csv(h, (dir + "/amplitude.csv").c_str());
  oscamp_profiles_free(h);
  if (report(rc)) return 2;
  std::printf("T %.4g, n %d, K %d, sup |a_k(T)| %.6e\nwrote %s/amplitude.csv\n", T, n, K, amax, dir.c_str());
  return 0;
}

int cmd_simulate(const Global& g, double eps) {
  Session s;
  if (open(g, s)) return 2;
  if (eps <= 0 && report(oscamp_problem_get(s.p, "eps", &eps))) return 2;
  double sup = 0, res = 0;
  if (report(oscamp_simulate(s.p, eps, &sup, &res))) return 2;
  std::printf("eps %.6g  sup|v| %.6e  sup|v|/eps %.6f  sup|v|/eps^2 %.6f  boundary residual %.2e\n", eps, sup, sup / eps,
              sup / (eps * eps), res);
  return 0;
}

int cmd_corrector(const Global& g, double eps) {
  Session s;
  if (open(g, s)) return 2;
  if (eps <= 0 && report(oscamp_problem_get(s.p, "eps", &eps))) return 2;
  double lead = 0, corr = 0, sup = 0;
  if (report(oscamp_corrector(s.p, eps, &lead, &corr, &sup))) return 2;
  std::printf("eps %.6g  sup|u| %.6e  |u - u_app| %.6e  |u - u_c| %.6e\n", eps, sup, lead, corr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscamp: weakly nonlinear geometric optics for weakly stable hyperbolic boundary problems"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--config", g.config, "configuration file (built-in Euler example if omitted)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads");

  auto* spectral = app.add_subcommand("spectral", "phases, group velocities, eigenvectors, e, b");
  int nmax = 50;
  auto* resonances = app.add_subcommand("resonances", "resonant triples");
  resonances->add_option("--nmax", nmax, "largest |n| searched");
  auto* profiles = app.add_subcommand("profiles", "solve the key subsystem for the boundary amplitude");
  double eps = 0;
  auto* corrector = app.add_subcommand("corrector", "errors of the leading and corrected approximations");
  corrector->add_option("--eps", eps, "wavelength parameter");
  auto* simulate = app.add_subcommand("simulate", "direct oscillatory solve");
  simulate->add_option("--eps", eps, "wavelength parameter");
  std::string which = "all";
  auto* verify = app.add_subcommand("verify", "amplification, control, convergence and oracle studies");
  verify->add_option("--study", which, "amplification|control|convergence|oracle|all")
      ->check(CLI::IsMember({"amplification", "control", "convergence", "oracle", "all"}));
  double theta0 = 0, delta = -1;
  auto* nm = app.add_subcommand("nashmoser", "Nash-Moser and Picard iterations on the profile subsystem");
  nm->add_option("--theta0", theta0, "initial smoothing scale");
  nm->add_option("--delta", delta, "induction monitor constant");
  bool fault = false;
  auto* selftest = app.add_subcommand("selftest", "identity suite");
  selftest->add_flag("--inject-fault", fault, "perturb a spectral projector (the suite must fail)");

  CLI11_PARSE(app, argc, argv);

  if (*spectral) return cmd_spectral(g);
  if (*resonances) return cmd_resonances(g, nmax);
  if (*profiles) return cmd_profiles(g);
  if (*simulate) return cmd_simulate(g, eps);
  if (*corrector) return cmd_corrector(g, eps);
  if (*verify) {
    int worst = 0;
    for (const char* s : {"amplification", "control", "convergence", "oracle"})
      if (which == "all" || which == s) worst = std::max(worst, study(g, s, out_dir(g, s)));
    return worst;
  }
  if (*nm) {
    Session s;
    if (open(g, s)) return 2;
    if (theta0 > 0 && report(oscamp_problem_set(s.p, "theta0", theta0))) return 2;
    if (delta >= 0 && report(oscamp_problem_set(s.p, "nm_delta", delta))) return 2;
    int pass = 0;
    std::vector<char> text(1 << 16);
    const std::string dir = g.out.empty() ? "out/nm" : g.out;
    if (report(oscamp_study(s.p, "nashmoser", dir.c_str(), &pass, text.data(), text.size()))) return 2;
    std::printf("%s%s nashmoser (csv in %s)\n", text.data(), pass ? "PASS" : "FAIL", dir.c_str());
    return pass ? 0 : 1;
  }
  if (*selftest) return study(g, fault ? "identities-fault" : "identities", out_dir(g, "selftest"));
  return 0;
}
