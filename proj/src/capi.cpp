#include "oscamp/oscamp.h"

#include "oscamp/corrector.hpp"
#include "oscamp/harness.hpp"

#include <cstring>
#include <filesystem>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace oscamp;

struct oscamp_problem {
  Problem pb;
};

struct oscamp_profiles {
  Problem pb;
  ModeSet ms;
  ProfileSolution sol;
};

namespace {

thread_local std::string last_error;

template <class F>
int guard(F&& f) {
  try {
    last_error.clear();
    f();
    return OSCAMP_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<int>(e.status());
  } catch (const std::exception& e) {
    last_error = e.what();
    return OSCAMP_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(Status::invalid_argument, std::string("null ") + what);
}

double* run_field(RunConfig& r, const std::string& key) {
  if (key == "eps") return &r.eps;
  if (key == "T") return &r.T;
  if (key == "ppw") return &r.ppw;
  if (key == "cfl") return &r.cfl;
  if (key == "theta0") return &r.theta0;
  if (key == "nm_delta") return &r.nm_delta;
  if (key == "nm_tol") return &r.nm_tol;
  return nullptr;
}

int* run_int(RunConfig& r, const std::string& key) {
  if (key == "K") return &r.K;
  if (key == "n_x1_amp") return &r.n_x1_amp;
  if (key == "nm_steps") return &r.nm_steps;
  return nullptr;
}

void copy_out(const std::string& s, char* buf, size_t cap) {
  if (!buf || cap == 0) return;
  const size_t n = std::min(cap - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = 0;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string verdict(bool ok, const std::string& what) { return std::string(ok ? "PASS " : "FAIL ") + what + "\n"; }

}  // namespace

extern "C" {

const char* oscamp_last_error(void) { return last_error.c_str(); }

const char* oscamp_status_name(int s) {
  static const char* names[] = {"ok",          "invalid_argument", "parse_error",   "not_hyperbolic", "glancing",
                                "not_wr",      "small_divisor",    "ambiguous_mode", "cfl_violation",  "blow_up",
                                "newton_failure", "io_error",      "history_gap",   "internal",       "buffer_too_small"};
  return s >= 0 && s <= OSCAMP_BUFFER_TOO_SMALL ? names[s] : "unknown";
}

void oscamp_set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int oscamp_problem_load(const char* path, oscamp_problem** out) {
  return guard([&] {
    need(path, "path");
    need(out, "output handle");
    *out = new oscamp_problem{load_config(path)};
  });
}

int oscamp_problem_parse(const char* text, oscamp_problem** out) {
  return guard([&] {
    need(text, "text");
    need(out, "output handle");
    *out = new oscamp_problem{parse_config(text)};
  });
}

void oscamp_problem_free(oscamp_problem* p) { delete p; }

int oscamp_problem_set(oscamp_problem* p, const char* key, double value) {
  return guard([&] {
    need(p, "problem");
    need(key, "key");
    const std::string k = key;
    if (k == "seed") {
      p->pb.run.seed = static_cast<std::uint64_t>(value);
    } else if (double* f = run_field(p->pb.run, k)) {
      *f = value;
    } else if (int* i = run_int(p->pb.run, k)) {
      *i = static_cast<int>(value);
    } else {
      fail(Status::invalid_argument, "unknown run key '" + k + "'");
    }
  });
}

int oscamp_problem_get(const oscamp_problem* p, const char* key, double* value) {
  return guard([&] {
    need(p, "problem");
    need(key, "key");
    need(value, "value");
    RunConfig r = p->pb.run;
    const std::string k = key;
    if (k == "seed") {
      *value = static_cast<double>(r.seed);
    } else if (double* f = run_field(r, k)) {
      *value = *f;
    } else if (int* i = run_int(r, k)) {
      *value = *i;
    } else {
      fail(Status::invalid_argument, "unknown run key '" + k + "'");
    }
  });
}

int oscamp_problem_set_out(oscamp_problem* p, const char* dir) {
  return guard([&] {
    need(p, "problem");
    need(dir, "dir");
    p->pb.run.out = dir;
  });
}

int oscamp_problem_dump(const oscamp_problem* p, char* buf, size_t cap, size_t* needed) {
  std::string s;
  const int rc = guard([&] {
    need(p, "problem");
    s = save_config(p->pb);
  });
  if (rc) return rc;
  if (needed) *needed = s.size() + 1;
  if (cap < s.size() + 1) {
    last_error = "buffer too small";
    return OSCAMP_BUFFER_TOO_SMALL;
  }
  copy_out(s, buf, cap);
  return OSCAMP_OK;
}

int oscamp_problem_dims(const oscamp_problem* p, int* N, int* d, int* p_rows) {
  return guard([&] {
    need(p, "problem");
    if (N) *N = p->pb.model.N;
    if (d) *d = p->pb.model.d;
    if (p_rows) *p_rows = p->pb.model.p();
  });
}

int oscamp_mode_count(const oscamp_problem* p, int* M) {
  return guard([&] {
    need(p, "problem");
    need(M, "M");
    *M = mode_package(p->pb.model, p->pb.model.beta, false).M();
  });
}

int oscamp_mode(const oscamp_problem* p, int m, double* omega, double* v, int* incoming, double* r, double* l) {
  return guard([&] {
    need(p, "problem");
    const ModeSet ms = mode_package(p->pb.model, p->pb.model.beta, false);
    if (m < 0 || m >= ms.M()) fail(Status::invalid_argument, "mode index out of range");
    const Mode& md = ms.modes[m];
    if (omega) *omega = md.omega;
    if (incoming) *incoming = md.incoming() ? 1 : 0;
    for (int j = 0; v && j < md.v.size(); ++j) v[j] = md.v(j);
    for (int j = 0; r && j < ms.N(); ++j) r[j] = md.r(j, 0);
    for (int j = 0; l && j < ms.N(); ++j) l[j] = md.l(0, j);
  });
}

int oscamp_boundary_vectors(const oscamp_problem* p, double* e, double* b) {
  return guard([&] {
    need(p, "problem");
    const ModeSet ms = mode_package(p->pb.model);
    for (int j = 0; e && j < ms.e.size(); ++j) e[j] = ms.e(j);
    for (int j = 0; b && j < ms.b.size(); ++j) b[j] = ms.b(j);
  });
}

int oscamp_lopatinskii_margin(const oscamp_problem* p, double* margin) {
  return guard([&] {
    need(p, "problem");
    need(margin, "margin");
    *margin = lopatinskii_margin(p->pb.model);
  });
}

int oscamp_resonances(const oscamp_problem* p, int n_max, int* triples, int cap, int* count) {
  return guard([&] {
    need(p, "problem");
    need(count, "count");
    const auto tr = find_resonances(mode_package(p->pb.model), n_max);
    *count = static_cast<int>(tr.size());
    for (int i = 0; triples && i < std::min(cap, *count); ++i) {
      const int v[6] = {tr[i].m, tr[i].p, tr[i].r, tr[i].n_m, tr[i].n_p, tr[i].n_r};
      std::memcpy(triples + 6 * i, v, sizeof v);
    }
  });
}

int oscamp_profiles_solve(const oscamp_problem* p, oscamp_profiles** out) {
  return guard([&] {
    need(p, "problem");
    need(out, "output handle");
    ModeSet ms = mode_package(p->pb.model);
    ProfileSolution sol = solve_key_subsystem(p->pb.model, ms, p->pb.source, p->pb.run);
    *out = new oscamp_profiles{p->pb, std::move(ms), std::move(sol)};
  });
}

void oscamp_profiles_free(oscamp_profiles* h) { delete h; }

int oscamp_profiles_grid(const oscamp_profiles* h, int* n, int* K, double* T) {
  return guard([&] {
    need(h, "profiles");
    const AmplitudeGrid& g = h->sol.state.grid;
    if (n) *n = g.n;
    if (K) *K = g.K;
    if (T) *T = h->sol.state.t;
  });
}

int oscamp_profiles_constants(const oscamp_profiles* h, double* alpha1, double* kappa_t, double* w, double* alpha2) {
  return guard([&] {
    need(h, "profiles");
    const AmplitudeConstants& c = h->sol.constants;
    if (alpha1) *alpha1 = c.alpha1;
    if (kappa_t) *kappa_t = c.kappa_t;
    if (w) *w = c.w;
    if (alpha2) *alpha2 = c.memory.empty() ? 0 : c.memory[0].alpha2;
  });
}

int oscamp_profiles_amplitude(const oscamp_profiles* h, double t, double* re, double* im) {
  return guard([&] {
    need(h, "profiles");
    const History& hist = h->sol.state.history;
    if (t < 0 || t > hist.last_time() + 1e-12) fail(Status::invalid_argument, "time outside the solved interval");
    const int n = hist.grid().n;
    for (int k = 1; k <= hist.grid().K; ++k) {
      const CVec a = hist.mode(k, t, 0);
      for (int i = 0; i < n; ++i) {
        if (re) re[(k - 1) * n + i] = a(i).real();
        if (im) im[(k - 1) * n + i] = a(i).imag();
      }
    }
  });
}

int oscamp_profiles_write_csv(const oscamp_profiles* h, const char* path) {
  return guard([&] {
    need(h, "profiles");
    need(path, "path");
    const History& hist = h->sol.state.history;
    const Vec x = hist.grid().x();
    std::string s = "t [time],x1 [length],k [theta_0 mode],re_a [amplitude],im_a [amplitude]\n";
    const int stride = std::max(1, hist.levels() / 20);
    for (int j = 0; j < hist.levels(); j += stride) {
      const double t = hist.t(j);
      for (int k = 1; k <= hist.grid().K; ++k) {
        const CVec a = hist.mode(k, t, 0);
        for (int i = 0; i < x.size(); ++i)
          s += fmt("%.8g,%.8g,", t, x(i)) + std::to_string(k) + fmt(",%.10g,%.10g\n", a(i).real(), a(i).imag());
      }
    }
    write_text(path, s);
  });
}

int oscamp_simulate(const oscamp_problem* p, double eps, double* sup_v, double* boundary_residual) {
  return guard([&] {
    need(p, "problem");
    const Trajectory tr = solve_direct(p->pb.model, p->pb.source, solver_options(p->pb.run, eps));
    if (sup_v) *sup_v = tr.sup();
    if (boundary_residual) *boundary_residual = tr.max_boundary_residual;
  });
}

int oscamp_corrector(const oscamp_problem* p, double eps, double* err_leading, double* err_corrected, double* sup_u) {
  return guard([&] {
    need(p, "problem");
    ExperimentPlan plan;
    plan.eps = {eps};
    const ConvergenceTable t = run_convergence_study(p->pb, plan);
    if (err_leading) *err_leading = t.rows[0].leading;
    if (err_corrected) *err_corrected = t.rows[0].corrected;
    if (sup_u) *sup_u = t.rows[0].sup_ref;
  });
}

int oscamp_study(const oscamp_problem* p, const char* name, const char* out_dir, int* pass, char* summary, size_t cap) {
  std::string text;
  bool ok = false;
  const int rc = guard([&] {
    need(p, "problem");
    need(name, "study name");
    const std::string id = name;
    std::string dir = out_dir ? out_dir : "";
    if (!dir.empty()) std::filesystem::create_directories(dir);
    auto save = [&](const std::string& file, const std::string& csv) {
      if (!dir.empty()) write_text(dir + "/" + file, csv);
    };
    const Problem& pb = p->pb;
    ExperimentPlan plan = default_plan(id, pb.run);
    const Tolerances& tol = plan.tol;
    if (id == "amplification" || id == "control") {
      const Problem q = id == "control" ? control_problem(pb) : pb;
      const AmplificationTable t = run_amplification_study(q, plan);
      save(id + ".csv", to_csv(t));
      for (const auto& r : t.rows) text += fmt("eps %.6g  sup|v| %.4e  sup|v|/eps %.4f", r.eps, r.sup, r.per_eps) + fmt("  sup|v|/eps^2 %.4f\n", r.per_eps2);
      if (id == "amplification") {
        ok = amplified(t, tol);
        text += verdict(ok, fmt("O(eps) response: sup|v|/eps spread %.3f (<= %.3g)", t.spread_eps, tol.amp_spread));
      } else {
        ok = bounded_response(t, tol);
        text += verdict(ok, fmt("O(eps^2) response: sup|v|/eps^2 spread %.3f (<= %.3g)", t.spread_eps2, tol.amp_spread));
      }
    } else if (id == "convergence") {
      const ConvergenceTable t = run_convergence_study(pb, plan);
      save("convergence.csv", to_csv(t));
      for (const auto& r : t.rows)
        text += fmt("eps %.6g  leading %.4e  corrected %.4e\n", r.eps, r.leading, r.corrected);
      ok = converges(t, tol);
      text += verdict(ok, fmt("corrected error decreasing, slope %.3f (leading %.3f)", t.slope_corrected, t.slope_leading));
    } else if (id == "oracle") {
      const OracleStudy s = run_oracle_study(pb, pb.run.eps, plan.ladder);
      save("oracle.csv", to_csv(s));
      for (const auto& r : s.rows) text += fmt("ppw %.4g  relative sup error %.4e\n", r.ppw, r.rel_error);
      ok = !s.rows.empty() && s.rows[0].rel_error < tol.oracle_rel;
      for (double o : s.orders) ok = ok && o >= tol.oracle_order;
      text += verdict(ok, fmt("linear oracle: error %.3e, order %.3f", s.rows[0].rel_error, s.orders.empty() ? 0.0 : s.orders[0]));
    } else if (id == "identities" || id == "identities-fault") {
      const IdentityReport r = run_identity_suite(pb.run.seed, id == "identities" ? Fault::none : Fault::projector);
      save(id + ".csv", to_csv(r));
      for (const auto& x : r.rows) text += verdict(x.pass, x.name + fmt("  defect %.3e (tol %.1e)", x.defect, x.tol));
      ok = r.pass;
    } else if (id == "nashmoser") {
      const NashMoserStudy s = run_nash_moser_study(pb, nash_moser_options(pb.run));
      save("nm_trace.csv", to_csv(s.nm.trace));
      save("picard.csv", to_csv(s.picard.trace));
      save("smoothing.csv", to_csv(s.smoothing));
      double worst = 0, book = 0;
      for (const auto& c : s.smoothing) worst = std::max(worst, c.worst);
      for (const auto& st : s.nm.trace) book = std::max({book, st.bookkeeping, st.bookkeeping_boundary});
      const auto& last = s.nm.trace.back();
      const double res = std::max(last.residual_interior, last.residual_boundary);
      ok = worst <= tol.smoothing_bound && s.nm.converged && res < tol.nm_residual &&
           static_cast<int>(s.nm.trace.size()) <= tol.nm_steps && s.limit_error < tol.nm_limit && book < tol.bookkeeping;
      text += fmt("steps %.0f  residual %.3e  limit error %.3e\n", static_cast<double>(s.nm.trace.size()), res, s.limit_error);
      text += fmt("picard steps %.0f  converged %.0f\n", static_cast<double>(s.picard.trace.size()), s.picard.converged ? 1.0 : 0.0);
      text += verdict(ok, fmt("Nash-Moser: smoothing constant %.3f, residual %.2e, bookkeeping %.1e", worst, res, book));
    } else {
      fail(Status::invalid_argument, "unknown study '" + id + "'");
    }
  });
  if (pass) *pass = rc == OSCAMP_OK && ok;
  copy_out(rc == OSCAMP_OK ? text : last_error, summary, cap);
  return rc;
}

}  // extern "C"
