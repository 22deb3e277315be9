#include "oscamp/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace oscamp {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Top-level comma split (commas inside parentheses stay).
std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_mat(const Mat& m) {
  std::string s;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) s += (s.empty() ? "" : ", ") + fmt(m(i, j));
  return s;
}

struct Entry {
  std::string value;
  int line;
};

using Section = std::map<std::string, Entry>;

class Reader {
 public:
  Reader(std::map<std::string, Section>& secs, std::string origin) : secs_(secs), origin_(std::move(origin)) {}

  bool has(const std::string& sec, const std::string& key) const {
    auto it = secs_.find(sec);
    return it != secs_.end() && it->second.count(key);
  }
  const Entry& get(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) fail(Status::parse_error, origin_ + ": missing key '" + key + "' in [" + sec + "]");
    return secs_.at(sec).at(key);
  }
  [[noreturn]] void error(const Entry& e, const std::string& what) const {
    fail(Status::parse_error, origin_ + ":" + std::to_string(e.line) + ": " + what);
  }
  double num(const std::string& sec, const std::string& key) const {
    const Entry& e = get(sec, key);
    try {
      return eval_constant(e.value);
    } catch (const Error& err) {
      error(e, err.what());
    }
  }
  double num_or(const std::string& sec, const std::string& key, double dflt) const {
    return has(sec, key) ? num(sec, key) : dflt;
  }
  int integer(const std::string& sec, const std::string& key, int dflt) const {
    if (!has(sec, key)) return dflt;
    const double v = num(sec, key);
    if (v != static_cast<int>(v)) error(get(sec, key), "'" + key + "' must be an integer");
    return static_cast<int>(v);
  }
  std::vector<double> list(const std::string& sec, const std::string& key) const {
    const Entry& e = get(sec, key);
    std::vector<double> out;
    for (const auto& item : split_list(e.value)) {
      try {
        out.push_back(eval_constant(item));
      } catch (const Error& err) {
        error(e, err.what());
      }
    }
    return out;
  }
  Mat matrix(const std::string& sec, const std::string& key, int rows, int cols) const {
    std::vector<double> v = list(sec, key);
    if (static_cast<int>(v.size()) != rows * cols)
      error(get(sec, key), "'" + key + "' needs " + std::to_string(rows * cols) + " entries, got " + std::to_string(v.size()));
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = v[i * cols + j];
    return m;
  }

 private:
  std::map<std::string, Section>& secs_;
  std::string origin_;
};

bool matches_indexed(const std::string& key, const std::string& prefix, int* index) {
  if (key.rfind(prefix, 0) != 0) return false;
  const std::string rest = key.substr(prefix.size());
  if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos) return false;
  *index = std::stoi(rest);
  return true;
}

}  // namespace

Problem parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, Section> secs;
  std::istringstream in(text);
  std::string line, current;
  int lineno = 0;
  const std::set<std::string> known{"system", "boundary", "source", "run"};
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(Status::parse_error, origin + ":" + std::to_string(lineno) + ": malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (!known.count(current)) fail(Status::parse_error, origin + ":" + std::to_string(lineno) + ": unknown section [" + current + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(Status::parse_error, origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (current.empty()) fail(Status::parse_error, origin + ":" + std::to_string(lineno) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    if (secs[current].count(key)) fail(Status::parse_error, origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    secs[current][key] = Entry{trim(line.substr(eq + 1)), lineno};
  }
  Reader rd(secs, origin);
  Problem pb;
  HyperbolicModel& m = pb.model;

  const std::string kind = rd.has("system", "model") ? rd.get("system", "model").value : "euler";
  if (kind == "euler") {
    m = euler_model(rd.num("system", "v"), rd.num("system", "u"), rd.num("system", "c"), rd.num("system", "eta"));
  } else if (kind == "general") {
    m.N = rd.integer("system", "N", 0);
    m.d = rd.integer("system", "d", 2);
    if (m.N <= 0) rd.error(rd.get("system", "N"), "N must be positive");
    m.B.clear();
    for (int j = 1; j <= m.d; ++j) m.B.push_back(rd.matrix("system", "B" + std::to_string(j), m.N, m.N));
    std::vector<double> beta = rd.list("system", "beta");
    if (static_cast<int>(beta.size()) != m.d) rd.error(rd.get("system", "beta"), "beta needs d entries");
    m.beta = Eigen::Map<Vec>(beta.data(), m.d);
    if (rd.has("system", "euler_params")) {
      std::vector<double> e = rd.list("system", "euler_params");
      if (e.size() != 4) rd.error(rd.get("system", "euler_params"), "euler_params needs v,u,c,eta");
      m.euler = EulerParams{e[0], e[1], e[2], e[3]};
    }
    m.boundary = Mat();
  } else {
    rd.error(rd.get("system", "model"), "model must be 'euler' or 'general'");
  }
  const int N = m.N;
  if (rd.has("boundary", "B")) {
    const Entry& e = rd.get("boundary", "B");
    const int count = static_cast<int>(rd.list("boundary", "B").size());
    if (count % N) rd.error(e, "B needs a multiple of N entries");
    m.boundary = rd.matrix("boundary", "B", count / N, N);
  } else if (kind == "general") {
    rd.get("boundary", "B");
  }
  const int p = m.p();
  m.D = Quadratic(N, N);
  m.Psi = Quadratic(p, N);
  m.D0 = rd.has("system", "D0") ? rd.matrix("system", "D0", N, N) : Mat::Zero(N, N);

  for (const auto& [key, e] : secs["system"]) {
    int idx = 0;
    if (matches_indexed(key, "D.", &idx)) {
      if (idx < 1 || idx > N) rd.error(e, "D index out of range");
      m.D.comp[idx - 1] = rd.matrix("system", key, N, N);
      continue;
    }
    static const std::set<std::string> euler_keys{"model", "v", "u", "c", "eta", "D0"};
    static const std::set<std::string> general_keys{"model", "N", "d", "beta", "euler_params", "D0"};
    bool ok = kind == "euler" ? euler_keys.count(key) > 0 : general_keys.count(key) > 0;
    if (kind == "general" && matches_indexed(key, "B", &idx) && idx >= 1 && idx <= m.d) ok = true;
    if (!ok) rd.error(e, "unknown key '" + key + "' in [system]");
  }
  for (const auto& [key, e] : secs["boundary"]) {
    int idx = 0;
    if (key == "B") continue;
    if (matches_indexed(key, "Psi.", &idx)) {
      if (idx < 1 || idx > p) rd.error(e, "Psi index out of range");
      m.Psi.comp[idx - 1] = rd.matrix("boundary", key, N, N);
      continue;
    }
    rd.error(e, "unknown key '" + key + "' in [boundary]");
  }

  BoundarySource& src = pb.source;
  src.p = p;
  src.ramp = rd.num_or("source", "ramp", 0.1);
  const double eta = m.beta.size() > 1 ? m.beta(1) : 1.0;
  if (rd.has("source", "L1")) src.L1 = rd.num("source", "L1");
  else src.L1 = 2 * pi * rd.integer("source", "L1_periods", 1) / eta;
  std::map<int, std::pair<const Entry*, const Entry*>> gk;
  for (const auto& [key, e] : secs["source"]) {
    if (key == "ramp" || key == "L1" || key == "L1_periods") continue;
    int k = 0;
    const std::size_t dot = key.rfind('.');
    if (key.rfind("G.", 0) == 0 && dot != std::string::npos && dot > 2 &&
        matches_indexed(key.substr(0, dot), "G.", &k) && k >= 1) {
      const std::string part = key.substr(dot + 1);
      if (part == "re") gk[k].first = &e;
      else if (part == "im") gk[k].second = &e;
      else rd.error(e, "unknown key '" + key + "' in [source]");
      continue;
    }
    rd.error(e, "unknown key '" + key + "' in [source]");
  }
  for (const auto& [k, pr] : gk) {
    std::vector<std::string> re(p, "0"), im(p, "0");
    for (int part = 0; part < 2; ++part) {
      const Entry* e = part == 0 ? pr.first : pr.second;
      if (!e) continue;
      std::vector<std::string> items = split_list(e->value);
      if (static_cast<int>(items.size()) != p) rd.error(*e, "G." + std::to_string(k) + " needs " + std::to_string(p) + " components");
      (part == 0 ? re : im) = items;
    }
    try {
      src.set_mode(k, re, im);
    } catch (const Error& err) {
      rd.error(pr.first ? *pr.first : *pr.second, err.what());
    }
  }
  src.check_causal();

  RunConfig& r = pb.run;
  static const std::set<std::string> run_keys{
      "eps", "eps_list", "ppw", "cfl", "T", "L2", "integrator", "upwind_order", "newton_max", "newton_tol", "K", "n_x1_amp",
      "cfl_amp", "memory", "tau_dx2", "v1_choice", "delta", "theta0", "nm_delta", "nm_steps", "nm_tol", "seed", "threads", "out"};
  for (const auto& [key, e] : secs["run"])
    if (!run_keys.count(key)) rd.error(e, "unknown key '" + key + "' in [run]");
  r.eps = rd.num_or("run", "eps", r.eps);
  if (rd.has("run", "eps_list")) r.eps_list = rd.list("run", "eps_list");
  r.ppw = rd.num_or("run", "ppw", r.ppw);
  r.cfl = rd.num_or("run", "cfl", r.cfl);
  r.T = rd.num_or("run", "T", r.T);
  r.L2 = rd.num_or("run", "L2", r.L2);
  if (rd.has("run", "integrator")) r.integrator = rd.get("run", "integrator").value;
  r.upwind_order = rd.integer("run", "upwind_order", r.upwind_order);
  r.newton_max = rd.integer("run", "newton_max", r.newton_max);
  r.newton_tol = rd.num_or("run", "newton_tol", r.newton_tol);
  r.K = rd.integer("run", "K", r.K);
  r.n_x1_amp = rd.integer("run", "n_x1_amp", r.n_x1_amp);
  r.cfl_amp = rd.num_or("run", "cfl_amp", r.cfl_amp);
  if (rd.has("run", "memory")) r.memory = rd.get("run", "memory").value;
  r.tau_dx2 = rd.num_or("run", "tau_dx2", r.tau_dx2);
  if (rd.has("run", "v1_choice")) r.v1_choice = rd.get("run", "v1_choice").value;
  r.delta = rd.num_or("run", "delta", r.delta);
  r.theta0 = rd.num_or("run", "theta0", r.theta0);
  r.nm_delta = rd.num_or("run", "nm_delta", r.nm_delta);
  r.nm_steps = rd.integer("run", "nm_steps", r.nm_steps);
  r.nm_tol = rd.num_or("run", "nm_tol", r.nm_tol);
  r.seed = static_cast<std::uint64_t>(rd.integer("run", "seed", static_cast<int>(r.seed)));
  r.threads = rd.integer("run", "threads", r.threads);
  if (rd.has("run", "out")) r.out = rd.get("run", "out").value;

  auto check = [&](bool ok, const std::string& key, const std::string& what) {
    if (!ok) rd.error(rd.has("run", key) ? rd.get("run", key) : Entry{"", 0}, what);
  };
  check(r.eps > 0 && r.eps <= 1, "eps", "eps must lie in (0,1]");
  check(r.cfl > 0 && r.cfl <= 2, "cfl", "cfl must lie in (0,2]");
  check(r.ppw >= 12, "ppw", "ppw must be at least 12");
  check(r.memory == "exact" || r.memory == "grid", "memory", "memory must be 'exact' or 'grid'");
  check(r.integrator == "rk2" || r.integrator == "rk3" || r.integrator == "rk4", "integrator", "integrator must be rk2, rk3 or rk4");
  check(r.upwind_order == 3 || r.upwind_order == 5, "upwind_order", "upwind_order must be 3 or 5");
  check(r.v1_choice == "min_norm" || r.v1_choice == "zero_e" || r.v1_choice == "solvability", "v1_choice",
        "v1_choice must be min_norm, zero_e or solvability");
  check(r.K >= 1, "K", "K must be positive");
  for (std::size_t i = 1; i < r.eps_list.size(); ++i)
    check(r.eps_list[i] < r.eps_list[i - 1], "eps_list", "eps_list must be strictly decreasing");
  return pb;
}

Problem load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(Status::io_error, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

std::string save_config(const Problem& pb) {
  const HyperbolicModel& m = pb.model;
  std::ostringstream o;
  o << "[system]\nmodel = general\nN = " << m.N << "\nd = " << m.d << "\n";
  for (int j = 0; j < m.d; ++j) o << "B" << j + 1 << " = " << fmt_mat(m.B[j]) << "\n";
  o << "beta = " << fmt_mat(m.beta.transpose()) << "\n";
  if (m.euler) o << "euler_params = " << fmt(m.euler->v) << ", " << fmt(m.euler->u) << ", " << fmt(m.euler->c) << ", " << fmt(m.euler->eta) << "\n";
  if (m.has_D0()) o << "D0 = " << fmt_mat(m.D0) << "\n";
  for (int i = 0; i < m.D.out_dim(); ++i)
    if (m.D.comp[i].norm() > 0) o << "D." << i + 1 << " = " << fmt_mat(m.D.comp[i]) << "\n";
  o << "\n[boundary]\nB = " << fmt_mat(m.boundary) << "\n";
  for (int i = 0; i < m.Psi.out_dim(); ++i)
    if (m.Psi.comp[i].norm() > 0) o << "Psi." << i + 1 << " = " << fmt_mat(m.Psi.comp[i]) << "\n";
  const BoundarySource& s = pb.source;
  o << "\n[source]\nL1 = " << fmt(s.L1) << "\nramp = " << fmt(s.ramp) << "\n";
  for (const auto& [k, me] : s.modes) {
    for (int part = 0; part < 2; ++part) {
      o << "G." << k << (part ? ".im" : ".re") << " = ";
      const auto& v = part ? me.im : me.re;
      for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << v[i].text();
      o << "\n";
    }
  }
  const RunConfig& r = pb.run;
  o << "\n[run]\neps = " << fmt(r.eps) << "\neps_list = ";
  for (std::size_t i = 0; i < r.eps_list.size(); ++i) o << (i ? ", " : "") << fmt(r.eps_list[i]);
  o << "\nppw = " << fmt(r.ppw) << "\ncfl = " << fmt(r.cfl) << "\nT = " << fmt(r.T) << "\nL2 = " << fmt(r.L2)
    << "\nintegrator = " << r.integrator << "\nupwind_order = " << r.upwind_order << "\nnewton_max = " << r.newton_max
    << "\nnewton_tol = " << fmt(r.newton_tol) << "\nK = " << r.K << "\nn_x1_amp = " << r.n_x1_amp
    << "\ncfl_amp = " << fmt(r.cfl_amp) << "\nmemory = " << r.memory << "\ntau_dx2 = " << fmt(r.tau_dx2)
    << "\nv1_choice = " << r.v1_choice << "\ndelta = " << fmt(r.delta) << "\ntheta0 = " << fmt(r.theta0)
    << "\nnm_delta = " << fmt(r.nm_delta) << "\nnm_steps = " << r.nm_steps << "\nnm_tol = " << fmt(r.nm_tol)
    << "\nseed = " << r.seed << "\nthreads = " << r.threads << "\nout = " << r.out << "\n";
  return o.str();
}

}  // namespace oscamp
