#pragma once

#include "oscamp/config.hpp"
#include "oscamp/nashmoser.hpp"
#include "oscamp/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace oscamp {

// Every pass/fail band used by the studies and the acceptance binary.
struct Tolerances {
  double spectral = 1e-10;
  double identity = 1e-11;
  double fast_residual = 1e-10;
  double amp_spread = 2;           // max/min of sup|v|/eps over the eps set
  double amp_growth_lo = 1.5;      // per-halving growth of sup|v|/eps^2
  double amp_growth_hi = 3;
  double conv_ratio = 0.7;         // per-halving ratio of the corrected error
  double oracle_rel = 1e-2;
  double oracle_order = 1.8;
  double memory_rel = 1e-2;
  double memory_gain = 2;
  double mean_zero = 1e-12;
  double transport_order = 1.8;
  double smoothing_bound = 16;
  double nm_residual = 1e-6;
  int nm_steps = 30;
  double nm_limit = 1e-4;
  double bookkeeping = 1e-12;
  double lopatinskii_floor = 1e-3;  // margin below this counts as weakly stable
};

struct ExperimentPlan {
  std::string id;
  std::vector<double> eps;     // strictly decreasing
  std::vector<double> ladder;  // points per wavelength, strictly increasing
  std::string out;
  Tolerances tol;
  void validate() const;
};

ExperimentPlan default_plan(const std::string& id, const RunConfig& cfg);

// Smallest singular value of B on the stable subspace (orthonormal basis, B scaled to unit norm)
// over frequencies (gamma + i tau, eta) on the unit sphere, including the direction of beta.
double lopatinskii_margin(const HyperbolicModel& model, int samples = 256);

// Euler model with the boundary replaced by data on the incoming characteristics (uniformly stable).
Problem control_problem(const Problem& pb);

struct AmplificationRow {
  double eps = 0, sup = 0, per_eps = 0, per_eps2 = 0;
};

struct AmplificationTable {
  std::vector<AmplificationRow> rows;
  double spread_eps = 0, spread_eps2 = 0;  // max/min of the two ratio columns
  std::vector<double> growth_eps2;         // per-halving factor of sup/eps^2
  std::vector<double> growth_eps;          // per-halving factor of sup/eps
};

AmplificationTable run_amplification_study(const Problem& pb, const ExperimentPlan& plan);
// sup/eps stays within the spread while sup/eps^2 grows within the band each halving.
bool amplified(const AmplificationTable& t, const Tolerances& tol);
// The reverse: sup/eps^2 stays within the spread while sup/eps shrinks within the band each halving.
bool bounded_response(const AmplificationTable& t, const Tolerances& tol);

struct ConvergenceRow {
  double eps = 0, sup_ref = 0, leading = 0, corrected = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<double> ratio_leading, ratio_corrected;
  double slope_leading = 0, slope_corrected = 0;  // least-squares log-log slope in eps
};

ConvergenceRow convergence_row(const SpaceTimeField& v, const ApproxField& leading, const ApproxField& corrected, double eps);
ConvergenceTable tabulate(std::vector<ConvergenceRow> rows);
ConvergenceTable run_convergence_study(const Problem& pb, const ExperimentPlan& plan);
// Strict decrease, corrected ratio within the band, corrected <= leading at every eps.
bool converges(const ConvergenceTable& t, const Tolerances& tol);

struct OracleRow {
  double ppw = 0, rel_error = 0;
};

struct OracleStudy {
  double eps = 0;
  std::vector<OracleRow> rows;
  std::vector<double> orders;
};

// Linear direct solver against the exact reflected solution on the ppw ladder.
OracleStudy run_oracle_study(const Problem& pb, double eps, const std::vector<double>& ppw);

struct IdentityRow {
  std::string name;
  double defect = 0, tol = 0;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityRow> rows;
  bool pass = true;
};

enum class Fault { none, projector };

// Algebraic and operator identities of every module on the Euler example with random data.
IdentityReport run_identity_suite(std::uint64_t seed, Fault fault = Fault::none);

struct NashMoserStudy {
  std::vector<SmoothingCheck> smoothing;
  NashMoserResult nm;
  PicardResult picard;
  double limit_error = 0;  // sup |a_NM(T) - a(T)| against the direct profile solve
};

NashMoserStudy run_nash_moser_study(const Problem& pb, const NashMoserOptions& opt, bool with_smoothing = true);

std::string to_csv(const AmplificationTable& t);
std::string to_csv(const ConvergenceTable& t);
std::string to_csv(const OracleStudy& s);
std::string to_csv(const IdentityReport& r);
std::string to_csv(const std::vector<NashMoserStep>& trace);
std::string to_csv(const std::vector<PicardStep>& trace);
std::string to_csv(const std::vector<SmoothingCheck>& checks);
void write_text(const std::string& path, const std::string& text);

}  // namespace oscamp
