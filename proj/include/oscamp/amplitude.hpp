#pragma once

#include "oscamp/profiles.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace oscamp {

// Coefficients of the boundary amplitude equation
//   d_t a + w d_1 a + alpha1 d_theta(a^2) + sum_q alpha2_q d_theta M_q = g_hat,
// with M_q the memory trace of the outgoing corrector (tau_q|_{x_d=0} = mu_q M_q).
struct AmplitudeConstants {
  double kappa_t = 0;   // raw time coefficient of the boundary transport field
  Vec kappa;            // raw (time, x_1) coefficients
  double w = 0;         // x_1 transport speed kappa_1 / kappa_t
  double f2 = 0;        // -b.Psi(e,e)
  double alpha1 = 0;    // f2 / kappa_t
  Vec b, e;
  std::vector<double> s;  // e_m = s_m r_m (0 on outgoing modes)
  std::vector<Vec> v;     // group velocities

  struct Memory {
    ResonanceTriple tr;
    double d = 0;       // l_q . B_d^{-1}[D(r_p,r_r) + D(r_r,r_p)]
    double f = 0;       // -b.B r_q
    double mu = 0;      // -v_{q,d} d s_p s_r
    double alpha2 = 0;  // f mu / kappa_t
    double source = 0;  // -v_{q,d} d s_p s_r, coefficient of the interaction in the tau transport
  };
  std::vector<Memory> memory;

  // Euler family only: printed transport normalizer uv(1+M^2)/(M^2 eta).
  std::optional<double> euler_normalizer;
};

AmplitudeConstants compute_constants(const HyperbolicModel& model, const ModeSet& ms,
                                     const std::vector<ResonanceTriple>& triples);

// Uniform periodic x_1 grid carrying theta_0 modes k = 1..K (k <= 0 by symmetry, a_0 = 0).
struct AmplitudeGrid {
  int n = 64;
  int K = 8;
  double L1 = 2 * pi;
  double dx() const { return L1 / n; }
  Vec x() const;
};

// Stored trajectory: physical values a(t_j) (n x K) and time derivatives, for causal
// cubic-Hermite reads at arbitrary T and spectral shifts in x_1.
class History {
 public:
  explicit History(const AmplitudeGrid& g = {}) : grid_(g) {}

  void push(double t, const CMat& a);
  void set_derivative(int level, const CMat& adot);
  int levels() const { return static_cast<int>(t_.size()); }
  double t(int j) const { return t_[j]; }
  double last_time() const { return t_.empty() ? 0 : t_.back(); }
  const CMat& a(int j) const { return a_[j]; }
  bool has_derivative(int j) const { return has_dot_[j]; }
  const AmplitudeGrid& grid() const { return grid_; }

  // Optional provisional value at tail_t > last_time (e.g. an RK predictor), used with a
  // quadratic Hermite piece on the final interval.
  struct Tail {
    double t;
    const CMat* a;
  };
  // Mode k (negative k by conjugation) at time T, evaluated at x_j + shift. Zero for T <= 0.
  CVec mode(int k, double T, double shift, const Tail* tail = nullptr) const;
  // Same at arbitrary x_1 points (spectral interpolation).
  CVec mode_at(int k, double T, const Vec& x1, const Tail* tail = nullptr) const;
  // d^order/dT^order (order 1 or 2) of the Hermite interpolant of mode k at T, shifted like mode().
  CVec mode_derivative(int k, double T, double shift, int order) const;
  // Values of all modes at T (n x K).
  CMat values(double T, const Tail* tail = nullptr) const;

 private:
  CVec raw(int k, double T, const Tail* tail) const;
  AmplitudeGrid grid_;
  std::vector<double> t_;
  std::vector<CMat> a_, adot_;
  std::vector<bool> has_dot_;
};

enum class MemoryMode { exact, grid };

// Outgoing corrector on an (x_1, x_2) grid, one complex field per theta_q mode j = 1..K.
struct TauGrid {
  int n2 = 0;
  double dx2 = 0;
  std::vector<CMat> modes;  // modes[j-1]: n x n2
  CMat trace() const;       // n x K at x_2 = 0
};

struct AmplitudeState {
  AmplitudeGrid grid;
  double t = 0;
  CMat a;  // n x K physical values, column k-1 = a_k(x_1)
  History history;
  std::vector<TauGrid> tau;  // GridTau mode: one per memory entry
  double max_theta_mean = 0;
  double max_abs = 0;
  std::vector<std::pair<double, double>> sup_trace;  // (t, sup |a|)
};

// Boundary forcing g_hat_k(t, x_1) = -ik b.G_k / kappa_t on the grid (n x K).
using Forcing = std::function<CMat(double t)>;
Forcing make_forcing(const BoundarySource& src, const AmplitudeConstants& c, const AmplitudeGrid& grid);

AmplitudeState initial_state(const AmplitudeGrid& grid, const AmplitudeConstants& c, MemoryMode mode, double T,
                             double tau_dx2 = 0);

// Truncated product (a^2)_k for k = 1..K, exact (alias-free) convolution over |k'| <= K.
CMat square_modes(const CMat& a);

// Memory integral M(t, x_1, x_2) per theta_q mode j = 1..K (n x K), composite Simpson over the history
// levels plus the endpoint s = t. x2 = 0 gives the boundary trace.
CMat memory_term_exact(const History& h, const AmplitudeConstants::Memory& mem, const AmplitudeConstants& c, double t,
                       double x2 = 0, const History::Tail* tail = nullptr, int refine = 1);

// Interaction source of the tau transport at height x2 (n x K).
CMat tau_source(const History& h, const AmplitudeConstants::Memory& mem, const AmplitudeConstants& c, double t, double x2,
                const History::Tail* tail = nullptr);

// One RK2 (Heun) step with an exact integrating factor for the x_1 transport.
void step_amplitude(AmplitudeState& st, double dt, const AmplitudeConstants& c, const Forcing& g, MemoryMode mode);

// Advance only the tau grids (driven by the stored history) by one Heun step.
void evolve_tau(std::vector<TauGrid>& tau, const History& h, const AmplitudeConstants& c, double t, double dt,
                const History::Tail* tail = nullptr);

// Incoming profile sigma_m at (t, x_1 grid, x2), per theta_m mode (n x K).
CMat reconstruct_sigma(const History& h, const AmplitudeConstants& c, int m, double t, double x2);

struct ProfileSolution {
  AmplitudeConstants constants;
  AmplitudeState state;
  MemoryMode mode = MemoryMode::exact;
  double dt = 0;
  std::vector<ResonanceTriple> triples;
};

double default_amplitude_dt(const AmplitudeConstants& c, const AmplitudeGrid& grid, double cfl, MemoryMode mode,
                            double T, double tau_dx2 = 0);

ProfileSolution solve_key_subsystem(const HyperbolicModel& model, const ModeSet& ms, const BoundarySource& src,
                                    const RunConfig& cfg, std::optional<MemoryMode> mode = std::nullopt,
                                    double dt = 0);

}  // namespace oscamp
