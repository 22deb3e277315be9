#pragma once

#include "oscamp/model.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace oscamp {

enum class Direction { incoming, outgoing };

struct Mode {
  double omega = 0;
  Vec v;            // group velocity (x_1..x_d)
  Direction direction = Direction::incoming;
  Mat r;            // N x nu right basis of ker L(d phi)
  Mat l;            // nu x N, l * r = I
  Mat P;            // r * l
  Mat R;            // partial inverse of L(d phi)
  int multiplicity() const { return static_cast<int>(r.cols()); }
  bool incoming() const { return direction == Direction::incoming; }
};

struct ModeSet {
  Vec beta;
  Mat normal;              // B_d^{-1}(tau I + sum eta_j B_j)
  std::vector<Mode> modes; // decreasing omega
  std::vector<int> incoming_ids, outgoing_ids;
  Mat stable_basis;        // N x p, incoming r's
  Vec e;                   // spans ker B on the stable subspace
  std::vector<Vec> e_coef; // e = sum_m r_m e_coef[m] (zero for outgoing)
  Vec b;                   // left kernel of B restricted to the stable subspace
  Vec xlop;                // (time, x_1, .., x_{d-1}) coefficients of the boundary transport field

  int M() const { return static_cast<int>(modes.size()); }
  int N() const { return static_cast<int>(normal.rows()); }
  // L(d phi_m) = omega_m I + normal; scaled: L(n d phi_m) with tangential n beta.
  Mat L(int m) const;
  // L(tau, eta, omega) for arbitrary covector in units of beta: k*beta and xi_d.
  Mat L_at(double k, double xi_d) const;
  Vec omegas() const;
};

// Real roots of det[tau I + sum eta_j B_j + omega B_d] = 0, ascending.
std::vector<double> dispersion_roots(const HyperbolicModel& model, const Vec& beta);

// Gradient of the eigenvalue branch of sum xi_j B_j through (eta, omega) with value -tau;
// Rayleigh-quotient form. beta = (tau, eta).
Vec group_velocity(const HyperbolicModel& model, const Vec& beta, double omega);
// Same gradient from central differences of the sorted eigenvalue branch.
Vec group_velocity_fd(const HyperbolicModel& model, const Vec& beta, double omega, double h = 1e-4);

Direction classify(const Vec& v, double tol = 1e-8);

// Without require_wr a uniformly stable boundary is accepted and e, b, xlop stay empty.
ModeSet mode_package(const HyperbolicModel& model, const Vec& beta, bool require_wr = true);
inline ModeSet mode_package(const HyperbolicModel& model) { return mode_package(model, model.beta); }

struct ResonanceTriple {
  int m = 0, p = 0, r = 0;       // outgoing, incoming, incoming (0-based mode ids)
  int n_m = 0, n_p = 0, n_r = 0; // n_m phi_m = n_p phi_p + n_r phi_r
  double defect = 0;
};

std::vector<ResonanceTriple> find_resonances(const ModeSet& ms, int n_max, double tol = 1e-10);

// Euler family: phi_1 resonates with phi_2, phi_3 iff 2M^2/(1-M^2) = p/q is rational.
std::optional<std::pair<long, long>> euler_resonance_pq(const EulerParams& prm, long max_den = 1000000, double tol = 1e-12);

}  // namespace oscamp
