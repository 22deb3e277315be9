#ifndef OSCAMP_H
#define OSCAMP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum oscamp_status {
  OSCAMP_OK = 0,
  OSCAMP_INVALID_ARGUMENT = 1,
  OSCAMP_PARSE_ERROR = 2,
  OSCAMP_NOT_HYPERBOLIC = 3,
  OSCAMP_GLANCING = 4,
  OSCAMP_NOT_WR = 5,
  OSCAMP_SMALL_DIVISOR = 6,
  OSCAMP_AMBIGUOUS_MODE = 7,
  OSCAMP_CFL_VIOLATION = 8,
  OSCAMP_BLOW_UP = 9,
  OSCAMP_NEWTON_FAILURE = 10,
  OSCAMP_IO_ERROR = 11,
  OSCAMP_HISTORY_GAP = 12,
  OSCAMP_INTERNAL = 13,
  OSCAMP_BUFFER_TOO_SMALL = 14
};

typedef struct oscamp_problem oscamp_problem;
typedef struct oscamp_profiles oscamp_profiles;

/* Message of the last failing call on this thread ("" if none). */
const char* oscamp_last_error(void);
const char* oscamp_status_name(int status);
void oscamp_set_threads(int threads);

int oscamp_problem_load(const char* path, oscamp_problem** out);
int oscamp_problem_parse(const char* text, oscamp_problem** out);
void oscamp_problem_free(oscamp_problem* p);
/* Numeric [run] keys: eps, T, ppw, cfl, K, n_x1_amp, theta0, nm_delta, nm_steps, nm_tol, seed. */
int oscamp_problem_set(oscamp_problem* p, const char* key, double value);
int oscamp_problem_get(const oscamp_problem* p, const char* key, double* value);
int oscamp_problem_set_out(oscamp_problem* p, const char* dir);
/* Canonical config text; *needed receives the size including the terminator. */
int oscamp_problem_dump(const oscamp_problem* p, char* buf, size_t cap, size_t* needed);
int oscamp_problem_dims(const oscamp_problem* p, int* N, int* d, int* p_rows);

/* Spectral package at beta. r and l receive N entries, v receives d entries. */
int oscamp_mode_count(const oscamp_problem* p, int* M);
int oscamp_mode(const oscamp_problem* p, int m, double* omega, double* v, int* incoming, double* r, double* l);
/* e (N entries) spans ker B on the stable subspace, b (p entries) is its left kernel. */
int oscamp_boundary_vectors(const oscamp_problem* p, double* e, double* b);
/* Uniform Lopatinskii margin scanned over the frequency sphere (near zero: weakly stable). */
int oscamp_lopatinskii_margin(const oscamp_problem* p, double* margin);

/* Triples (m, p, r, n_m, n_p, n_r), six ints each, with |n| <= n_max. */
int oscamp_resonances(const oscamp_problem* p, int n_max, int* triples, int cap, int* count);

int oscamp_profiles_solve(const oscamp_problem* p, oscamp_profiles** out);
void oscamp_profiles_free(oscamp_profiles* h);
int oscamp_profiles_grid(const oscamp_profiles* h, int* n, int* K, double* T);
/* alpha1, kappa_t, w, and the Burgers-free memory coefficient alpha2 of the first triple (0 without triples). */
int oscamp_profiles_constants(const oscamp_profiles* h, double* alpha1, double* kappa_t, double* w, double* alpha2);
/* a_k(t, x1_i) for k = 1..K, i = 0..n-1, column-major n x K into re/im. */
int oscamp_profiles_amplitude(const oscamp_profiles* h, double t, double* re, double* im);
int oscamp_profiles_write_csv(const oscamp_profiles* h, const char* path);

/* Direct solve at eps: sup over time of |v| and the worst boundary residual. */
int oscamp_simulate(const oscamp_problem* p, double eps, double* sup_v, double* boundary_residual);
/* Sup errors of the leading and corrected approximations at t = T, u = v / eps. */
int oscamp_corrector(const oscamp_problem* p, double eps, double* err_leading, double* err_corrected, double* sup_u);

/* Studies: "amplification", "control", "convergence", "oracle", "identities", "identities-fault", "nashmoser".
   CSV files go to out_dir (created if missing); summary receives one verdict line per check. */
int oscamp_study(const oscamp_problem* p, const char* name, const char* out_dir, int* pass, char* summary, size_t cap);

#ifdef __cplusplus
}
#endif

#endif
