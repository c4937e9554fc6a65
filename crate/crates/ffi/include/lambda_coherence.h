#ifndef LAMBDA_COHERENCE_H
#define LAMBDA_COHERENCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Status codes returned by every fallible call.
typedef enum LcStatus {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_INVALID_PARAMETER = 2,
  LC_STATUS_UNDEFINED_ANGLE = 3,
  LC_STATUS_STEP_TOO_LARGE = 4,
  LC_STATUS_INVARIANT_BREACH = 5,
  LC_STATUS_FIT = 6,
  LC_STATUS_CONFIG = 7,
  LC_STATUS_IO = 8,
  LC_STATUS_INDEX_OUT_OF_RANGE = 9,
  LC_STATUS_INVALID_UTF8 = 10,
  LC_STATUS_PANIC = 11,
} LcStatus;

// A fully specified experiment: system, pulses, grid, initial state, medium.
typedef struct LcScenario LcScenario;

// Sampled density-matrix trajectory produced by [`lc_evolve`].
typedef struct LcTrajectory LcTrajectory;

// One trajectory sample.
typedef struct LcSample {
  double t_ns;
  double p1;
  double p2;
  double p3;
  double rho13_re;
  double rho13_im;
} LcSample;

// Result of an exponential tail fit.
typedef struct LcFit {
  double amplitude;
  double time_constant_ns;
  double rms_residual;
  uintptr_t samples;
} LcFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *lc_version(void);

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next `lc_*` call on the same thread.
const char *lc_last_error(void);

// Fractional-STIRAP scenario with default parameters.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum LcStatus lc_scenario_fstirap_default(struct LcScenario **out);

// Coherent-population-return scenario for one Stokes peak (rad/ns), other
// parameters at their defaults.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum LcStatus lc_scenario_cpr(double peak_stokes, struct LcScenario **out);

// Scenario from a run configuration (the `simulate` config format). A `cpr`
// config must name exactly one Stokes peak.
//
// # Safety
// `config_json` must be a NUL-terminated string; `out` must be writable.
enum LcStatus lc_scenario_from_config(const char *config_json, struct LcScenario **out);

// Scenario from its JSON serialization (see [`lc_scenario_to_json`]).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum LcStatus lc_scenario_from_json(const char *json, struct LcScenario **out);

// JSON serialization of a scenario. Release the string with [`lc_string_free`].
//
// # Safety
// `scenario` must come from an `lc_scenario_*` constructor; `out` must be writable.
enum LcStatus lc_scenario_to_json(const struct LcScenario *scenario, char **out);

// Mixing angle θ (rad) of the scenario at time `t_ns`; frozen after switch-off.
//
// # Safety
// `scenario` must be live; `theta` must be writable.
enum LcStatus lc_scenario_mixing_angle(const struct LcScenario *scenario,
                                       double t_ns,
                                       double *theta);

// # Safety
// `scenario` must be NULL or come from an `lc_scenario_*` constructor and
// not have been freed already.
void lc_scenario_free(struct LcScenario *scenario);

// # Safety
// `s` must be NULL or a string returned by this library.
void lc_string_free(char *s);

// Integrates the scenario over its grid.
//
// # Safety
// `scenario` must be live; `out` must be writable.
enum LcStatus lc_evolve(const struct LcScenario *scenario, struct LcTrajectory **out);

// Number of samples; 0 for NULL.
//
// # Safety
// `traj` must be NULL or live.
uintptr_t lc_trajectory_len(const struct LcTrajectory *traj);

// # Safety
// `traj` must be live; `sample` must be writable.
enum LcStatus lc_trajectory_sample(const struct LcTrajectory *traj,
                                   uintptr_t index,
                                   struct LcSample *sample);

// Copies the full density matrix of one sample, row-major, into `re[9]` and `im[9]`.
//
// # Safety
// `traj` must be live; `re` and `im` must each point to 9 writable doubles.
enum LcStatus lc_trajectory_density_matrix(const struct LcTrajectory *traj,
                                           uintptr_t index,
                                           double *re,
                                           double *im);

// # Safety
// `traj` must be NULL or come from [`lc_evolve`] and not have been freed.
void lc_trajectory_free(struct LcTrajectory *traj);

// Peak detector-resolved four-wave-mixing signal for each probe delay.
// `peaks` receives `n_delays` values.
//
// # Safety
// `scenario` and `traj` must be live, `traj` produced from `scenario`;
// `delays` and `peaks` must each hold `n_delays` doubles.
enum LcStatus lc_probe_delay_scan(const struct LcScenario *scenario,
                                  const struct LcTrajectory *traj,
                                  const double *delays,
                                  uintptr_t n_delays,
                                  double *peaks);

// Log-linear fit of `A·exp(−t/τ)` to the samples with `from_ns ≤ t ≤ to_ns`.
//
// # Safety
// `times` and `values` must each hold `n` doubles; `fit` must be writable.
enum LcStatus lc_fit_exponential_decay(const double *times,
                                       const double *values,
                                       uintptr_t n,
                                       double from_ns,
                                       double to_ns,
                                       struct LcFit *fit);

// θ = atan2(Ω_P, Ω_S) in radians.
//
// # Safety
// `theta` must be writable.
enum LcStatus lc_mixing_angle(double omega_p, double omega_s, double *theta);

// Dark-state coherence |ρ₁₃| = cos θ sin θ for θ in [0, π/2].
//
// # Safety
// `coherence` must be writable.
enum LcStatus lc_analytic_coherence(double theta, double *coherence);

// Executes a `simulate` run configuration, writing all outputs under `out_dir`.
//
// # Safety
// Both arguments must be NUL-terminated strings.
enum LcStatus lc_run_config(const char *config_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAMBDA_COHERENCE_H */
