/*
 * qdiode: C interface to the two-qubit waveguide diode simulator.
 *
 * All rates and frequencies are angular (rad/s). Functions return a
 * qd_status; on failure qd_last_error() describes the problem for the
 * calling thread. Handles are opaque and must be released with the
 * matching *_free function (passing NULL is allowed).
 */
#ifndef QDIODE_QDIODE_H
#define QDIODE_QDIODE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(QDIODE_BUILDING)
#    define QD_API __declspec(dllexport)
#  else
#    define QD_API __declspec(dllimport)
#  endif
#else
#  define QD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qd_status {
    QD_OK = 0,
    QD_ERR_INVALID_ARGUMENT = 1,
    QD_ERR_SOLVER = 2,
    QD_ERR_FIT = 3,
    QD_ERR_INTERNAL = 4
} qd_status;

typedef enum qd_direction { QD_FORWARD = 0, QD_REVERSE = 1 } qd_direction;
typedef enum qd_port { QD_TRANSMITTED = 0, QD_REFLECTED = 1 } qd_port;

typedef struct qd_complex {
    double re;
    double im;
} qd_complex;

typedef struct qd_qubit_params {
    double omega_q;
    double gamma_r;
    double gamma_nr;
    double gamma_phi;
} qd_qubit_params;

QD_API const char* qd_version(void);
QD_API const char* qd_last_error(void);
QD_API const char* qd_status_name(qd_status s);

/* ---- single qubit ------------------------------------------------------ */

/* Closed-form transmission at detuning delta_omega = omega_q - omega_d. */
QD_API qd_status qd_transmission_analytic(const qd_qubit_params* q, double delta_omega,
                                          qd_complex alpha, qd_complex* out);

/* <a_out>/alpha from the steady state of the driven qubit. */
QD_API qd_status qd_transmission_numeric(const qd_qubit_params* q, double omega_d,
                                         qd_complex alpha, qd_complex* out);

typedef enum qd_fit_mode { QD_FIT_DECOHERENCE_SUM = 0, QD_FIT_SEPARATE_RATES = 1 } qd_fit_mode;

/* One measured point. has_complex selects t (re/im) over t_abs. */
typedef struct qd_sample {
    double delta_omega;
    int has_complex;
    qd_complex t;
    double t_abs;
} qd_sample;

typedef struct qd_fit_report {
    qd_qubit_params params;
    qd_qubit_params standard_errors;
    double decoherence_sum; /* gamma_nr + 2 gamma_phi */
    double decoherence_sum_error;
    double residual_norm;
    int iterations;
    int converged;
} qd_fit_report;

QD_API qd_status qd_fit_single_qubit(const qd_sample* data, size_t n, qd_complex alpha,
                                     const qd_qubit_params* initial, qd_fit_mode mode,
                                     qd_fit_report* out);

/* ---- diode ------------------------------------------------------------- */

typedef struct qd_diode qd_diode;

/* Diode at the optimal tuning for phase offset delta (phi = pi - delta). */
QD_API qd_status qd_diode_create_optimal(const qd_qubit_params* q1, const qd_qubit_params* q2,
                                         double omega_d, double delta, qd_diode** out);
/* Diode with explicit qubit frequencies and propagation phase phi in [0, 2pi). */
QD_API qd_status qd_diode_create(const qd_qubit_params* q1, const qd_qubit_params* q2,
                                 double omega_d, double phi, qd_diode** out);
QD_API void qd_diode_free(qd_diode* d);

QD_API qd_status qd_diode_get_qubits(const qd_diode* d, qd_qubit_params* q1, qd_qubit_params* q2);
QD_API double qd_diode_delta(const qd_diode* d);
QD_API double qd_diode_gamma_bar(const qd_diode* d);

typedef struct qd_operating_point {
    double power;
    qd_complex t_forward;
    qd_complex t_reverse;
    double efficiency;
    double dark_population_forward;
    double dark_population_reverse;
} qd_operating_point;

QD_API qd_status qd_diode_operating_point(const qd_diode* d, double power, qd_operating_point* out);

/* Transmission with a one-sided drive of photon flux `power`. */
QD_API qd_status qd_diode_transmission(const qd_diode* d, double power, qd_direction dir,
                                       qd_complex* out);

/* Steady-state density matrix (4x4, column-major) for a one-sided drive. */
QD_API qd_status qd_diode_steady_state(const qd_diode* d, double power, qd_direction dir,
                                       qd_complex rho[16]);

/* rows[i] receives the point for powers[i]; status[i] is QD_OK or the failure
 * code of that row. `powers` must be ascending. */
QD_API qd_status qd_diode_power_sweep(const qd_diode* d, const double* powers, size_t n,
                                      int threads, qd_operating_point* rows, qd_status* status);

QD_API qd_status qd_diode_optimal_power(const qd_diode* d, double p_lo, double p_hi,
                                        double* power, double* efficiency);

/* ---- helpers ----------------------------------------------------------- */

QD_API qd_status qd_phase_from_frequency(double omega_d, double omega_pi, double* phi,
                                         double* delta);
QD_API qd_status qd_dispersive_phase(double f_hz, double f_c_hz, double d_m, double* phi);
QD_API qd_status qd_optimal_tuning(double omega_d, double delta, double gamma_bar,
                                   double* omega_1, double* omega_2);
QD_API qd_status qd_dark_bright_rates(double delta, double gamma_r1, double gamma_r2,
                                      double* gamma_dark, double* gamma_bright);
QD_API double qd_efficiency(qd_complex t_forward, qd_complex t_reverse);
QD_API double qd_predicted_linewidth(double delta, double gamma_bar, double gamma_nr,
                                     double gamma_phi, double gamma_exc);

/* ---- spectrum ---------------------------------------------------------- */

typedef struct qd_spectrum qd_spectrum;

typedef struct qd_lorentzian {
    double center;
    double fwhm;
    double area;
    double baseline;
    double residual_norm;
    int converged;
} qd_lorentzian;

/* Inelastic PSD (per rad/s) at the given offsets from the drive frequency. */
QD_API qd_status qd_spectrum_compute(const qd_diode* d, double power, qd_direction dir,
                                     qd_port port, const double* offsets, size_t n,
                                     qd_spectrum** out);
QD_API void qd_spectrum_free(qd_spectrum* s);
QD_API size_t qd_spectrum_size(const qd_spectrum* s);
QD_API const double* qd_spectrum_offsets(const qd_spectrum* s);
QD_API const double* qd_spectrum_psd(const qd_spectrum* s);
QD_API double qd_spectrum_elastic_weight(const qd_spectrum* s);
QD_API double qd_spectrum_total_flux(const qd_spectrum* s);
QD_API double qd_spectrum_integrated(const qd_spectrum* s);
/* QD_ERR_FIT when the spectrum is flat or not single-peaked. */
QD_API qd_status qd_spectrum_fit(const qd_spectrum* s, qd_lorentzian* out);

/* ---- flapping mirror --------------------------------------------------- */

typedef struct qd_mirror_model {
    double p_dark;
    qd_complex alpha;
    double sigma_w;
    uint64_t n_samples;
    uint64_t seed;
    uint64_t stream;
    double dwell_samples; /* 0: independent samples */
} qd_mirror_model;

typedef struct qd_iq_record qd_iq_record;

QD_API qd_status qd_mirror_simulate(const qd_mirror_model* m, qd_iq_record** out);
QD_API void qd_iq_record_free(qd_iq_record* r);
QD_API size_t qd_iq_record_size(const qd_iq_record* r);
QD_API const double* qd_iq_record_i(const qd_iq_record* r);
QD_API const double* qd_iq_record_q(const qd_iq_record* r);
QD_API qd_status qd_iq_variance(const qd_iq_record* r, double* var_i, double* var_q);

typedef struct qd_variance_row {
    double power;
    double var_i_fwd;
    double var_i_rev;
    double var_q_fwd;
    double var_q_rev;
    double var_i_fwd_analytic;
    double var_i_rev_analytic;
} qd_variance_row;

QD_API qd_status qd_mirror_variance_vs_power(double p_dark_fwd, double p_dark_rev,
                                             const double* powers, size_t n, double sigma_w,
                                             uint64_t n_samples, uint64_t seed,
                                             double dwell_samples, int threads,
                                             qd_variance_row* rows);

#ifdef __cplusplus
}
#endif

#endif /* QDIODE_QDIODE_H */
