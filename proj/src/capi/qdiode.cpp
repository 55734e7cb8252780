#include "qdiode/qdiode.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "qdiode/core/diode.hpp"
#include "qdiode/core/error.hpp"
#include "qdiode/core/mirror.hpp"
#include "qdiode/core/single_qubit.hpp"
#include "qdiode/core/spectrum.hpp"

#ifndef QDIODE_VERSION_STRING
#define QDIODE_VERSION_STRING "0.0.0"
#endif

struct qd_diode {
    qdiode::DiodeConfig config;
};

struct qd_spectrum {
    qdiode::SpectrumResult result;
};

struct qd_iq_record {
    qdiode::IQRecord record;
};

namespace {

thread_local std::string g_last_error;

qd_status fail(qd_status s, const char* what) {
    g_last_error = what;
    return s;
}

template <class F>
qd_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return QD_OK;
    } catch (const qdiode::InvalidArgument& e) {
        return fail(QD_ERR_INVALID_ARGUMENT, e.what());
    } catch (const qdiode::SolverError& e) {
        return fail(QD_ERR_SOLVER, e.what());
    } catch (const qdiode::FitError& e) {
        return fail(QD_ERR_FIT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(QD_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(QD_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(QD_ERR_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw qdiode::InvalidArgument(what);
}

qdiode::Complex to_cpp(qd_complex z) { return {z.re, z.im}; }
qd_complex to_c(qdiode::Complex z) { return {z.real(), z.imag()}; }

qdiode::QubitParams to_cpp(const qd_qubit_params& q) {
    return {q.omega_q, q.gamma_r, q.gamma_nr, q.gamma_phi};
}
qd_qubit_params to_c(const qdiode::QubitParams& q) {
    return {q.omega_q, q.gamma_r, q.gamma_nr, q.gamma_phi};
}

qdiode::Direction to_cpp(qd_direction d) {
    require(d == QD_FORWARD || d == QD_REVERSE, "unknown direction");
    return d == QD_FORWARD ? qdiode::Direction::kForward : qdiode::Direction::kReverse;
}

qd_operating_point to_c(const qdiode::DiodeOperatingPoint& p) {
    return {p.power, to_c(p.t_forward), to_c(p.t_reverse), p.efficiency,
            p.dark_population_forward, p.dark_population_reverse};
}

qd_status classify(const std::string& message) {
    // Sweep rows only keep the message; solver failures are the common case.
    return message.empty() ? QD_OK : QD_ERR_SOLVER;
}

}  // namespace

extern "C" {

const char* qd_version(void) { return QDIODE_VERSION_STRING; }

const char* qd_last_error(void) { return g_last_error.c_str(); }

const char* qd_status_name(qd_status s) {
    switch (s) {
        case QD_OK: return "ok";
        case QD_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case QD_ERR_SOLVER: return "solver_error";
        case QD_ERR_FIT: return "fit_error";
        case QD_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

qd_status qd_transmission_analytic(const qd_qubit_params* q, double delta_omega, qd_complex alpha,
                                   qd_complex* out) {
    return guarded([&] {
        require(q && out, "null argument");
        *out = to_c(qdiode::transmission_analytic(to_cpp(*q), delta_omega, to_cpp(alpha)));
    });
}

qd_status qd_transmission_numeric(const qd_qubit_params* q, double omega_d, qd_complex alpha,
                                  qd_complex* out) {
    return guarded([&] {
        require(q && out, "null argument");
        qdiode::DriveConfig d;
        d.omega_d = omega_d;
        d.alpha = to_cpp(alpha);
        *out = to_c(qdiode::transmission_numeric(to_cpp(*q), d));
    });
}

qd_status qd_fit_single_qubit(const qd_sample* data, size_t n, qd_complex alpha,
                              const qd_qubit_params* initial, qd_fit_mode mode, qd_fit_report* out) {
    return guarded([&] {
        require((data || n == 0) && initial && out, "null argument");
        require(mode == QD_FIT_DECOHERENCE_SUM || mode == QD_FIT_SEPARATE_RATES, "unknown fit mode");
        std::vector<qdiode::TransmissionSample> samples(n);
        for (size_t k = 0; k < n; ++k) {
            samples[k].delta_omega = data[k].delta_omega;
            if (data[k].has_complex) samples[k].t = to_cpp(data[k].t);
            else samples[k].t_abs = data[k].t_abs;
        }
        qdiode::FitOptions opts;
        opts.mode = mode == QD_FIT_SEPARATE_RATES ? qdiode::FitMode::kSeparateRates
                                                  : qdiode::FitMode::kDecoherenceSum;
        const auto fit = qdiode::fit_single_qubit(samples, to_cpp(alpha), to_cpp(*initial), opts);
        out->params = to_c(fit.params);
        out->standard_errors = to_c(fit.standard_errors);
        out->decoherence_sum = fit.decoherence_sum;
        out->decoherence_sum_error = fit.decoherence_sum_error;
        out->residual_norm = fit.residual_norm;
        out->iterations = fit.iterations;
        out->converged = fit.converged ? 1 : 0;
    });
}

qd_status qd_diode_create_optimal(const qd_qubit_params* q1, const qd_qubit_params* q2,
                                  double omega_d, double delta, qd_diode** out) {
    return guarded([&] {
        require(q1 && q2 && out, "null argument");
        *out = nullptr;
        *out = new qd_diode{qdiode::optimal_diode(to_cpp(*q1), to_cpp(*q2), omega_d, delta)};
    });
}

qd_status qd_diode_create(const qd_qubit_params* q1, const qd_qubit_params* q2, double omega_d,
                          double phi, qd_diode** out) {
    return guarded([&] {
        require(q1 && q2 && out, "null argument");
        *out = nullptr;
        qdiode::DriveConfig drive;
        drive.omega_d = omega_d;
        drive.phi = phi;
        *out = new qd_diode{qdiode::DiodeConfig::from_drive(to_cpp(*q1), to_cpp(*q2), drive)};
    });
}

void qd_diode_free(qd_diode* d) { delete d; }

qd_status qd_diode_get_qubits(const qd_diode* d, qd_qubit_params* q1, qd_qubit_params* q2) {
    return guarded([&] {
        require(d && q1 && q2, "null argument");
        *q1 = to_c(d->config.q1);
        *q2 = to_c(d->config.q2);
    });
}

double qd_diode_delta(const qd_diode* d) { return d ? d->config.delta : 0.0; }

double qd_diode_gamma_bar(const qd_diode* d) { return d ? d->config.gamma_bar() : 0.0; }

qd_status qd_diode_operating_point(const qd_diode* d, double power, qd_operating_point* out) {
    return guarded([&] {
        require(d && out, "null argument");
        *out = to_c(qdiode::operating_point(d->config, power));
    });
}

qd_status qd_diode_transmission(const qd_diode* d, double power, qd_direction dir, qd_complex* out) {
    return guarded([&] {
        require(d && out, "null argument");
        const auto where = to_cpp(dir);
        *out = to_c(qdiode::transmission(qdiode::with_drive(d->config, power, where), where));
    });
}

qd_status qd_diode_steady_state(const qd_diode* d, double power, qd_direction dir,
                                qd_complex rho[16]) {
    return guarded([&] {
        require(d && rho, "null argument");
        const auto c = qdiode::with_drive(d->config, power, to_cpp(dir));
        const auto ss = qdiode::steady_state(qdiode::build_diode_liouvillian(c));
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) rho[4 * j + i] = to_c(ss(i, j));
    });
}

qd_status qd_diode_power_sweep(const qd_diode* d, const double* powers, size_t n, int threads,
                               qd_operating_point* rows, qd_status* status) {
    return guarded([&] {
        require(d && (n == 0 || (powers && rows && status)), "null argument");
        const auto result = qdiode::power_sweep(d->config, {powers, n}, threads);
        for (size_t k = 0; k < n; ++k) {
            status[k] = classify(result[k].error);
            rows[k] = result[k].point ? to_c(*result[k].point) : qd_operating_point{powers[k], {}, {}, 0, 0, 0};
        }
    });
}

qd_status qd_diode_optimal_power(const qd_diode* d, double p_lo, double p_hi, double* power,
                                 double* efficiency) {
    return guarded([&] {
        require(d && power && efficiency, "null argument");
        const auto best = qdiode::optimal_power(d->config, p_lo, p_hi);
        *power = best.power;
        *efficiency = best.efficiency;
    });
}

qd_status qd_phase_from_frequency(double omega_d, double omega_pi, double* phi, double* delta) {
    return guarded([&] {
        require(phi && delta, "null argument");
        const auto r = qdiode::phase_from_frequency(omega_d, omega_pi);
        *phi = r.phi;
        *delta = r.delta;
    });
}

qd_status qd_dispersive_phase(double f_hz, double f_c_hz, double d_m, double* phi) {
    return guarded([&] {
        require(phi, "null argument");
        *phi = qdiode::dispersive_phase(f_hz, f_c_hz, d_m);
    });
}

qd_status qd_optimal_tuning(double omega_d, double delta, double gamma_bar, double* omega_1,
                            double* omega_2) {
    return guarded([&] {
        require(omega_1 && omega_2, "null argument");
        const auto t = qdiode::optimal_tuning(omega_d, delta, gamma_bar);
        *omega_1 = t.omega_1;
        *omega_2 = t.omega_2;
    });
}

qd_status qd_dark_bright_rates(double delta, double gamma_r1, double gamma_r2, double* gamma_dark,
                               double* gamma_bright) {
    return guarded([&] {
        require(gamma_dark && gamma_bright, "null argument");
        require(gamma_r1 > 0.0 && gamma_r2 > 0.0, "radiative rates must be positive");
        const auto r = qdiode::dark_bright_rates(delta, gamma_r1, gamma_r2);
        *gamma_dark = r.gamma_dark;
        *gamma_bright = r.gamma_bright;
    });
}

double qd_efficiency(qd_complex t_forward, qd_complex t_reverse) {
    return qdiode::diode_efficiency(to_cpp(t_forward), to_cpp(t_reverse));
}

double qd_predicted_linewidth(double delta, double gamma_bar, double gamma_nr, double gamma_phi,
                              double gamma_exc) {
    return qdiode::predicted_linewidth(delta, gamma_bar, gamma_nr, gamma_phi, gamma_exc);
}

qd_status qd_spectrum_compute(const qd_diode* d, double power, qd_direction dir, qd_port port,
                              const double* offsets, size_t n, qd_spectrum** out) {
    return guarded([&] {
        require(d && out && (offsets || n == 0), "null argument");
        require(port == QD_TRANSMITTED || port == QD_REFLECTED, "unknown port");
        *out = nullptr;
        const auto where = to_cpp(dir);
        const auto c = qdiode::with_drive(d->config, power, where);
        qdiode::SpectrumOptions opts;
        opts.fit_lorentzian = false;
        auto r = qdiode::psd(c, where,
                             port == QD_TRANSMITTED ? qdiode::Port::kTransmitted : qdiode::Port::kReflected,
                             {offsets, n}, opts);
        *out = new qd_spectrum{std::move(r)};
    });
}

void qd_spectrum_free(qd_spectrum* s) { delete s; }

size_t qd_spectrum_size(const qd_spectrum* s) { return s ? s->result.inelastic_psd.size() : 0; }

const double* qd_spectrum_offsets(const qd_spectrum* s) {
    return s ? s->result.freq_offsets.data() : nullptr;
}

const double* qd_spectrum_psd(const qd_spectrum* s) {
    return s ? s->result.inelastic_psd.data() : nullptr;
}

double qd_spectrum_elastic_weight(const qd_spectrum* s) { return s ? s->result.elastic_weight : 0.0; }

double qd_spectrum_total_flux(const qd_spectrum* s) { return s ? s->result.total_flux : 0.0; }

double qd_spectrum_integrated(const qd_spectrum* s) {
    return s ? s->result.integrated_inelastic() : 0.0;
}

qd_status qd_spectrum_fit(const qd_spectrum* s, qd_lorentzian* out) {
    return guarded([&] {
        require(s && out, "null argument");
        const auto f = qdiode::fit_lorentzian(s->result);
        *out = {f.center, f.fwhm, f.area, f.baseline, f.residual_norm, f.converged ? 1 : 0};
    });
}

qd_status qd_mirror_simulate(const qd_mirror_model* m, qd_iq_record** out) {
    return guarded([&] {
        require(m && out, "null argument");
        *out = nullptr;
        qdiode::MirrorModel model;
        model.p_dark = m->p_dark;
        model.alpha = to_cpp(m->alpha);
        model.sigma_w = m->sigma_w;
        model.n_samples = m->n_samples;
        model.seed = m->seed;
        model.stream = m->stream;
        model.dwell_samples = m->dwell_samples;
        *out = new qd_iq_record{qdiode::simulate_mirror(model)};
    });
}

void qd_iq_record_free(qd_iq_record* r) { delete r; }

size_t qd_iq_record_size(const qd_iq_record* r) { return r ? r->record.i_samples.size() : 0; }

const double* qd_iq_record_i(const qd_iq_record* r) { return r ? r->record.i_samples.data() : nullptr; }

const double* qd_iq_record_q(const qd_iq_record* r) { return r ? r->record.q_samples.data() : nullptr; }

qd_status qd_iq_variance(const qd_iq_record* r, double* var_i, double* var_q) {
    return guarded([&] {
        require(r && var_i && var_q, "null argument");
        const auto v = qdiode::iq_variance(r->record);
        *var_i = v.var_i;
        *var_q = v.var_q;
    });
}

qd_status qd_mirror_variance_vs_power(double p_dark_fwd, double p_dark_rev, const double* powers,
                                      size_t n, double sigma_w, uint64_t n_samples, uint64_t seed,
                                      double dwell_samples, int threads, qd_variance_row* rows) {
    return guarded([&] {
        require(n == 0 || (powers && rows), "null argument");
        for (double p : {p_dark_fwd, p_dark_rev})
            require(p >= 0.0 && p <= 1.0, "p_dark must lie in [0, 1]");
        qdiode::VarianceSweepOptions opts;
        opts.n_samples = n_samples;
        opts.seed = seed;
        opts.dwell_samples = dwell_samples;
        opts.threads = threads;
        const auto table = qdiode::variance_vs_power(p_dark_fwd, p_dark_rev, {powers, n}, sigma_w, opts);
        for (size_t k = 0; k < n; ++k) {
            const auto& t = table[k];
            rows[k] = {t.power, t.var_i_fwd, t.var_i_rev, t.var_q_fwd, t.var_q_rev,
                       t.var_i_fwd_analytic, t.var_i_rev_analytic};
        }
    });
}

}  // extern "C"
