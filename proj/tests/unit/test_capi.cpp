// Exercises the shared library strictly through its C header.

#include <cmath>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "qdiode/qdiode.h"

namespace {

const qd_qubit_params kIdeal{0.0, 1.0, 0.0, 0.0};
const qd_qubit_params kLossy{0.0, 1.0, 1e-3, 5e-4};

doctest::Approx rel(double v) { return doctest::Approx(v).scale(0.0); }

double cabs(qd_complex z) { return std::hypot(z.re, z.im); }

struct DiodeHandle {
    qd_diode* d = nullptr;
    ~DiodeHandle() { qd_diode_free(d); }
};

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(qd_version()).size() > 0);
    CHECK(std::string(qd_status_name(QD_OK)) == "ok");
    CHECK(std::string(qd_status_name(QD_ERR_INVALID_ARGUMENT)) == "invalid_argument");
    CHECK(std::string(qd_status_name(QD_ERR_SOLVER)) == "solver_error");
    CHECK(std::string(qd_status_name(QD_ERR_FIT)) == "fit_error");
    CHECK(std::string(qd_status_name(QD_ERR_INTERNAL)) == "internal_error");
}

TEST_CASE("invalid arguments return codes with a message") {
    qd_complex t{};
    const qd_qubit_params bad{0.0, -1.0, 0.0, 0.0};
    CHECK(qd_transmission_analytic(&bad, 0.0, {0.0, 0.0}, &t) == QD_ERR_INVALID_ARGUMENT);
    CHECK(std::string(qd_last_error()).find("gamma_r") != std::string::npos);
    CHECK(qd_transmission_analytic(nullptr, 0.0, {0.0, 0.0}, &t) == QD_ERR_INVALID_ARGUMENT);
    CHECK(qd_transmission_analytic(&kIdeal, 0.0, {0.0, 0.0}, nullptr) == QD_ERR_INVALID_ARGUMENT);

    qd_diode* d = nullptr;
    CHECK(qd_diode_create_optimal(&kIdeal, &kIdeal, 0.0, std::nan(""), &d) == QD_ERR_INVALID_ARGUMENT);
    CHECK(d == nullptr);
    CHECK(qd_diode_create(&kIdeal, &bad, 0.0, 3.0, &d) == QD_ERR_INVALID_ARGUMENT);
    CHECK(d == nullptr);
}

TEST_CASE("last error is per thread") {
    qd_complex t{};
    const qd_qubit_params bad{0.0, -1.0, 0.0, 0.0};
    REQUIRE(qd_transmission_analytic(&bad, 0.0, {0.0, 0.0}, &t) == QD_ERR_INVALID_ARGUMENT);
    std::string other = "unset";
    std::thread th([&] { other = qd_last_error(); });
    th.join();
    CHECK(other.empty());
    CHECK_FALSE(std::string(qd_last_error()).empty());
}

TEST_CASE("freeing null handles is allowed") {
    qd_diode_free(nullptr);
    qd_spectrum_free(nullptr);
    qd_iq_record_free(nullptr);
}

TEST_CASE("single-qubit transmission: closed form and steady state agree") {
    const qd_qubit_params q{0.3, 1.0, 0.05, 0.02};
    for (double p : {1e-4, 0.5, 3.0}) {
        const qd_complex alpha{std::sqrt(p), 0.0};
        qd_complex a{}, n{};
        REQUIRE(qd_transmission_analytic(&q, q.omega_q - 0.1, alpha, &a) == QD_OK);
        REQUIRE(qd_transmission_numeric(&q, 0.1, alpha, &n) == QD_OK);
        CHECK(std::abs(a.re - n.re) < 1e-9);
        CHECK(std::abs(a.im - n.im) < 1e-9);
    }
}

TEST_CASE("single-qubit fit through the C API") {
    const qd_qubit_params truth{0.0, 2.0, 0.02, 0.01};
    std::vector<qd_sample> data;
    for (int k = 0; k < 101; ++k) {
        qd_sample s{};
        s.delta_omega = -8.0 + 16.0 * k / 100.0;
        s.has_complex = 1;
        REQUIRE(qd_transmission_analytic(&truth, s.delta_omega, {0.0, 0.0}, &s.t) == QD_OK);
        data.push_back(s);
    }
    qd_qubit_params init = truth;
    init.gamma_r = 2.3;
    qd_fit_report rep{};
    REQUIRE(qd_fit_single_qubit(data.data(), data.size(), {0.0, 0.0}, &init, QD_FIT_DECOHERENCE_SUM, &rep) == QD_OK);
    CHECK(rep.converged == 1);
    CHECK(std::abs(rep.params.gamma_r - 2.0) < 1e-6);
    CHECK(std::abs(rep.decoherence_sum - 0.04) < 1e-6);
    CHECK(qd_fit_single_qubit(data.data(), 3, {0.0, 0.0}, &init, QD_FIT_DECOHERENCE_SUM, &rep) != QD_OK);
}

TEST_CASE("optimal diode handle round trip") {
    DiodeHandle h;
    const qd_qubit_params q2{0.0, 1.2, 0.0, 0.0};
    REQUIRE(qd_diode_create_optimal(&kIdeal, &q2, 100.0, 0.05, &h.d) == QD_OK);
    CHECK(qd_diode_delta(h.d) == rel(0.05));
    CHECK(qd_diode_gamma_bar(h.d) == rel(std::sqrt(1.2)));
    qd_qubit_params a{}, b{};
    REQUIRE(qd_diode_get_qubits(h.d, &a, &b) == QD_OK);
    double w1 = 0.0, w2 = 0.0;
    REQUIRE(qd_optimal_tuning(100.0, 0.05, std::sqrt(1.2), &w1, &w2) == QD_OK);
    CHECK(a.omega_q == rel(w1));
    CHECK(b.omega_q == rel(w2));
    CHECK(b.gamma_r == 1.2);
}

TEST_CASE("diode transmission, steady state and efficiency are consistent") {
    DiodeHandle h;
    REQUIRE(qd_diode_create_optimal(&kLossy, &kLossy, 0.0, std::sqrt(1e-3), &h.d) == QD_OK);
    const double p = 1e-3;
    qd_operating_point op{};
    REQUIRE(qd_diode_operating_point(h.d, p, &op) == QD_OK);
    qd_complex tf{}, tr{};
    REQUIRE(qd_diode_transmission(h.d, p, QD_FORWARD, &tf) == QD_OK);
    REQUIRE(qd_diode_transmission(h.d, p, QD_REVERSE, &tr) == QD_OK);
    CHECK(std::abs(tf.re - op.t_forward.re) < 1e-12);
    CHECK(std::abs(tr.im - op.t_reverse.im) < 1e-12);
    CHECK(qd_efficiency(tf, tr) == rel(op.efficiency));
    CHECK(cabs(tf) > cabs(tr));

    qd_complex rho[16];
    REQUIRE(qd_diode_steady_state(h.d, p, QD_FORWARD, rho) == QD_OK);
    double trace = 0.0;
    for (int k = 0; k < 4; ++k) trace += rho[k * 4 + k].re;
    CHECK(trace == rel(1.0));
    // Dark population from the symmetric single-excitation block.
    const double dark = 0.5 * (rho[1 * 4 + 1].re + rho[2 * 4 + 2].re + rho[1 * 4 + 2].re + rho[2 * 4 + 1].re);
    CHECK(dark == rel(op.dark_population_forward));
    CHECK(qd_diode_steady_state(h.d, -1.0, QD_FORWARD, rho) == QD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("power sweep fills every row") {
    DiodeHandle h;
    REQUIRE(qd_diode_create_optimal(&kLossy, &kLossy, 0.0, 0.05, &h.d) == QD_OK);
    const std::vector<double> powers{1e-4, 1e-3, 1e-2, 1e-1};
    std::vector<qd_operating_point> rows(powers.size());
    std::vector<qd_status> status(powers.size(), QD_ERR_INTERNAL);
    REQUIRE(qd_diode_power_sweep(h.d, powers.data(), powers.size(), 2, rows.data(), status.data()) == QD_OK);
    for (std::size_t k = 0; k < powers.size(); ++k) {
        CHECK(status[k] == QD_OK);
        CHECK(rows[k].power == powers[k]);
        CHECK(rows[k].efficiency >= 0.0);
        CHECK(rows[k].efficiency <= 1.0);
    }
    double pbest = 0.0, ebest = 0.0;
    REQUIRE(qd_diode_optimal_power(h.d, 1e-5, 1.0, &pbest, &ebest) == QD_OK);
    for (const auto& r : rows) CHECK(ebest >= r.efficiency - 1e-9);
    const std::vector<double> descending{1e-2, 1e-3};
    CHECK(qd_diode_power_sweep(h.d, descending.data(), 2, 1, rows.data(), status.data()) == QD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("helper functions") {
    double phi = 0.0, delta = 0.0;
    REQUIRE(qd_phase_from_frequency(9.0, 10.0, &phi, &delta) == QD_OK);
    CHECK(phi == rel(0.9 * 3.14159265358979323846));
    CHECK(delta == rel(0.1 * 3.14159265358979323846));
    double gd = 0.0, gb = 0.0;
    REQUIRE(qd_dark_bright_rates(0.1, 2.0, 2.0, &gd, &gb) == QD_OK);
    CHECK(gd == rel(0.01));
    CHECK(gb == rel(4.0));
    CHECK(qd_predicted_linewidth(0.1, 2.0, 0.0, 0.0, 0.0) == rel(0.06));
    CHECK(qd_efficiency({1.0, 0.0}, {0.0, 0.0}) == rel(1.0));
    CHECK(qd_phase_from_frequency(1.0, 0.0, &phi, &delta) == QD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("spectrum handle exposes the PSD and fit") {
    DiodeHandle h;
    REQUIRE(qd_diode_create_optimal(&kIdeal, &kIdeal, 0.0, 0.1, &h.d) == QD_OK);
    double p = 0.0, e = 0.0;
    REQUIRE(qd_diode_optimal_power(h.d, 1e-6, 10.0, &p, &e) == QD_OK);
    std::vector<double> offsets;
    for (int k = 0; k < 401; ++k) offsets.push_back(-0.6 + 1.2 * k / 400.0);
    qd_spectrum* s = nullptr;
    REQUIRE(qd_spectrum_compute(h.d, p, QD_FORWARD, QD_TRANSMITTED, offsets.data(), offsets.size(), &s) == QD_OK);
    REQUIRE(qd_spectrum_size(s) == offsets.size());
    CHECK(qd_spectrum_offsets(s)[10] == offsets[10]);
    const double* psd = qd_spectrum_psd(s);
    double peak = 0.0;
    for (std::size_t k = 0; k < offsets.size(); ++k) peak = std::max(peak, psd[k]);
    CHECK(peak > 0.0);
    CHECK(qd_spectrum_integrated(s) > 0.0);
    CHECK(qd_spectrum_elastic_weight(s) + qd_spectrum_integrated(s) <= 1.01 * qd_spectrum_total_flux(s));
    qd_lorentzian fit{};
    REQUIRE(qd_spectrum_fit(s, &fit) == QD_OK);
    CHECK(fit.fwhm > 0.0);
    CHECK(fit.converged == 1);
    qd_spectrum_free(s);

    // Undriven: flat zero spectrum cannot be fitted.
    REQUIRE(qd_spectrum_compute(h.d, 0.0, QD_FORWARD, QD_TRANSMITTED, offsets.data(), offsets.size(), &s) == QD_OK);
    CHECK(qd_spectrum_fit(s, &fit) == QD_ERR_FIT);
    qd_spectrum_free(s);
}

TEST_CASE("mirror record through the C API") {
    qd_mirror_model m{0.5, {2.0, 0.0}, 0.0, 1u << 16, 9, 0, 0.0};
    qd_iq_record* r = nullptr;
    REQUIRE(qd_mirror_simulate(&m, &r) == QD_OK);
    REQUIRE(qd_iq_record_size(r) == (1u << 16));
    double vi = 0.0, vq = 0.0;
    REQUIRE(qd_iq_variance(r, &vi, &vq) == QD_OK);
    CHECK(std::abs(vi - 1.0) < 0.01);
    CHECK(vq == 0.0);
    qd_iq_record* r2 = nullptr;
    REQUIRE(qd_mirror_simulate(&m, &r2) == QD_OK);
    CHECK(std::memcmp(qd_iq_record_i(r), qd_iq_record_i(r2), sizeof(double) * qd_iq_record_size(r)) == 0);
    CHECK(std::memcmp(qd_iq_record_q(r), qd_iq_record_q(r2), sizeof(double) * qd_iq_record_size(r)) == 0);
    qd_iq_record_free(r);
    qd_iq_record_free(r2);

    m.p_dark = 2.0;
    CHECK(qd_mirror_simulate(&m, &r) == QD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("variance sweep through the C API") {
    const std::vector<double> powers{0.0, 1.0, 2.0};
    std::vector<qd_variance_row> rows(powers.size());
    REQUIRE(qd_mirror_variance_vs_power(0.6, 0.0, powers.data(), powers.size(), 1.0, 1u << 16, 4, 0.0, 2,
                                        rows.data()) == QD_OK);
    for (std::size_t k = 0; k < powers.size(); ++k) {
        CHECK(rows[k].power == powers[k]);
        CHECK(rows[k].var_i_fwd_analytic == rel(1.0 + 0.24 * powers[k]));
        CHECK(rows[k].var_i_rev_analytic == rel(1.0));
    }
    CHECK(qd_mirror_variance_vs_power(0.6, 0.0, powers.data(), powers.size(), -1.0, 16, 4, 0.0, 1, rows.data()) ==
          QD_ERR_INVALID_ARGUMENT);
}
