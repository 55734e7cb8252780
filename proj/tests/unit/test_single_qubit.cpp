#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "qdiode/core/error.hpp"
#include "qdiode/core/least_squares.hpp"

using namespace qdiode;

namespace {

DriveConfig forward(double omega_d, double power) {
    DriveConfig d;
    d.omega_d = omega_d;
    d.alpha = Complex(std::sqrt(power), 0.0);
    return d;
}

// Samples on detunings measured against `reference`, which defaults to q.omega_q.
std::vector<TransmissionSample> curve(const QubitParams& q, Complex alpha, int n, double half_span,
                                      std::optional<double> reference = std::nullopt) {
    const double offset = q.omega_q - reference.value_or(q.omega_q);
    std::vector<TransmissionSample> data;
    for (int k = 0; k < n; ++k) {
        const double x = -half_span + 2.0 * half_span * k / (n - 1);
        data.push_back({x, transmission_analytic(q, x + offset, alpha), std::nullopt});
    }
    return data;
}

}  // namespace

TEST_CASE("lossless resonant weak drive is fully reflected") {
    const QubitParams q{0.0, 1.0, 0.0, 0.0};
    CHECK(std::abs(transmission_analytic(q, 0.0, {1e-9, 0.0})) < 1e-12);
}

TEST_CASE("strong drive saturates to full transmission") {
    const QubitParams q{0.0, 1.0, 0.01, 0.02};
    CHECK(std::abs(transmission_analytic(q, 0.0, {1e6, 0.0}) - 1.0) < 1e-9);
}

TEST_CASE("measured rates give strong extinction on resonance") {
    const auto q = qt::table_88_q2();
    const Complex t = transmission_analytic(q, 0.0, {0.0, 0.0});
    // Direct substitution: t = 1 - gamma_r / (2 gamma_2).
    CHECK(std::abs(t - (1.0 - q.gamma_r / (2.0 * q.gamma2()))) < 1e-15);
    CHECK(std::norm(t) < 0.004);
    CHECK(std::norm(t) == qt::approx(8.5e-6).epsilon(0.05));
}

TEST_CASE("transmission magnitude never exceeds one and is symmetric in detuning") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const QubitParams q{0.0, 0.1 + u(rng), u(rng), u(rng)};
        const double x = 10.0 * (u(rng) - 0.5);
        const Complex a(3.0 * u(rng), 0.0);
        CHECK(std::abs(transmission_analytic(q, x, a)) <= 1.0 + 1e-12);
        CHECK(std::abs(std::abs(transmission_analytic(q, x, a)) - std::abs(transmission_analytic(q, -x, a))) < 1e-14);
    }
}

TEST_CASE("QubitParams and DriveConfig validation") {
    CHECK_THROWS_AS(QubitParams({0.0, 0.0, 0.0, 0.0}).validate(), InvalidArgument);
    CHECK_THROWS_AS(QubitParams({0.0, 1.0, -1.0, 0.0}).validate(), InvalidArgument);
    CHECK_THROWS_AS(QubitParams({0.0, 1.0, 0.0, -1.0}).validate(), InvalidArgument);
    DriveConfig d;
    d.phi = 7.0;
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
    d.phi = 0.0;
    d.alpha = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
}

TEST_CASE("undriven qubit relaxes to the ground state") {
    const QubitParams q{5.0, 1.0, 0.1, 0.2};
    const auto rho = steady_state(build_single_qubit_liouvillian(q, DriveConfig{}));
    CHECK(trace_distance(rho, DensityOperator::basis(2, 0)) < 1e-12);
}

TEST_CASE("strong resonant drive saturates the excited population at one half"
          * doctest::test_suite("known-red")) {
    const QubitParams q{0.0, 1.0, 0.0, 0.0};
    const auto rho = steady_state(build_single_qubit_liouvillian(q, forward(0.0, 100.0)));
    CHECK(std::abs(rho(1, 1).real() - 0.5) < 1e-3);
}

TEST_CASE("resonant excited population follows the saturation law") {
    // P_e = s / (2 (1 + s)) with s = 2 |alpha|^2 gamma_r / (gamma_1 gamma_2).
    for (const QubitParams q : {QubitParams{0.0, 1.0, 0.0, 0.0}, QubitParams{0.0, 1.0, 0.2, 0.1}}) {
        for (double power : {0.01, 1.0, 100.0}) {
            const auto rho = steady_state(build_single_qubit_liouvillian(q, forward(0.0, power)));
            const double s = 2.0 * power * q.gamma_r / (q.gamma1() * q.gamma2());
            CHECK(rho(1, 1).real() == qt::approx(s / (2.0 * (1.0 + s))).epsilon(1e-10));
        }
    }
}

TEST_CASE("steady-state transmission equals the closed form on a detuning x power grid") {
    const auto q0 = qt::table_86_q2();
    const double g2 = q0.gamma2();
    double worst = 0.0;
    for (int i = 0; i < 9; ++i) {
        const double x = -2.0 * g2 + 4.0 * g2 * i / 8.0;
        for (int j = 0; j < 7; ++j) {
            const double p = q0.gamma_r * std::pow(10.0, -3.0 + j);
            QubitParams q = q0;
            q.omega_q = 1000.0 * g2 + x;
            const DriveConfig d = forward(1000.0 * g2, p);
            const Complex num = transmission_numeric(q, d);
            const Complex ana = transmission_analytic(q, x, d.alpha);
            worst = std::max(worst, std::abs(num - ana));
        }
    }
    CHECK(worst < 1e-8);
    CHECK_THROWS_AS(transmission_numeric(q0, DriveConfig{}), InvalidArgument);
}

TEST_CASE("photon flux is conserved without non-radiative loss") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 25; ++k) {
        const QubitParams q{3.0 * (u(rng) - 0.5), 0.2 + u(rng), 0.0, 0.5 * u(rng)};
        DriveConfig d;
        d.alpha = std::polar(2.0 * u(rng), 6.0 * u(rng));
        d.beta = std::polar(2.0 * u(rng), 6.0 * u(rng));
        const auto out = single_qubit_outputs(q, d);
        const auto rho = steady_state(build_single_qubit_liouvillian(q, d));
        const double flux = (rho.expectation(out.a_out.adjoint() * out.a_out) +
                             rho.expectation(out.b_out.adjoint() * out.b_out)).real();
        const double in = std::norm(d.alpha) + std::norm(d.beta);
        CHECK(std::abs(flux - in) < 1e-8 * in);
    }
}

TEST_CASE("noiseless fit recovers the measured rates") {
    const QubitParams truth = qt::table_86_q2();
    QubitParams init = truth;
    init.gamma_r *= 1.2;
    init.gamma_nr *= 0.5;
    init.gamma_phi *= 0.5;
    init.omega_q = truth.omega_q + 0.05 * truth.gamma_r;
    const auto data = curve(truth, {0.0, 0.0}, 200, 6.0 * truth.gamma2(), init.omega_q);
    // Hold the true split so each rate is identifiable from the sum.
    init.gamma_phi = init.gamma_nr * truth.gamma_phi / truth.gamma_nr;
    const auto fit = fit_single_qubit(data, {0.0, 0.0}, init);
    CHECK(fit.converged);
    CHECK(fit.params.gamma_r == qt::approx(truth.gamma_r).epsilon(1e-3));
    CHECK(fit.decoherence_sum == qt::approx(truth.decoherence_sum()).epsilon(1e-3));
    CHECK(fit.params.gamma_nr == qt::approx(truth.gamma_nr).epsilon(1e-3));
    CHECK(fit.params.gamma_phi == qt::approx(truth.gamma_phi).epsilon(1e-3));
    CHECK(std::abs(fit.params.omega_q - truth.omega_q) < 1e-3 * truth.gamma_r);
    CHECK(fit.residual_norm < 1e-8);
}

TEST_CASE("fit on magnitude-only data") {
    const QubitParams truth = qt::table_86_q2();
    auto data = curve(truth, {0.0, 0.0}, 120, 5.0 * truth.gamma2());
    for (auto& s : data) {
        s.t_abs = std::abs(*s.t);
        s.t.reset();
    }
    QubitParams init = truth;
    init.gamma_r *= 0.9;
    init.gamma_nr *= 1.5;
    init.gamma_phi *= 1.5;
    const auto fit = fit_single_qubit(data, {0.0, 0.0}, init);
    CHECK(fit.params.gamma_r == qt::approx(truth.gamma_r).epsilon(1e-3));
    CHECK(fit.decoherence_sum == qt::approx(truth.decoherence_sum()).epsilon(1e-2));
}

TEST_CASE("fitting the fitter's own curve is idempotent") {
    const QubitParams truth = qt::table_86_q2();
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    auto data = curve(truth, {0.0, 0.0}, 200, 6.0 * truth.gamma2());
    for (auto& s : data) *s.t *= Complex(1.0 + 0.01 * n(rng), 0.01 * n(rng));
    const auto first = fit_single_qubit(data, {0.0, 0.0}, truth);
    // Best-fit curve on the same abscissae, centred where the first fit put it.
    const double shift = first.params.omega_q - truth.omega_q;
    std::vector<TransmissionSample> own;
    for (const auto& s : data)
        own.push_back({s.delta_omega, transmission_analytic(first.params, s.delta_omega + shift, {0.0, 0.0}), std::nullopt});
    const auto second = fit_single_qubit(own, {0.0, 0.0}, truth);
    CHECK(second.residual_norm < 1e-8);
    CHECK(std::abs(second.params.omega_q - first.params.omega_q) < 1e-6 * truth.gamma_r);
    CHECK(second.params.gamma_r == qt::approx(first.params.gamma_r).epsilon(1e-6));
    CHECK(second.decoherence_sum == qt::approx(first.decoherence_sum).epsilon(1e-5));
}

TEST_CASE("separate-rate mode fits four parameters from multi-power data") {
    const QubitParams truth{0.0, 1.0, 0.05, 0.08};
    std::vector<TransmissionSample> data;
    // A single drive strength; the saturation term separates gamma_1 from gamma_2.
    const Complex alpha(0.6, 0.0);
    data = curve(truth, alpha, 150, 5.0);
    QubitParams init{0.0, 1.1, 0.08, 0.05};
    FitOptions opts;
    opts.mode = FitMode::kSeparateRates;
    const auto fit = fit_single_qubit(data, alpha, init, opts);
    CHECK(fit.params.gamma_r == qt::approx(1.0).epsilon(1e-4));
    CHECK(fit.params.gamma_nr == qt::approx(0.05).epsilon(1e-3));
    CHECK(fit.params.gamma_phi == qt::approx(0.08).epsilon(1e-3));
    CHECK(fit.covariance.rows() == 4);
}

TEST_CASE("fit reports standard errors that shrink with more data") {
    const QubitParams truth = qt::table_86_q2();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    auto noisy = [&](int count) {
        auto d = curve(truth, {0.0, 0.0}, count, 6.0 * truth.gamma2());
        for (auto& s : d) *s.t *= Complex(1.0 + 0.01 * n(rng), 0.01 * n(rng));
        return d;
    };
    const auto small = fit_single_qubit(noisy(50), {0.0, 0.0}, truth);
    const auto large = fit_single_qubit(noisy(800), {0.0, 0.0}, truth);
    CHECK(small.standard_errors.gamma_r > 0.0);
    CHECK(large.standard_errors.gamma_r < small.standard_errors.gamma_r);
    CHECK(large.decoherence_sum_error < small.decoherence_sum_error);
}

TEST_CASE("fit preconditions") {
    const QubitParams q = qt::table_86_q2();
    const auto few = curve(q, {0.0, 0.0}, 5, 6.0 * q.gamma2());
    CHECK_THROWS_AS(fit_single_qubit(few, {0.0, 0.0}, q), FitError);

    const auto narrow = curve(q, {0.0, 0.0}, 50, 0.1 * q.gamma2());
    CHECK_THROWS_AS(fit_single_qubit(narrow, {0.0, 0.0}, q), FitError);

    std::vector<TransmissionSample> flat;
    for (int k = 0; k < 50; ++k) flat.push_back({-1e9 + 4e7 * k, std::nullopt, 1.0});
    CHECK_THROWS_WITH_AS(fit_single_qubit(flat, {0.0, 0.0}, q), doctest::Contains("unidentifiable"), FitError);

    std::vector<TransmissionSample> empty_sample(10);
    CHECK_THROWS_AS(fit_single_qubit(empty_sample, {0.0, 0.0}, q), FitError);
}

TEST_CASE("Levenberg-Marquardt solves a small nonlinear problem") {
    // Exponential decay y = a exp(-b x).
    std::vector<double> xs, ys;
    for (int k = 0; k < 30; ++k) {
        xs.push_back(0.1 * k);
        ys.push_back(2.0 * std::exp(-1.3 * 0.1 * k));
    }
    auto f = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(30);
        for (int k = 0; k < 30; ++k) r(k) = p(0) * std::exp(-p(1) * xs[k]) - ys[k];
        return r;
    };
    const auto res = levenberg_marquardt(f, Eigen::Vector2d(1.0, 0.5));
    CHECK(res.converged);
    CHECK(res.params(0) == qt::approx(2.0).epsilon(1e-8));
    CHECK(res.params(1) == qt::approx(1.3).epsilon(1e-8));
    CHECK(res.covariance().rows() == 2);

    auto bad = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(3, std::nan("")); };
    CHECK_THROWS_AS(levenberg_marquardt(bad, Eigen::Vector2d(1.0, 0.5)), FitError);
}
