#include "qdiode/core/single_qubit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "qdiode/core/error.hpp"
#include "qdiode/core/least_squares.hpp"
#include "qdiode/core/units.hpp"

namespace qdiode {

void QubitParams::validate() const {
    if (!std::isfinite(omega_q)) throw InvalidArgument("omega_q must be finite");
    if (!(gamma_r > 0.0) || !std::isfinite(gamma_r)) throw InvalidArgument("gamma_r must be > 0");
    if (!(gamma_nr >= 0.0) || !std::isfinite(gamma_nr)) throw InvalidArgument("gamma_nr must be >= 0");
    if (!(gamma_phi >= 0.0) || !std::isfinite(gamma_phi))
        throw InvalidArgument("gamma_phi must be >= 0");
}

void DriveConfig::validate() const {
    if (!std::isfinite(omega_d)) throw InvalidArgument("omega_d must be finite");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()) ||
        !std::isfinite(beta.real()) || !std::isfinite(beta.imag()))
        throw InvalidArgument("drive amplitudes must be finite");
    if (!(phi >= 0.0 && phi < kTwoPi)) throw InvalidArgument("phi must lie in [0, 2pi)");
}

Complex transmission_analytic(const QubitParams& q, double delta_omega, Complex alpha) {
    q.validate();
    const double g1 = q.gamma1();
    const double g2 = q.gamma2();
    const double x = delta_omega / g2;
    const double saturation = 2.0 * std::norm(alpha) * q.gamma_r / (g1 * g2);
    const Complex numerator(1.0, -x);
    return 1.0 - (q.gamma_r / (2.0 * g2)) * numerator / (1.0 + x * x + saturation);
}

SingleQubitOutputs single_qubit_outputs(const QubitParams& q, const DriveConfig& d) {
    const ComplexMatrix coupled = std::sqrt(q.gamma_r / 2.0) * ops::sigma_minus();
    const ComplexMatrix id = ops::identity(2);
    return {coupled + d.alpha * id, coupled + d.beta * id};
}

ComplexMatrix single_qubit_hamiltonian(const QubitParams& q, const DriveConfig& d) {
    const double delta_omega = q.omega_q - d.omega_d;
    const Complex amp = (d.alpha + d.beta) * std::sqrt(q.gamma_r / 2.0);
    const ComplexMatrix drive = amp * ops::sigma_plus();
    const Complex one_over_2i(0.0, -0.5);
    return -0.5 * delta_omega * ops::sigma_z() + one_over_2i * (drive - drive.adjoint());
}

LiouvillianOperator build_single_qubit_liouvillian(const QubitParams& q, const DriveConfig& d) {
    q.validate();
    if (!std::isfinite(d.omega_d) || !std::isfinite(std::abs(d.alpha)) ||
        !std::isfinite(std::abs(d.beta)))
        throw InvalidArgument("drive must be finite");
    const auto out = single_qubit_outputs(q, d);
    const std::array<Jump, 4> jumps{{
        {1.0, out.a_out},
        {1.0, out.b_out},
        {q.gamma_nr, ops::sigma_minus()},
        {0.5 * q.gamma_phi, ops::sigma_z()},
    }};
    return liouvillian_matrix(single_qubit_hamiltonian(q, d), jumps);
}

Complex transmission_numeric(const QubitParams& q, const DriveConfig& d) {
    if (d.alpha == Complex(0.0, 0.0)) throw InvalidArgument("transmission needs a nonzero alpha");
    const auto rho = steady_state(build_single_qubit_liouvillian(q, d));
    return rho.expectation(single_qubit_outputs(q, d).a_out) / d.alpha;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

struct Parameterization {
    FitMode mode;
    double omega_ref;
    double scale;        // rad/s, sets the size of the centre-shift coordinate
    double nr_fraction;  // gamma_nr / (gamma_nr + 2 gamma_phi) in kDecoherenceSum mode

    QubitParams decode(const Eigen::VectorXd& p) const {
        QubitParams q;
        q.gamma_r = std::exp(p(0));
        if (mode == FitMode::kDecoherenceSum) {
            const double sum = std::exp(p(1));
            q.gamma_nr = nr_fraction * sum;
            q.gamma_phi = 0.5 * (1.0 - nr_fraction) * sum;
            q.omega_q = omega_ref + scale * p(2);
        } else {
            q.gamma_nr = std::exp(p(1));
            q.gamma_phi = std::exp(p(2));
            q.omega_q = omega_ref + scale * p(3);
        }
        return q;
    }

    Eigen::VectorXd encode(const QubitParams& q) const {
        const double floor = 1e-4 * q.gamma_r;
        if (mode == FitMode::kDecoherenceSum) {
            Eigen::VectorXd p(3);
            p << std::log(q.gamma_r), std::log(std::max(q.decoherence_sum(), floor)),
                (q.omega_q - omega_ref) / scale;
            return p;
        }
        Eigen::VectorXd p(4);
        p << std::log(q.gamma_r), std::log(std::max(q.gamma_nr, floor)),
            std::log(std::max(q.gamma_phi, floor)), (q.omega_q - omega_ref) / scale;
        return p;
    }
};

double sample_magnitude(const TransmissionSample& s) {
    return s.t ? std::abs(*s.t) : *s.t_abs;
}

}  // namespace

SingleQubitFit fit_single_qubit(std::span<const TransmissionSample> data, Complex alpha,
                                const QubitParams& initial, const FitOptions& opts) {
    if (data.size() < 6) throw FitError("fit needs at least 6 samples");
    initial.validate();
    for (const auto& s : data) {
        if (!s.t && !s.t_abs) throw FitError("sample carries neither t nor |t|");
        if (!std::isfinite(s.delta_omega) || !std::isfinite(sample_magnitude(s)))
            throw FitError("sample is not finite");
    }

    const auto [xmin, xmax] = std::minmax_element(
        data.begin(), data.end(),
        [](const auto& a, const auto& b) { return a.delta_omega < b.delta_omega; });
    if (xmax->delta_omega - xmin->delta_omega <= initial.gamma2())
        throw FitError("samples span less than one linewidth");

    double mag_lo = std::numeric_limits<double>::infinity();
    double mag_hi = -mag_lo;
    for (const auto& s : data) {
        mag_lo = std::min(mag_lo, sample_magnitude(s));
        mag_hi = std::max(mag_hi, sample_magnitude(s));
    }
    if (mag_hi - mag_lo < opts.flatness_floor)
        throw FitError("unidentifiable: transmission is flat across the samples");

    const double sum0 = initial.decoherence_sum();
    const Parameterization par{opts.mode, initial.omega_q, initial.gamma_r,
                               sum0 > 0.0 ? initial.gamma_nr / sum0 : 0.5};

    Eigen::Index m = 0;
    for (const auto& s : data) m += s.t ? 2 : 1;

    auto residuals = [&](const Eigen::VectorXd& p) {
        const QubitParams q = par.decode(p);
        const double shift = q.omega_q - par.omega_ref;
        Eigen::VectorXd r(m);
        Eigen::Index k = 0;
        for (const auto& s : data) {
            const Complex model = transmission_analytic(q, s.delta_omega + shift, alpha);
            if (s.t) {
                r(k++) = model.real() - s.t->real();
                r(k++) = model.imag() - s.t->imag();
            } else {
                r(k++) = std::abs(model) - *s.t_abs;
            }
        }
        return r;
    };

    LeastSquaresOptions lso;
    lso.max_iterations = opts.max_iterations;
    const auto res = levenberg_marquardt(residuals, par.encode(initial), lso);

    SingleQubitFit fit;
    fit.params = par.decode(res.params);
    fit.decoherence_sum = fit.params.decoherence_sum();
    fit.residual_norm = res.residual_norm();
    fit.covariance = res.covariance();
    fit.iterations = res.iterations;
    fit.converged = res.converged;
    fit.message = res.message;

    if (fit.covariance.size() > 0) {
        const auto& c = fit.covariance;
        const auto sd = [&](Eigen::Index i) { return std::sqrt(std::max(c(i, i), 0.0)); };
        const QubitParams& q = fit.params;
        fit.standard_errors.gamma_r = q.gamma_r * sd(0);
        if (opts.mode == FitMode::kDecoherenceSum) {
            fit.decoherence_sum_error = fit.decoherence_sum * sd(1);
            fit.standard_errors.gamma_nr = par.nr_fraction * fit.decoherence_sum_error;
            fit.standard_errors.gamma_phi = 0.5 * (1.0 - par.nr_fraction) * fit.decoherence_sum_error;
            fit.standard_errors.omega_q = par.scale * sd(2);
        } else {
            fit.standard_errors.gamma_nr = q.gamma_nr * sd(1);
            fit.standard_errors.gamma_phi = q.gamma_phi * sd(2);
            fit.standard_errors.omega_q = par.scale * sd(3);
            const double var = q.gamma_nr * q.gamma_nr * c(1, 1) +
                               4.0 * q.gamma_phi * q.gamma_phi * c(2, 2) +
                               4.0 * q.gamma_nr * q.gamma_phi * c(1, 2);
            fit.decoherence_sum_error = std::sqrt(std::max(var, 0.0));
        }
    }
    return fit;
}

}  // namespace qdiode
