#include "qdiode/core/diode.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "qdiode/core/error.hpp"
#include "qdiode/core/parallel.hpp"
#include "qdiode/core/units.hpp"

namespace qdiode {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOfLight = 299792458.0;  // m/s

double wrap_phase(double phi) {
    phi = std::fmod(phi, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    return phi;
}

bool is_zero(Complex z) { return z == Complex(0.0, 0.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

DiodeConfig DiodeConfig::from_drive(const QubitParams& q1, const QubitParams& q2,
                                    const DriveConfig& drive) {
    DiodeConfig c{q1, q2, drive, kPi - drive.phi};
    c.validate();
    return c;
}

void DiodeConfig::validate() const {
    q1.validate();
    q2.validate();
    drive.validate();
    if (std::abs(delta - (kPi - drive.phi)) > 1e-12)
        throw InvalidArgument("delta is inconsistent with the drive phase (delta = pi - phi)");
}

bool DiodeConfig::perturbative() const { return std::abs(delta) < 1.0; }

double DiodeConfig::gamma_bar() const { return std::sqrt(q1.gamma_r * q2.gamma_r); }

PhaseRelation phase_from_frequency(double omega_d, double omega_pi) {
    if (!(omega_d > 0.0) || !(omega_pi > 0.0))
        throw InvalidArgument("phase_from_frequency: frequencies must be positive");
    const double phi = kPi * omega_d / omega_pi;
    return {phi, kPi - phi};
}

double dispersive_phase(double f_hz, double f_c_hz, double d_m) {
    if (!(f_hz > f_c_hz)) throw InvalidArgument("dispersive_phase: frequency is below cutoff");
    const double ratio = f_c_hz / f_hz;
    return kTwoPi * f_hz * d_m / kSpeedOfLight * std::sqrt(1.0 - ratio * ratio);
}

Tuning optimal_tuning(double omega_d, double delta, double gamma_bar) {
    return {omega_d - delta * gamma_bar, omega_d};
}

DiodeConfig optimal_diode(const QubitParams& q1, const QubitParams& q2, double omega_d,
                          double delta) {
    DiodeConfig c;
    c.q1 = q1;
    c.q2 = q2;
    const auto tuning = optimal_tuning(omega_d, delta, std::sqrt(q1.gamma_r * q2.gamma_r));
    c.q1.omega_q = tuning.omega_1;
    c.q2.omega_q = tuning.omega_2;
    c.drive.omega_d = omega_d;
    c.drive.phi = wrap_phase(kPi - delta);
    c.delta = kPi - c.drive.phi;
    c.validate();
    return c;
}

DiodeConfig with_drive(const DiodeConfig& base, double power, Direction dir) {
    if (!(power >= 0.0) || !std::isfinite(power))
        throw InvalidArgument("drive power must be a finite, non-negative photon flux");
    DiodeConfig c = base;
    const Complex amp(std::sqrt(power), 0.0);
    c.drive.alpha = dir == Direction::kForward ? amp : Complex(0.0, 0.0);
    c.drive.beta = dir == Direction::kReverse ? amp : Complex(0.0, 0.0);
    return c;
}

// ---------------------------------------------------------------------------
// Master equation

DiodeOperators diode_operators(const DiodeConfig& c) {
    const ComplexMatrix id = ops::identity(4);
    const ComplexMatrix sm1 = ops::on_qubit(ops::sigma_minus(), 0);
    const ComplexMatrix sm2 = ops::on_qubit(ops::sigma_minus(), 1);
    const ComplexMatrix sz1 = ops::on_qubit(ops::sigma_z(), 0);
    const ComplexMatrix sz2 = ops::on_qubit(ops::sigma_z(), 1);

    const ComplexMatrix l1 = std::sqrt(c.q1.gamma_r / 2.0) * sm1;
    const ComplexMatrix l2 = std::sqrt(c.q2.gamma_r / 2.0) * sm2;
    const Complex a = c.drive.alpha;
    const Complex b = c.drive.beta;
    const Complex e = std::polar(1.0, c.drive.phi);
    const Complex minus_i_half(0.0, -0.5);

    const double w1 = c.q1.omega_q - c.drive.omega_d;
    const double w2 = c.q2.omega_q - c.drive.omega_d;

    ComplexMatrix h = -0.5 * w1 * sz1 - 0.5 * w2 * sz2;
    h += minus_i_half * (a * l1.adjoint() - std::conj(a) * l1);
    h += minus_i_half * (b * l2.adjoint() - std::conj(b) * l2);
    h += minus_i_half *
         (e * l2.adjoint() * (l1 + a * id) - std::conj(e) * (l1.adjoint() + std::conj(a) * id) * l2);
    h += minus_i_half *
         (e * l1.adjoint() * (l2 + b * id) - std::conj(e) * (l2.adjoint() + std::conj(b) * id) * l1);

    DiodeOperators out;
    out.a_out = (a * id + l1) * e + l2;
    out.b_out = (b * id + l2) * e + l1;
    // Remove rounding-level anti-Hermitian residue before the hermiticity check.
    out.hamiltonian = 0.5 * (h + h.adjoint());
    out.l1 = l1;
    out.l2 = l2;
    return out;
}

LiouvillianOperator build_diode_liouvillian(const DiodeConfig& c) {
    c.validate();
    const auto o = diode_operators(c);
    const ComplexMatrix sm1 = ops::on_qubit(ops::sigma_minus(), 0);
    const ComplexMatrix sm2 = ops::on_qubit(ops::sigma_minus(), 1);
    const ComplexMatrix sz1 = ops::on_qubit(ops::sigma_z(), 0);
    const ComplexMatrix sz2 = ops::on_qubit(ops::sigma_z(), 1);
    const std::array<Jump, 6> jumps{{
        {1.0, o.a_out},
        {1.0, o.b_out},
        {c.q1.gamma_nr, sm1},
        {c.q2.gamma_nr, sm2},
        {c.q1.gamma_phi, sz1},
        {c.q2.gamma_phi, sz2},
    }};
    return liouvillian_matrix(o.hamiltonian, jumps);
}

Complex transmission(const DiodeConfig& c, Direction dir) {
    const Complex a = c.drive.alpha;
    const Complex b = c.drive.beta;
    if (dir == Direction::kForward && (is_zero(a) || !is_zero(b)))
        throw InvalidArgument("forward transmission needs alpha != 0 and beta = 0");
    if (dir == Direction::kReverse && (is_zero(b) || !is_zero(a)))
        throw InvalidArgument("reverse transmission needs beta != 0 and alpha = 0");
    const auto rho = steady_state(build_diode_liouvillian(c));
    const auto o = diode_operators(c);
    return dir == Direction::kForward ? rho.expectation(o.a_out) / a
                                      : rho.expectation(o.b_out) / b;
}

double diode_efficiency(Complex t_f, Complex t_r) {
    const double f = std::abs(t_f);
    const double r = std::abs(t_r);
    if (f + r == 0.0) return 0.0;
    return f * (f - r) / (f + r);
}

DarkBrightRates dark_bright_rates(double delta, double gamma_r1, double gamma_r2) {
    const double gbar = std::sqrt(gamma_r1 * gamma_r2);
    return {0.5 * delta * delta * gbar, 2.0 * gbar};
}

ComplexVector symmetric_state() {
    ComplexVector v = ComplexVector::Zero(4);
    v(1) = v(2) = 1.0 / std::numbers::sqrt2;
    return v;
}

ComplexVector antisymmetric_state() {
    ComplexVector v = ComplexVector::Zero(4);
    v(1) = 1.0 / std::numbers::sqrt2;
    v(2) = -1.0 / std::numbers::sqrt2;
    return v;
}

double dark_state_population(const DensityOperator& rho) {
    if (rho.dim() != 4) throw InvalidArgument("dark_state_population needs a two-qubit state");
    const ComplexVector v = symmetric_state();
    return std::clamp((v.adjoint() * rho.matrix() * v)(0).real(), 0.0, 1.0);
}

double bright_state_population(const DensityOperator& rho) {
    if (rho.dim() != 4) throw InvalidArgument("bright_state_population needs a two-qubit state");
    const ComplexVector v = antisymmetric_state();
    return std::clamp((v.adjoint() * rho.matrix() * v)(0).real(), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Operating points and sweeps

DiodeOperatingPoint operating_point(const DiodeConfig& base, double power) {
    if (!(power > 0.0)) throw InvalidArgument("operating point needs a positive power");
    const DiodeConfig fwd = with_drive(base, power, Direction::kForward);
    const DiodeConfig rev = with_drive(base, power, Direction::kReverse);

    DiodeOperatingPoint op;
    op.power = power;
    op.rho_forward = steady_state(build_diode_liouvillian(fwd));
    op.rho_reverse = steady_state(build_diode_liouvillian(rev));
    op.t_forward = op.rho_forward.expectation(diode_operators(fwd).a_out) / fwd.drive.alpha;
    op.t_reverse = op.rho_reverse.expectation(diode_operators(rev).b_out) / rev.drive.beta;
    op.efficiency = diode_efficiency(op.t_forward, op.t_reverse);
    op.dark_population_forward = dark_state_population(op.rho_forward);
    op.dark_population_reverse = dark_state_population(op.rho_reverse);
    return op;
}

std::vector<SweepRow> power_sweep(const DiodeConfig& base, std::span<const double> powers,
                                  int threads) {
    base.validate();
    if (!std::is_sorted(powers.begin(), powers.end()))
        throw InvalidArgument("power_sweep: powers must be sorted ascending");
    std::vector<SweepRow> rows(powers.size());
    parallel_for(powers.size(), threads, [&](std::size_t i) {
        rows[i].power = powers[i];
        try {
            rows[i].point = operating_point(base, powers[i]);
        } catch (const Error& e) {
            rows[i].error = e.what();
        }
    });
    return rows;
}

OptimalPower optimal_power(const DiodeConfig& base, double p_lo, double p_hi, int scan_points) {
    if (!(p_lo > 0.0) || !(p_hi > p_lo) || scan_points < 3)
        throw InvalidArgument("optimal_power: need 0 < p_lo < p_hi and at least 3 scan points");
    const double lo = std::log(p_lo);
    const double hi = std::log(p_hi);
    const double step = (hi - lo) / (scan_points - 1);

    int best = 0;
    double best_eff = -2.0;
    for (int k = 0; k < scan_points; ++k) {
        const double eff = operating_point(base, std::exp(lo + k * step)).efficiency;
        if (eff > best_eff) {
            best_eff = eff;
            best = k;
        }
    }
    const double a = lo + std::max(best - 1, 0) * step;
    const double b = lo + std::min(best + 1, scan_points - 1) * step;
    auto negative_eff = [&](double log_p) {
        return -operating_point(base, std::exp(log_p)).efficiency;
    };
    const auto [log_p, neg] = boost::math::tools::brent_find_minima(negative_eff, a, b, 40);
    if (-neg >= best_eff) return {std::exp(log_p), -neg};
    return {std::exp(lo + best * step), best_eff};
}

}  // namespace qdiode
