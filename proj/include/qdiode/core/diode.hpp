#pragma once

// Two emitters separated by a propagation phase phi = pi - delta, composed as
// a bidirectional SLH cascade. Forward drive (alpha) reaches qubit 1 first,
// reverse drive (beta) reaches qubit 2 first.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdiode/core/operators.hpp"
#include "qdiode/core/single_qubit.hpp"

namespace qdiode {

enum class Direction { kForward, kReverse };

struct DiodeConfig {
    QubitParams q1;
    QubitParams q2;
    DriveConfig drive;
    double delta = 0.0;  // pi - drive.phi, kept in sync by the factories below

    // Builds a config whose delta matches drive.phi.
    static DiodeConfig from_drive(const QubitParams& q1, const QubitParams& q2,
                                  const DriveConfig& drive);

    // Throws InvalidArgument on bad rates, bad phase or an inconsistent delta.
    void validate() const;
    // delta small enough for the quasi-dark-state expansions.
    bool perturbative() const;
    double gamma_bar() const;
};

// phi = pi * omega_d / omega_pi, delta = pi - phi.
struct PhaseRelation {
    double phi = 0.0;
    double delta = 0.0;
};
PhaseRelation phase_from_frequency(double omega_d, double omega_pi);

// TE10 propagation phase over a distance d (metres) at frequency f (Hz),
// cutoff f_c (Hz).
double dispersive_phase(double f_hz, double f_c_hz, double d_m);

// Qubit 2 resonant with the drive, qubit 1 pulled down by delta * gamma_bar.
struct Tuning {
    double omega_1 = 0.0;
    double omega_2 = 0.0;
};
Tuning optimal_tuning(double omega_d, double delta, double gamma_bar);

// Ideal-rate diode at the optimal tuning: qubit frequencies are overwritten,
// decay rates taken from q1/q2, phi = pi - delta wrapped into [0, 2pi), no drive.
DiodeConfig optimal_diode(const QubitParams& q1, const QubitParams& q2, double omega_d,
                          double delta);

// Copy of `base` driven from one side only with photon flux p (|amp|^2 = p).
DiodeConfig with_drive(const DiodeConfig& base, double power, Direction dir);

struct DiodeOperators {
    ComplexMatrix hamiltonian;  // H_T in the drive frame
    ComplexMatrix a_out;        // right-moving output
    ComplexMatrix b_out;        // left-moving output
    ComplexMatrix l1;
    ComplexMatrix l2;
};
DiodeOperators diode_operators(const DiodeConfig& c);

LiouvillianOperator build_diode_liouvillian(const DiodeConfig& c);

// <a_out>/alpha (forward) or <b_out>/beta (reverse). The drive must come from
// the requested side only.
Complex transmission(const DiodeConfig& c, Direction dir);

// |t_f| (|t_f| - |t_r|) / (|t_f| + |t_r|); 0 when both vanish.
double diode_efficiency(Complex t_f, Complex t_r);

struct DarkBrightRates {
    double gamma_dark = 0.0;    // delta^2 gamma_bar / 2
    double gamma_bright = 0.0;  // 2 gamma_bar
    // The quasi-dark decay rate as quoted in the main discussion, 2 * gamma_dark.
    double gamma_plus() const { return 2.0 * gamma_dark; }
};
DarkBrightRates dark_bright_rates(double delta, double gamma_r1, double gamma_r2);

// <+|rho|+> with |+> = (|ge> + |eg>)/sqrt(2).
double dark_state_population(const DensityOperator& rho);
// <-|rho|-> with |-> = (|ge> - |eg>)/sqrt(2).
double bright_state_population(const DensityOperator& rho);

ComplexVector symmetric_state();
ComplexVector antisymmetric_state();

struct DiodeOperatingPoint {
    double power = 0.0;
    Complex t_forward;
    Complex t_reverse;
    double efficiency = 0.0;
    DensityOperator rho_forward = DensityOperator::basis(4, 0);
    DensityOperator rho_reverse = DensityOperator::basis(4, 0);
    double dark_population_forward = 0.0;
    double dark_population_reverse = 0.0;
};

// Solves the forward- and reverse-driven steady states at photon flux p.
DiodeOperatingPoint operating_point(const DiodeConfig& base, double power);

struct SweepRow {
    double power = 0.0;
    std::optional<DiodeOperatingPoint> point;  // empty when the solve failed
    std::string error;
};

// One row per power (input order preserved). Rows run concurrently on up to
// `threads` workers; solver failures are recorded per row.
std::vector<SweepRow> power_sweep(const DiodeConfig& base, std::span<const double> powers,
                                  int threads = 1);

struct OptimalPower {
    double power = 0.0;
    double efficiency = 0.0;
};

// Efficiency-maximizing photon flux in [p_lo, p_hi]: log-spaced scan followed
// by Brent refinement around the best grid point.
OptimalPower optimal_power(const DiodeConfig& base, double p_lo, double p_hi,
                           int scan_points = 41);

}  // namespace qdiode
