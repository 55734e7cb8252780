#pragma once

// One emitter in a bidirectional waveguide: SLH master equation, the closed
// form transmission amplitude, and the spectroscopic fitter.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdiode/core/operators.hpp"

namespace qdiode {

// All fields are angular frequencies (rad/s).
struct QubitParams {
    double omega_q = 0.0;
    double gamma_r = 0.0;
    double gamma_nr = 0.0;
    double gamma_phi = 0.0;

    double gamma1() const { return gamma_r + gamma_nr; }
    double gamma2() const { return 0.5 * gamma1() + gamma_phi; }
    // The combination a single low-power trace constrains.
    double decoherence_sum() const { return gamma_nr + 2.0 * gamma_phi; }

    // Throws InvalidArgument unless gamma_r > 0 and the other rates are >= 0.
    void validate() const;
};

// Coherent drive. |alpha|^2 and |beta|^2 are photon fluxes (1/s); alpha
// enters from the left (forward), beta from the right (reverse).
struct DriveConfig {
    double omega_d = 0.0;
    Complex alpha{0.0, 0.0};
    Complex beta{0.0, 0.0};
    double phi = 0.0;  // propagation phase between emitters, [0, 2pi)

    void validate() const;
};

// Closed-form transmission amplitude for a left drive; delta_omega = omega_q - omega_d.
Complex transmission_analytic(const QubitParams& q, double delta_omega, Complex alpha);

// Output-field operators a_out = sqrt(gamma_r/2) sigma_- + alpha (right-moving)
// and b_out = sqrt(gamma_r/2) sigma_- + beta (left-moving).
struct SingleQubitOutputs {
    ComplexMatrix a_out;
    ComplexMatrix b_out;
};

SingleQubitOutputs single_qubit_outputs(const QubitParams& q, const DriveConfig& d);

ComplexMatrix single_qubit_hamiltonian(const QubitParams& q, const DriveConfig& d);

// Master equation -i[H, .] + D[a_out] + D[b_out] + gamma_nr D[sigma_-]
// + (gamma_phi/2) D[sigma_z] in the frame rotating at omega_d. d.phi is unused.
LiouvillianOperator build_single_qubit_liouvillian(const QubitParams& q, const DriveConfig& d);

// Tr{a_out rho_ss} / alpha from the numerical steady state.
Complex transmission_numeric(const QubitParams& q, const DriveConfig& d);

// ---------------------------------------------------------------------------
// Spectroscopic fit

struct TransmissionSample {
    double delta_omega = 0.0;        // rad/s, relative to the reference frequency
    std::optional<Complex> t;        // complex amplitude, if measured
    std::optional<double> t_abs;     // magnitude-only alternative
};

enum class FitMode {
    // gamma_r, gamma_nr + 2 gamma_phi and the qubit frequency; the split of the
    // decoherence sum is held at the ratio of the initial guess.
    kDecoherenceSum,
    // gamma_r, gamma_nr, gamma_phi and the qubit frequency (multi-power data).
    kSeparateRates,
};

struct FitOptions {
    FitMode mode = FitMode::kDecoherenceSum;
    // |t| spread below this is rejected as carrying no resonance.
    double flatness_floor = 1e-6;
    int max_iterations = 200;
};

struct SingleQubitFit {
    QubitParams params;
    QubitParams standard_errors;   // per-field; omega_q error is the centre error
    double decoherence_sum = 0.0;
    double decoherence_sum_error = 0.0;
    double residual_norm = 0.0;
    Eigen::MatrixXd covariance;    // in the internal (log-rate) parameterization
    int iterations = 0;
    bool converged = false;
    std::string message;
};

// Sample x-values are detunings delta_omega_i measured against the reference
// qubit frequency initial.omega_q, so the model is evaluated at
// x_i + (omega_q - initial.omega_q). Every sample shares the drive amplitude alpha.
// Non-convergence is reported through the result, not thrown.
SingleQubitFit fit_single_qubit(std::span<const TransmissionSample> data, Complex alpha,
                                const QubitParams& initial, const FitOptions& opts = {});

}  // namespace qdiode
