#pragma once

// Power spectral densities of the scattered fields. The elastic (coherent)
// part |<A>|^2 is kept as a scalar; the inelastic part is the half-sided
// transform of the connected two-time correlation of the output operator.

#include <optional>
#include <span>
#include <vector>

#include "qdiode/core/diode.hpp"
#include "qdiode/core/operators.hpp"

namespace qdiode {

enum class Port { kTransmitted, kReflected };

struct LorentzianFit {
    double center = 0.0;    // rad/s offset from the drive
    double fwhm = 0.0;      // rad/s
    double area = 0.0;      // photons/s
    double baseline = 0.0;  // photons/s per rad/s
    double residual_norm = 0.0;
    bool converged = false;
};

struct SpectrumResult {
    double elastic_weight = 0.0;          // |<A>|^2
    double total_flux = 0.0;              // <A^+ A>
    std::vector<double> freq_offsets;     // rad/s relative to omega_d
    std::vector<double> inelastic_psd;    // photons/s per rad/s
    std::optional<LorentzianFit> fitted;
    // max |Im| of the two-sided transform, only filled when requested.
    std::optional<double> imaginary_residue;

    // Trapezoidal integral of the inelastic PSD over the grid.
    double integrated_inelastic() const;
};

struct CorrelationGrid {
    // tau_max = decay_lengths / (slowest nonzero decay rate of L).
    double decay_lengths = 20.0;
    // First nonzero tau as a fraction of 1/(fastest rate of L).
    double first_step_fraction = 1e-3;
    // Ratio between consecutive tau nodes.
    double growth = 1.01;
};

struct SpectrumOptions {
    CorrelationGrid grid;
    bool fit_lorentzian = true;
    bool compute_imaginary_residue = false;
};

// g(tau) = Tr{A^+ exp(L tau)(A rho_ss)} for each tau >= 0 (any order).
std::vector<Complex> two_time_correlation(const LiouvillianOperator& l, const DensityOperator& rho_ss,
                                          const ComplexMatrix& out_op, std::span<const double> taus);

// <A^+(0) A(tau)> = Tr{A exp(L tau)(rho_ss A^+)}, i.e. g(-tau).
std::vector<Complex> two_time_correlation_reversed(const LiouvillianOperator& l,
                                                   const DensityOperator& rho_ss,
                                                   const ComplexMatrix& out_op,
                                                   std::span<const double> taus);

// Geometric tau nodes (starting at 0) adapted to the rates of L.
std::vector<double> correlation_taus(const LiouvillianOperator& l, const CorrelationGrid& grid);

// S(w) = (1/pi) Re int_0^inf (g(tau) - |<A>|^2) exp(-i w tau) dtau on the grid,
// so emission above the drive frequency appears at positive offsets.
SpectrumResult inelastic_spectrum(const LiouvillianOperator& l, const DensityOperator& rho_ss,
                                  const ComplexMatrix& out_op, std::span<const double> freq_offsets,
                                  const SpectrumOptions& opts = {});

// Output operator seen at `port` when the diode is driven from `dir`.
ComplexMatrix output_operator(const DiodeConfig& c, Direction dir, Port port);

// Spectrum of the chosen port. The drive in `c` must come from `dir` only
// (or be absent). The Lorentzian fit is attempted if requested; a failed fit
// leaves `fitted` empty.
SpectrumResult psd(const DiodeConfig& c, Direction dir, Port port,
                   std::span<const double> freq_offsets, const SpectrumOptions& opts = {});

// Least-squares Lorentzian plus constant baseline. Throws FitError on a flat
// or multimodal spectrum.
LorentzianFit fit_lorentzian(const SpectrumResult& s);
LorentzianFit fit_lorentzian(std::span<const double> x, std::span<const double> y);

// Full width of the dark-state emission line: 2 (3 gamma_D + gamma_nr + 2 gamma_phi)
// with gamma_D = delta^2 gamma_bar / 2, plus an optional technical offset.
double predicted_linewidth(double delta, double gamma_bar, double gamma_nr, double gamma_phi,
                           double gamma_exc = 0.0);

// Evenly spaced symmetric grid [-half_span, half_span].
std::vector<double> symmetric_grid(double half_span, int points);

}  // namespace qdiode
