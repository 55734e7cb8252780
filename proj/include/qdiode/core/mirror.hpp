#pragma once

// Two-state "flapping mirror": the diode either reflects (X = 0) or transmits
// (X = 1, probability p_dark) the coherent drive, and the detector adds white
// Gaussian noise. I = Re(alpha) X + w_I, Q = Im(alpha) X + w_Q.

#include <cstdint>
#include <span>
#include <vector>

#include "qdiode/core/operators.hpp"

namespace qdiode {

struct MirrorModel {
    double p_dark = 0.0;
    Complex alpha{1.0, 0.0};
    double sigma_w = 0.0;
    std::uint64_t n_samples = 1;
    std::uint64_t seed = 0;
    // RNG substream; distinct streams give independent records for one seed.
    std::uint64_t stream = 0;
    // Mean dwell time in samples. 0 draws X independently per sample; a
    // positive value makes X a two-state Markov chain with the same marginal.
    double dwell_samples = 0.0;

    void validate() const;
};

struct IQRecord {
    std::vector<double> i_samples;
    std::vector<double> q_samples;
    double sample_rate = 0.0;  // Hz, metadata only
};

IQRecord simulate_mirror(const MirrorModel& m);

// Same X process, reflected port: R = 1 - X.
IQRecord simulate_mirror_reflected(const MirrorModel& m);

struct IQVariance {
    double var_i = 0.0;
    double var_q = 0.0;
};
// Unbiased sample variances. Needs at least two samples.
IQVariance iq_variance(const IQRecord& r);
double iq_covariance(const IQRecord& r);

// <dI^2> = |alpha|^2 P (1 - P) + sigma_w^2 for real alpha.
double analytic_variance_i(double p_dark, Complex alpha, double sigma_w);
double analytic_variance_q(double p_dark, Complex alpha, double sigma_w);

struct VarianceRow {
    double power = 0.0;
    double var_i_fwd = 0.0;
    double var_i_rev = 0.0;
    double var_q_fwd = 0.0;
    double var_q_rev = 0.0;
    double var_i_fwd_analytic = 0.0;
    double var_i_rev_analytic = 0.0;
};

struct VarianceSweepOptions {
    std::uint64_t n_samples = 1u << 18;
    std::uint64_t seed = 0;
    double dwell_samples = 0.0;
    int threads = 1;
};

// Forward and reverse records at each power with alpha = sqrt(p). Power k
// uses substream 2k (forward) and 2k + 1 (reverse).
std::vector<VarianceRow> variance_vs_power(double p_dark_fwd, double p_dark_rev,
                                           std::span<const double> powers, double sigma_w,
                                           const VarianceSweepOptions& opts = {});

}  // namespace qdiode
