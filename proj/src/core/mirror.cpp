#include "qdiode/core/mirror.hpp"

#include <cmath>

#include "qdiode/core/error.hpp"
#include "qdiode/core/parallel.hpp"
#include "qdiode/core/philox.hpp"

namespace qdiode {

void MirrorModel::validate() const {
    if (!(p_dark >= 0.0 && p_dark <= 1.0)) throw InvalidArgument("p_dark must lie in [0, 1]");
    if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) throw InvalidArgument("sigma_w must be >= 0");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
        throw InvalidArgument("alpha must be finite");
    if (n_samples == 0) throw InvalidArgument("n_samples must be positive");
    if (!(dwell_samples >= 0.0) || !std::isfinite(dwell_samples))
        throw InvalidArgument("dwell_samples must be >= 0");
}

namespace {

IQRecord simulate(const MirrorModel& m, bool reflected) {
    m.validate();
    PhiloxStream rng(m.seed, m.stream);
    IQRecord r;
    r.i_samples.resize(m.n_samples);
    r.q_samples.resize(m.n_samples);

    const bool markov = m.dwell_samples > 0.0;
    const double flip = markov ? -std::expm1(-1.0 / m.dwell_samples) : 0.0;
    bool x = rng.bernoulli(m.p_dark);
    for (std::uint64_t k = 0; k < m.n_samples; ++k) {
        if (markov) {
            if (k > 0) {
                const double u = rng.uniform();
                // Leave the current state with rate 1/dwell, land according to p_dark.
                if (x && u < flip * (1.0 - m.p_dark)) x = false;
                else if (!x && u < flip * m.p_dark) x = true;
            }
        } else if (k > 0) {
            x = rng.bernoulli(m.p_dark);
        }
        const double s = (x != reflected) ? 1.0 : 0.0;
        const double wi = m.sigma_w * rng.normal();
        const double wq = m.sigma_w * rng.normal();
        r.i_samples[k] = m.alpha.real() * s + wi;
        r.q_samples[k] = m.alpha.imag() * s + wq;
    }
    return r;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_covariance(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a);
    const double mb = mean(b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - ma) * (b[k] - mb);
    return s / static_cast<double>(a.size() - 1);
}

void check_record(const IQRecord& r) {
    if (r.i_samples.size() != r.q_samples.size()) throw InvalidArgument("I and Q lengths differ");
    if (r.i_samples.size() < 2) throw InvalidArgument("variance needs at least two samples");
}

}  // namespace

IQRecord simulate_mirror(const MirrorModel& m) { return simulate(m, false); }

IQRecord simulate_mirror_reflected(const MirrorModel& m) { return simulate(m, true); }

IQVariance iq_variance(const IQRecord& r) {
    check_record(r);
    return {sample_covariance(r.i_samples, r.i_samples), sample_covariance(r.q_samples, r.q_samples)};
}

double iq_covariance(const IQRecord& r) {
    check_record(r);
    return sample_covariance(r.i_samples, r.q_samples);
}

double analytic_variance_i(double p_dark, Complex alpha, double sigma_w) {
    return alpha.real() * alpha.real() * p_dark * (1.0 - p_dark) + sigma_w * sigma_w;
}

double analytic_variance_q(double p_dark, Complex alpha, double sigma_w) {
    return alpha.imag() * alpha.imag() * p_dark * (1.0 - p_dark) + sigma_w * sigma_w;
}

std::vector<VarianceRow> variance_vs_power(double p_dark_fwd, double p_dark_rev,
                                           std::span<const double> powers, double sigma_w,
                                           const VarianceSweepOptions& opts) {
    for (double p : powers)
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("powers must be finite and >= 0");
    std::vector<VarianceRow> rows(powers.size());
    parallel_for(powers.size(), opts.threads, [&](std::size_t k) {
        const double p = powers[k];
        MirrorModel m;
        m.alpha = Complex(std::sqrt(p), 0.0);
        m.sigma_w = sigma_w;
        m.n_samples = opts.n_samples;
        m.seed = opts.seed;
        m.dwell_samples = opts.dwell_samples;

        m.p_dark = p_dark_fwd;
        m.stream = 2 * k;
        const auto fwd = iq_variance(simulate_mirror(m));
        m.p_dark = p_dark_rev;
        m.stream = 2 * k + 1;
        const auto rev = iq_variance(simulate_mirror(m));

        rows[k] = {p,
                   fwd.var_i,
                   rev.var_i,
                   fwd.var_q,
                   rev.var_q,
                   analytic_variance_i(p_dark_fwd, m.alpha, sigma_w),
                   analytic_variance_i(p_dark_rev, m.alpha, sigma_w)};
    });
    return rows;
}

}  // namespace qdiode
