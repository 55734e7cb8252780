#include "qdiode/core/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "qdiode/core/error.hpp"
#include "qdiode/core/least_squares.hpp"

namespace qdiode {

namespace {

constexpr double kPi = std::numbers::pi;

// Propagates x through exp(L tau) for every tau (ascending order internally)
// and records <vec(obs), exp(L tau) x>.
std::vector<Complex> propagate_and_project(const LiouvillianOperator& l, const ComplexVector& x,
                                           const ComplexVector& obs, std::span<const double> taus) {
    for (double t : taus)
        if (!(t >= 0.0)) throw InvalidArgument("correlation delays must be non-negative");
    std::vector<std::size_t> order(taus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return taus[a] < taus[b]; });

    std::vector<Complex> out(taus.size());
    ComplexVector v = x;
    double t_now = 0.0;
    for (auto idx : order) {
        const double dt = taus[idx] - t_now;
        if (dt > 0.0) {
            v = propagator(l, dt) * v;
            t_now = taus[idx];
        }
        out[idx] = obs.dot(v);
    }
    return out;
}

// Half-sided transform int_0^inf f(tau) exp(-i w tau) dtau with f linear
// between nodes and an exponential tail beyond the last node.
Complex half_sided_transform(std::span<const double> taus, std::span<const Complex> f, double w) {
    Complex acc(0.0, 0.0);
    for (std::size_t k = 1; k < taus.size(); ++k) {
        const double h = taus[k] - taus[k - 1];
        const Complex kk(0.0, -w * h);
        Complex w0, w1;
        if (std::abs(kk) < 1e-3) {
            w0 = 1.0 + kk / 2.0 + kk * kk / 6.0 + kk * kk * kk / 24.0;
            w1 = 0.5 + kk / 3.0 + kk * kk / 8.0 + kk * kk * kk / 30.0;
        } else {
            const Complex e = std::exp(kk);
            w0 = (e - 1.0) / kk;
            w1 = e * (1.0 / kk - 1.0 / (kk * kk)) + 1.0 / (kk * kk);
        }
        const Complex phase = std::polar(1.0, -w * taus[k - 1]);
        acc += h * phase * (f[k - 1] * (w0 - w1) + f[k] * w1);
    }
    const std::size_t n = taus.size();
    if (n >= 2 && std::abs(f[n - 1]) > 0.0 && std::abs(f[n - 2]) > 0.0) {
        const double h = taus[n - 1] - taus[n - 2];
        const Complex kappa = -std::log(f[n - 1] / f[n - 2]) / h;
        if (kappa.real() > 0.0)
            acc += f[n - 1] * std::polar(1.0, -w * taus[n - 1]) / (kappa + Complex(0.0, w));
    }
    return acc;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 1; k < x.size(); ++k) s += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
    return s;
}

}  // namespace

double SpectrumResult::integrated_inelastic() const { return trapezoid(freq_offsets, inelastic_psd); }

std::vector<Complex> two_time_correlation(const LiouvillianOperator& l, const DensityOperator& rho_ss,
                                          const ComplexMatrix& out_op, std::span<const double> taus) {
    if (out_op.rows() != rho_ss.dim()) throw InvalidArgument("output operator dimension mismatch");
    return propagate_and_project(l, vec(out_op * rho_ss.matrix()), vec(out_op), taus);
}

std::vector<Complex> two_time_correlation_reversed(const LiouvillianOperator& l,
                                                   const DensityOperator& rho_ss,
                                                   const ComplexMatrix& out_op,
                                                   std::span<const double> taus) {
    if (out_op.rows() != rho_ss.dim()) throw InvalidArgument("output operator dimension mismatch");
    const ComplexMatrix adj = out_op.adjoint();
    return propagate_and_project(l, vec(rho_ss.matrix() * adj), vec(adj), taus);
}

std::vector<double> correlation_taus(const LiouvillianOperator& l, const CorrelationGrid& grid) {
    if (!(grid.growth > 1.0) || !(grid.decay_lengths > 0.0) || !(grid.first_step_fraction > 0.0))
        throw InvalidArgument("invalid correlation grid settings");
    Eigen::ComplexEigenSolver<ComplexMatrix> es(l.matrix(), false);
    if (es.info() != Eigen::Success) throw SolverError("eigenvalues of the Liouvillian did not converge");
    const auto& ev = es.eigenvalues();
    const double fastest = ev.cwiseAbs().maxCoeff();
    if (!(fastest > 0.0)) throw SolverError("Liouvillian has no dynamics");
    double slowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        const double rate = -ev(k).real();
        if (rate > 1e-10 * fastest) slowest = std::min(slowest, rate);
    }
    if (!std::isfinite(slowest)) throw SolverError("Liouvillian has no decaying modes");

    const double tau_max = grid.decay_lengths / slowest;
    std::vector<double> taus{0.0};
    for (double t = grid.first_step_fraction / fastest; t < tau_max; t *= grid.growth) taus.push_back(t);
    taus.push_back(tau_max);
    return taus;
}

SpectrumResult inelastic_spectrum(const LiouvillianOperator& l, const DensityOperator& rho_ss,
                                  const ComplexMatrix& out_op, std::span<const double> freq_offsets,
                                  const SpectrumOptions& opts) {
    if (out_op.rows() != rho_ss.dim() || l.hilbert_dim() != rho_ss.dim())
        throw InvalidArgument("spectrum: dimension mismatch");
    SpectrumResult s;
    const Complex mean = rho_ss.expectation(out_op);
    s.elastic_weight = std::norm(mean);
    s.total_flux = rho_ss.expectation(out_op.adjoint() * out_op).real();
    s.freq_offsets.assign(freq_offsets.begin(), freq_offsets.end());
    s.inelastic_psd.assign(freq_offsets.size(), 0.0);

    const auto taus = correlation_taus(l, opts.grid);
    // Connected correlation: propagate A rho - <A> rho so the integrand decays to zero.
    const ComplexMatrix x = out_op * rho_ss.matrix() - mean * rho_ss.matrix();
    const auto f = propagate_and_project(l, vec(x), vec(out_op), taus);

    std::vector<Complex> f_rev;
    if (opts.compute_imaginary_residue) {
        const ComplexMatrix adj = out_op.adjoint();
        const ComplexMatrix y = rho_ss.matrix() * adj - std::conj(mean) * rho_ss.matrix();
        f_rev = propagate_and_project(l, vec(y), vec(adj), taus);
    }

    double residue = 0.0;
    for (std::size_t k = 0; k < freq_offsets.size(); ++k) {
        const double w = freq_offsets[k];
        const Complex pos = half_sided_transform(taus, f, w);
        s.inelastic_psd[k] = pos.real() / kPi;
        if (opts.compute_imaginary_residue) {
            // Negative delays: int_0^inf g(-s) exp(+i w s) ds.
            const Complex neg = half_sided_transform(taus, f_rev, -w);
            residue = std::max(residue, std::abs((pos + neg).imag()) / (2.0 * kPi));
        }
    }
    if (opts.compute_imaginary_residue) s.imaginary_residue = residue;
    if (opts.fit_lorentzian) {
        try {
            s.fitted = fit_lorentzian(s);
        } catch (const FitError&) {
            s.fitted.reset();
        }
    }
    return s;
}

ComplexMatrix output_operator(const DiodeConfig& c, Direction dir, Port port) {
    const auto o = diode_operators(c);
    const bool right_moving = (dir == Direction::kForward) == (port == Port::kTransmitted);
    return right_moving ? o.a_out : o.b_out;
}

SpectrumResult psd(const DiodeConfig& c, Direction dir, Port port,
                   std::span<const double> freq_offsets, const SpectrumOptions& opts) {
    c.validate();
    const Complex other = dir == Direction::kForward ? c.drive.beta : c.drive.alpha;
    if (other != Complex(0.0, 0.0))
        throw InvalidArgument("psd: drive must come from the requested direction only");

    const auto l = build_diode_liouvillian(c);
    const auto rho = steady_state(l);
    return inelastic_spectrum(l, rho, output_operator(c, dir, port), freq_offsets, opts);
}

// ---------------------------------------------------------------------------
// Lorentzian fit

namespace {

std::vector<double> moving_average(std::span<const double> y, std::size_t window) {
    const std::size_t n = y.size();
    const std::size_t half = window / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i >= half ? i - half : 0;
        const std::size_t b = std::min(n - 1, i + half);
        double s = 0.0;
        for (std::size_t k = a; k <= b; ++k) s += y[k];
        out[i] = s / static_cast<double>(b - a + 1);
    }
    return out;
}

// Number of local maxima whose topographic prominence exceeds `threshold`.
int prominent_peaks(const std::vector<double>& y, double threshold) {
    const std::size_t n = y.size();
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || y[i] > y[i - 1];
        const bool right_ok = i + 1 == n || y[i] >= y[i + 1];
        if (!left_ok || !right_ok) continue;
        double left_min = y[i];
        for (std::size_t k = i; k-- > 0;) {
            if (y[k] > y[i]) break;
            left_min = std::min(left_min, y[k]);
        }
        double right_min = y[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            if (y[k] > y[i]) break;
            right_min = std::min(right_min, y[k]);
        }
        if (y[i] - std::max(left_min, right_min) >= threshold) ++count;
    }
    return count;
}

}  // namespace

LorentzianFit fit_lorentzian(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 5) throw FitError("Lorentzian fit needs at least 5 matching samples");

    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double y_lo = *lo_it;
    const double y_hi = *hi_it;
    if (!(y_hi > 0.0) || y_hi - y_lo <= 1e-12 * std::abs(y_hi))
        throw FitError("spectrum is flat");

    const std::size_t window = std::max<std::size_t>(3, (n / 40) | 1);
    const auto smooth = moving_average(y, window);
    const double s_lo = *std::min_element(smooth.begin(), smooth.end());
    const double s_hi = *std::max_element(smooth.begin(), smooth.end());
    if (prominent_peaks(smooth, 0.1 * (s_hi - s_lo)) != 1) throw FitError("spectrum is not unimodal");

    // Initial guess from the half-maximum crossings of the raw data.
    const std::size_t ipk = static_cast<std::size_t>(hi_it - y.begin());
    const double half = y_lo + 0.5 * (y_hi - y_lo);
    std::size_t a = ipk;
    while (a > 0 && y[a] > half) --a;
    std::size_t b = ipk;
    while (b + 1 < n && y[b] > half) ++b;
    const double spacing = (x[n - 1] - x[0]) / static_cast<double>(n - 1);
    const double width0 = std::max(x[b] - x[a], 2.0 * std::abs(spacing));

    // Work in units where the guessed width and the peak height are 1.
    const double xs = width0;
    const double ys = y_hi;
    const double x0 = x[ipk];
    auto model = [](double u, const Eigen::VectorXd& p) {
        const double w = std::exp(p(1));
        const double d = u - p(0);
        return p(2) * (w / (2.0 * kPi)) / (d * d + 0.25 * w * w) + p(3);
    };
    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k)
            r(static_cast<Eigen::Index>(k)) = model((x[k] - x0) / xs, p) - y[k] / ys;
        return r;
    };
    Eigen::VectorXd p0(4);
    const double base0 = y_lo / ys;
    p0 << 0.0, 0.0, (1.0 - base0) * kPi / 2.0, base0;

    const auto res = levenberg_marquardt(residuals, p0);
    LorentzianFit fit;
    fit.center = x0 + xs * res.params(0);
    fit.fwhm = xs * std::exp(res.params(1));
    fit.area = ys * xs * res.params(2);
    fit.baseline = ys * res.params(3);
    fit.residual_norm = ys * res.residual_norm();
    fit.converged = res.converged;
    return fit;
}

LorentzianFit fit_lorentzian(const SpectrumResult& s) {
    return fit_lorentzian(s.freq_offsets, s.inelastic_psd);
}

double predicted_linewidth(double delta, double gamma_bar, double gamma_nr, double gamma_phi,
                           double gamma_exc) {
    const double gamma_dark = 0.5 * delta * delta * gamma_bar;
    return 2.0 * (3.0 * gamma_dark + gamma_nr + 2.0 * gamma_phi) + gamma_exc;
}

std::vector<double> symmetric_grid(double half_span, int points) {
    if (!(half_span > 0.0) || points < 3) throw InvalidArgument("grid needs a positive span and >= 3 points");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k)
        g[static_cast<std::size_t>(k)] = -half_span + 2.0 * half_span * k / (points - 1);
    return g;
}

}  // namespace qdiode
