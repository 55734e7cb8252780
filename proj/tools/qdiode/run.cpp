#include "run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qdiode/qdiode.h"

namespace qdh {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;

void check(qd_status s) {
    switch (s) {
        case QD_OK: return;
        case QD_ERR_INVALID_ARGUMENT: throw HarnessError(kExitConfig, "invalid_argument", qd_last_error());
        case QD_ERR_SOLVER: throw HarnessError(kExitSolver, "solver_error", qd_last_error());
        case QD_ERR_FIT: throw HarnessError(kExitFit, "fit_error", qd_last_error());
        default: throw HarnessError(kExitInternal, "internal_error", qd_last_error());
    }
}

struct DiodeDeleter {
    void operator()(qd_diode* d) const { qd_diode_free(d); }
};
struct SpectrumDeleter {
    void operator()(qd_spectrum* s) const { qd_spectrum_free(s); }
};
using DiodePtr = std::unique_ptr<qd_diode, DiodeDeleter>;
using SpectrumPtr = std::unique_ptr<qd_spectrum, SpectrumDeleter>;

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double hz(double rad_per_s) { return qdiode::to_hertz(RadPerSec{rad_per_s}).value; }

class Writer {
public:
    Writer(fs::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {}

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw HarnessError(kExitInternal, "io_error", "cannot write " + (dir_ / name).string());
        f << content;
        if (!f) throw HarnessError(kExitInternal, "io_error", "write failed for " + (dir_ / name).string());
        result_.outputs.push_back(name);
    }

private:
    fs::path dir_;
    RunResult& result_;
};

qd_qubit_params qubit(const QubitRates& r, double omega_q = 0.0) {
    return {omega_q, r.gamma_r.value, r.gamma_nr.value, r.gamma_phi.value};
}

struct Geometry {
    double delta = 0.0;
    double phi = 0.0;
};

// Propagation phase and delta at drive frequency omega_d.
Geometry geometry(const DiodeSection& d, double omega_d, std::size_t delta_index = 0) {
    Geometry g;
    if (d.omega_pi) {
        check(qd_phase_from_frequency(omega_d, d.omega_pi->value, &g.phi, &g.delta));
    } else {
        g.delta = std::sqrt(d.delta_sq.at(delta_index));
        g.phi = kPi - g.delta;
    }
    return g;
}

double gamma_bar(const DiodeSection& d) { return std::sqrt(d.q1.gamma_r.value * d.q2.gamma_r.value); }

// Diode with the configured tuning, driven at omega_d. Without explicit qubit
// frequencies the optimal tuning for the carrier drive_freq is used.
DiodePtr make_diode(const DiodeSection& d, double omega_d, std::size_t delta_index = 0) {
    const Geometry g = geometry(d, omega_d, delta_index);
    double w1 = 0.0, w2 = 0.0;
    if (d.q1_freq) {
        w1 = d.q1_freq->value;
        w2 = d.q2_freq->value;
    } else {
        const Geometry carrier = geometry(d, d.drive_freq.value, delta_index);
        check(qd_optimal_tuning(d.drive_freq.value, carrier.delta, gamma_bar(d), &w1, &w2));
    }
    const auto q1 = qubit(d.q1, w1);
    const auto q2 = qubit(d.q2, w2);
    qd_diode* raw = nullptr;
    check(qd_diode_create(&q1, &q2, omega_d, g.phi, &raw));
    return DiodePtr(raw);
}

double dark_population(const qd_complex rho[16]) {
    // <+|rho|+> with |+> = (|ge> + |eg>)/sqrt(2); column-major storage.
    return 0.5 * (rho[4 * 1 + 1].re + rho[4 * 2 + 2].re + rho[4 * 2 + 1].re + rho[4 * 1 + 2].re);
}

double bright_population(const qd_complex rho[16]) {
    return 0.5 * (rho[4 * 1 + 1].re + rho[4 * 2 + 2].re - rho[4 * 2 + 1].re - rho[4 * 1 + 2].re);
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1);
    return v;
}

std::vector<double> logspace(double a, double b, int n) {
    auto v = linspace(std::log10(a), std::log10(b), n);
    for (auto& x : v) x = std::pow(10.0, x);
    v.front() = a;
    v.back() = b;
    return v;
}

struct Drive {
    double power_per_gammabar = 0.0;
    qd_direction dir = QD_FORWARD;
};

Drive drive_of(const RunConfig& c) {
    const bool fwd = c.alpha_re != 0.0 || c.alpha_im != 0.0;
    const double re = fwd ? c.alpha_re : c.beta_re;
    const double im = fwd ? c.alpha_im : c.beta_im;
    return {re * re + im * im, fwd ? QD_FORWARD : QD_REVERSE};
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

// ---------------------------------------------------------------------------

void run_sweep_power(const RunConfig& c, Writer& w, RunResult& res) {
    const auto& d = *c.diode;
    const auto diode = make_diode(d, d.drive_freq.value);
    const double gbar = qd_diode_gamma_bar(diode.get());
    const auto grid = logspace(c.power_min, c.power_max, c.power_points);
    std::vector<double> powers(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) powers[k] = grid[k] * gbar;

    std::vector<qd_operating_point> rows(grid.size());
    std::vector<qd_status> status(grid.size());
    check(qd_diode_power_sweep(diode.get(), powers.data(), powers.size(), c.threads, rows.data(),
                               status.data()));

    std::ostringstream csv;
    csv << "p_per_gammabar,t_fwd_abs,t_fwd_arg,t_rev_abs,t_rev_arg,efficiency,dark_pop_fwd,dark_pop_rev\n";
    std::size_t failed = 0;
    double best = -1.0, best_p = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (status[k] != QD_OK) {
            ++failed;
            csv << num(grid[k]) << ",nan,nan,nan,nan,nan,nan,nan\n";
            continue;
        }
        csv << num(grid[k]) << ',' << num(std::hypot(r.t_forward.re, r.t_forward.im)) << ','
            << num(std::atan2(r.t_forward.im, r.t_forward.re)) << ','
            << num(std::hypot(r.t_reverse.re, r.t_reverse.im)) << ','
            << num(std::atan2(r.t_reverse.im, r.t_reverse.re)) << ',' << num(r.efficiency) << ','
            << num(r.dark_population_forward) << ',' << num(r.dark_population_reverse) << '\n';
        if (r.efficiency > best) {
            best = r.efficiency;
            best_p = grid[k];
        }
    }
    if (failed == rows.size()) throw HarnessError(kExitSolver, "solver_error", "every sweep row failed");
    w.write("sweep.csv", csv.str());
    res.summary["max_efficiency"] = best;
    res.summary["p_per_gammabar_at_max"] = best_p;
    res.summary["failed_rows"] = failed;
}

void run_sweep_frequency(const RunConfig& c, Writer& w, RunResult&) {
    const auto& d = *c.diode;
    const Drive drive = drive_of(c);
    const double gbar = gamma_bar(d);
    const auto detunings = linspace(c.detuning_min.value, c.detuning_max.value, c.detuning_points);

    std::ostringstream csv;
    csv << "detuning_hz,t_abs,t_arg,t_real,t_imag,dark_pop\n";
    for (double det : detunings) {
        const auto diode = make_diode(d, d.drive_freq.value + det);
        qd_complex t{};
        check(qd_diode_transmission(diode.get(), drive.power_per_gammabar * gbar, drive.dir, &t));
        qd_complex rho[16];
        check(qd_diode_steady_state(diode.get(), drive.power_per_gammabar * gbar, drive.dir, rho));
        csv << num(hz(det)) << ',' << num(std::hypot(t.re, t.im)) << ',' << num(std::atan2(t.im, t.re))
            << ',' << num(t.re) << ',' << num(t.im) << ',' << num(dark_population(rho)) << '\n';
    }
    w.write("sweep_frequency.csv", csv.str());
}

void run_steady_state(const RunConfig& c, Writer& w, RunResult& res) {
    const auto& d = *c.diode;
    const Drive drive = drive_of(c);
    const auto diode = make_diode(d, d.drive_freq.value);
    const double power = drive.power_per_gammabar * qd_diode_gamma_bar(diode.get());

    qd_complex t{};
    check(qd_diode_transmission(diode.get(), power, drive.dir, &t));
    qd_complex rho[16];
    check(qd_diode_steady_state(diode.get(), power, drive.dir, rho));

    ordered_json j;
    j["direction"] = drive.dir == QD_FORWARD ? "forward" : "reverse";
    j["power_per_gammabar"] = drive.power_per_gammabar;
    j["delta"] = qd_diode_delta(diode.get());
    j["transmission"] = {{"re", t.re}, {"im", t.im}, {"abs", std::hypot(t.re, t.im)},
                         {"arg", std::atan2(t.im, t.re)}};
    j["dark_population"] = dark_population(rho);
    j["bright_population"] = bright_population(rho);
    j["basis"] = {"gg", "ge", "eg", "ee"};
    ordered_json re = ordered_json::array(), im = ordered_json::array();
    for (int i = 0; i < 4; ++i) {
        ordered_json rr = ordered_json::array(), ri = ordered_json::array();
        for (int k = 0; k < 4; ++k) {
            rr.push_back(rho[4 * k + i].re);
            ri.push_back(rho[4 * k + i].im);
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    j["rho_real"] = re;
    j["rho_imag"] = im;
    w.write("steady_state.json", j.dump(2) + "\n");
    res.summary["transmission_abs"] = std::hypot(t.re, t.im);
}

void run_spectrum(const RunConfig& c, Writer& w, RunResult& res) {
    const auto& d = *c.diode;
    const qd_direction dir = c.direction == "forward" ? QD_FORWARD : QD_REVERSE;
    const qd_port port = c.port == "transmitted" ? QD_TRANSMITTED : QD_REFLECTED;
    ordered_json widths = ordered_json::array();

    for (std::size_t i = 0; i < d.delta_sq.size(); ++i) {
        const auto diode = make_diode(d, d.drive_freq.value, i);
        const double gbar = qd_diode_gamma_bar(diode.get());
        const double delta = qd_diode_delta(diode.get());

        double power = 0.0;
        if (c.power_per_gammabar) {
            power = *c.power_per_gammabar * gbar;
        } else {
            double eff = 0.0;
            check(qd_diode_optimal_power(diode.get(), 1e-5 * gbar, 1e2 * gbar, &power, &eff));
        }
        const double predicted = qd_predicted_linewidth(delta, gbar, d.q1.gamma_nr.value, d.q1.gamma_phi.value, 0.0);
        const auto offsets = linspace(-c.span_per_linewidth * predicted, c.span_per_linewidth * predicted, c.freq_points);

        qd_spectrum* raw = nullptr;
        check(qd_spectrum_compute(diode.get(), power, dir, port, offsets.data(), offsets.size(), &raw));
        const SpectrumPtr s(raw);

        // Per-Hz density: S_Hz(f) = 2 pi S(omega).
        const double* psd = qd_spectrum_psd(s.get());
        std::ostringstream csv;
        csv << "freq_offset_hz,psd\n";
        for (std::size_t k = 0; k < offsets.size(); ++k)
            csv << num(hz(offsets[k])) << ',' << num(psd[k] * 2.0 * kPi) << '\n';

        ordered_json meta;
        meta["delta_sq"] = d.delta_sq[i];
        meta["power_per_gammabar"] = power / gbar;
        meta["direction"] = c.direction;
        meta["port"] = c.port;
        meta["psd_units"] = "photons/s per Hz";
        meta["elastic_weight"] = qd_spectrum_elastic_weight(s.get());
        meta["total_flux"] = qd_spectrum_total_flux(s.get());
        meta["integrated_inelastic"] = qd_spectrum_integrated(s.get());
        meta["predicted_fwhm_hz"] = hz(predicted);
        qd_lorentzian fit{};
        const qd_status fs = qd_spectrum_fit(s.get(), &fit);
        if (fs == QD_OK) {
            meta["fit"] = {{"center_hz", hz(fit.center)},
                           {"fwhm_hz", hz(fit.fwhm)},
                           {"area", fit.area},
                           {"baseline_per_hz", fit.baseline * 2.0 * kPi},
                           {"residual_norm", fit.residual_norm},
                           {"converged", fit.converged != 0}};
            widths.push_back(hz(fit.fwhm));
        } else if (fs == QD_ERR_FIT) {
            meta["fit"] = nullptr;
            meta["fit_error"] = qd_last_error();
            widths.push_back(nullptr);
        } else {
            check(fs);
        }

        char name[64];
        std::snprintf(name, sizeof name, "spectrum_%02zu", i);
        w.write(std::string(name) + ".csv", csv.str());
        w.write(std::string(name) + ".json", meta.dump(2) + "\n");
    }
    res.summary["fitted_fwhm_hz"] = widths;
}

void run_mirror(const RunConfig& c, Writer& w, RunResult& res) {
    double pf = c.p_dark_fwd.value_or(-1.0);
    double pr = c.p_dark_rev.value_or(-1.0);
    if (!c.p_dark_fwd || !c.p_dark_rev) {
        // Dark populations from the diode model.
        const auto& d = *c.diode;
        const auto diode = make_diode(d, d.drive_freq.value);
        const double gbar = qd_diode_gamma_bar(diode.get());
        double power = 0.0;
        if (c.power_per_gammabar) {
            power = *c.power_per_gammabar * gbar;
        } else {
            double eff = 0.0;
            check(qd_diode_optimal_power(diode.get(), 1e-5 * gbar, 1e2 * gbar, &power, &eff));
        }
        qd_operating_point op{};
        check(qd_diode_operating_point(diode.get(), power, &op));
        if (!c.p_dark_fwd) pf = op.dark_population_forward;
        if (!c.p_dark_rev) pr = op.dark_population_reverse;
        res.summary["diode_power_per_gammabar"] = power / gbar;
    }

    const auto powers = linspace(c.mirror_power_min, c.mirror_power_max, c.mirror_power_points);
    std::vector<qd_variance_row> rows(powers.size());
    check(qd_mirror_variance_vs_power(pf, pr, powers.data(), powers.size(), c.sigma_w, c.n_samples, c.seed,
                                      c.dwell_samples, c.threads, rows.data()));

    std::ostringstream csv;
    csv << "# seed=" << c.seed << " p_dark_fwd=" << num(pf) << " p_dark_rev=" << num(pr)
        << " sigma_w=" << num(c.sigma_w) << " n_samples=" << c.n_samples
        << " sample_rate_hz=" << num(c.sample_rate.value) << '\n';
    csv << "power,var_i_fwd,var_i_rev,var_q_fwd,var_q_rev,var_i_fwd_analytic,var_i_rev_analytic\n";
    std::vector<double> x, yf, yr;
    for (const auto& r : rows) {
        csv << num(r.power) << ',' << num(r.var_i_fwd) << ',' << num(r.var_i_rev) << ',' << num(r.var_q_fwd)
            << ',' << num(r.var_q_rev) << ',' << num(r.var_i_fwd_analytic) << ',' << num(r.var_i_rev_analytic)
            << '\n';
        x.push_back(r.power);
        yf.push_back(r.var_i_fwd);
        yr.push_back(r.var_i_rev);
    }
    w.write("mirror.csv", csv.str());
    res.summary["p_dark_fwd"] = pf;
    res.summary["p_dark_rev"] = pr;
    res.summary["slope_i_fwd"] = slope(x, yf);
    res.summary["slope_i_rev"] = slope(x, yr);
}

// --- fit --------------------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto a = cell.find_first_not_of(" \t\r");
        const auto b = cell.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
    }
    return out;
}

double parse_cell(const std::string& s, const fs::path& file, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw HarnessError(kExitConfig, "data_error",
                           file.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'", "data_csv");
    }
}

std::vector<qd_sample> read_samples(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw HarnessError(kExitConfig, "config_error", "cannot open data file " + file.string(), "data_csv");
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        header = split_csv_line(line);
        break;
    }
    auto column = [&](const char* name) -> int {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return static_cast<int>(k);
        return -1;
    };
    const int ix = column("delta_omega_hz");
    const int ire = column("t_real");
    const int iim = column("t_imag");
    const int iab = column("t_abs");
    const bool complex_data = ire >= 0 && iim >= 0;
    if (ix < 0 || (!complex_data && iab < 0))
        throw HarnessError(kExitConfig, "data_error",
                           file.string() + ": header must contain delta_omega_hz and t_real,t_imag or t_abs",
                           "data_csv");

    std::vector<qd_sample> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw HarnessError(kExitConfig, "data_error",
                               file.string() + ":" + std::to_string(lineno) + ": wrong number of columns", "data_csv");
        qd_sample s{};
        s.delta_omega = qdiode::to_angular(Hertz{parse_cell(cells[static_cast<std::size_t>(ix)], file, lineno)}).value;
        if (complex_data) {
            s.has_complex = 1;
            s.t = {parse_cell(cells[static_cast<std::size_t>(ire)], file, lineno),
                   parse_cell(cells[static_cast<std::size_t>(iim)], file, lineno)};
        } else {
            s.t_abs = parse_cell(cells[static_cast<std::size_t>(iab)], file, lineno);
        }
        out.push_back(s);
    }
    return out;
}

void run_fit(const RunConfig& c, Writer& w, RunResult& res) {
    const fs::path file = c.data_csv.is_absolute() ? c.data_csv : c.base_dir / c.data_csv;
    const auto samples = read_samples(file);
    const qd_qubit_params initial = qubit(c.initial, c.qubit_freq.value);
    const qd_complex alpha{std::sqrt(c.probe_power * c.initial.gamma_r.value), 0.0};
    qd_fit_report rep{};
    check(qd_fit_single_qubit(samples.data(), samples.size(), alpha, &initial,
                              c.fit_mode == "separate_rates" ? QD_FIT_SEPARATE_RATES : QD_FIT_DECOHERENCE_SUM,
                              &rep));

    const double shift = rep.params.omega_q - c.qubit_freq.value;
    ordered_json j;
    j["fit_mode"] = c.fit_mode;
    j["n_samples"] = samples.size();
    j["gamma_r_hz"] = hz(rep.params.gamma_r);
    j["gamma_r_err_hz"] = hz(rep.standard_errors.gamma_r);
    j["decoherence_sum_hz"] = hz(rep.decoherence_sum);
    j["decoherence_sum_err_hz"] = hz(rep.decoherence_sum_error);
    j["gamma_nr_hz"] = hz(rep.params.gamma_nr);
    j["gamma_nr_err_hz"] = hz(rep.standard_errors.gamma_nr);
    j["gamma_phi_hz"] = hz(rep.params.gamma_phi);
    j["gamma_phi_err_hz"] = hz(rep.standard_errors.gamma_phi);
    j["qubit_freq_hz"] = hz(rep.params.omega_q);
    j["qubit_freq_err_hz"] = hz(rep.standard_errors.omega_q);
    j["center_shift_hz"] = hz(shift);
    j["residual_norm"] = rep.residual_norm;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged != 0;
    w.write("fit.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "delta_omega_hz,t_real,t_imag,t_abs\n";
    for (const auto& s : samples) {
        qd_complex t{};
        check(qd_transmission_analytic(&rep.params, s.delta_omega + shift, alpha, &t));
        csv << num(hz(s.delta_omega)) << ',' << num(t.re) << ',' << num(t.im) << ',' << num(std::hypot(t.re, t.im))
            << '\n';
    }
    w.write("fit_curve.csv", csv.str());
    res.summary["gamma_r_hz"] = j["gamma_r_hz"];
    res.summary["decoherence_sum_hz"] = j["decoherence_sum_hz"];
    if (!rep.converged) throw HarnessError(kExitFit, "fit_error", "fit did not converge; best estimate written to fit.json");
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json(const fs::path& file, const ordered_json& j) {
    std::ofstream f(file, std::ios::binary | std::ios::trunc);
    f << j.dump(2) << '\n';
}

}  // namespace

RunResult run(RunConfig config, const fs::path& out_dir, std::ostream& log) {
    RunResult res;
    const auto started = std::chrono::steady_clock::now();
    const std::string started_utc = utc_now();
    config.echo["seed"] = config.seed;
    config.echo["threads"] = config.threads;

    ordered_json error;
    try {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw HarnessError(kExitInternal, "io_error", "cannot create " + out_dir.string() + ": " + ec.message());
        log << describe(config);
        Writer w(out_dir, res);
        switch (config.mode) {
            case Mode::kFit: run_fit(config, w, res); break;
            case Mode::kSweepPower: run_sweep_power(config, w, res); break;
            case Mode::kSweepFrequency: run_sweep_frequency(config, w, res); break;
            case Mode::kSpectrum: run_spectrum(config, w, res); break;
            case Mode::kMirrorMc: run_mirror(config, w, res); break;
            case Mode::kSteadyState: run_steady_state(config, w, res); break;
        }
    } catch (const HarnessError& e) {
        res.exit_code = e.exit_code();
        error = {{"status", e.kind()}, {"exit_code", e.exit_code()}, {"message", e.what()}};
        if (!e.key().empty()) error["key"] = e.key();
    } catch (const std::exception& e) {
        res.exit_code = kExitInternal;
        error = {{"status", "internal_error"}, {"exit_code", kExitInternal}, {"message", e.what()}};
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    ordered_json manifest;
    manifest["tool"] = "qdiode";
    manifest["version"] = qd_version();
    manifest["mode"] = mode_name(config.mode);
    manifest["seed"] = config.seed;
    manifest["started_utc"] = started_utc;
    manifest["wall_time_s"] = wall;
    manifest["exit_code"] = res.exit_code;
    manifest["config"] = config.echo;
    manifest["outputs"] = res.outputs;
    manifest["summary"] = res.summary;
    if (!error.is_null()) {
        log << "error: " << error["message"].get<std::string>() << '\n';
        if (fs::is_directory(out_dir)) write_json(out_dir / "error.json", error);
    }
    if (fs::is_directory(out_dir)) write_json(out_dir / "manifest.json", manifest);
    return res;
}

}  // namespace qdh
