#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdiode/core/units.hpp"

namespace qdh {

using qdiode::Hertz;
using qdiode::RadPerSec;

enum class Mode { kFit, kSweepPower, kSweepFrequency, kSpectrum, kMirrorMc, kSteadyState };

std::optional<Mode> parse_mode(const std::string& name);
std::string mode_name(Mode m);

// Failure that maps to a process exit code; `key` names the offending config
// key when there is one.
class HarnessError : public std::runtime_error {
public:
    HarnessError(int exit_code, std::string kind, const std::string& message, std::string key = {})
        : std::runtime_error(message), exit_code_(exit_code), kind_(std::move(kind)), key_(std::move(key)) {}
    int exit_code() const { return exit_code_; }
    const std::string& kind() const { return kind_; }
    const std::string& key() const { return key_; }

private:
    int exit_code_;
    std::string kind_;
    std::string key_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitFit = 4;

HarnessError config_error(const std::string& message, const std::string& key = {});

struct QubitRates {
    RadPerSec gamma_r{0.0};
    RadPerSec gamma_nr{0.0};
    RadPerSec gamma_phi{0.0};
};

// Everything needed to build a diode. Qubit frequencies are empty for the
// optimal tuning.
struct DiodeSection {
    QubitRates q1;
    QubitRates q2;
    RadPerSec drive_freq{0.0};
    std::vector<double> delta_sq;             // one entry except in spectrum mode
    std::optional<RadPerSec> omega_pi;        // alternative to delta_sq
    std::optional<RadPerSec> q1_freq;
    std::optional<RadPerSec> q2_freq;
};

struct RunConfig {
    Mode mode = Mode::kSweepPower;
    std::uint64_t seed = 0;
    int threads = 1;
    std::filesystem::path base_dir;  // directory of the config file

    std::optional<DiodeSection> diode;

    // sweep-power
    double power_min = 1e-5;
    double power_max = 1e2;
    int power_points = 71;

    // sweep-frequency / steady-state drive, in units of sqrt(gamma_bar)
    double alpha_re = 0.0, alpha_im = 0.0, beta_re = 0.0, beta_im = 0.0;
    RadPerSec detuning_min{0.0};
    RadPerSec detuning_max{0.0};
    int detuning_points = 201;

    // spectrum
    std::optional<double> power_per_gammabar;
    std::string direction = "forward";
    std::string port = "transmitted";
    double span_per_linewidth = 10.0;
    int freq_points = 801;

    // mirror-mc
    std::optional<double> p_dark_fwd;
    std::optional<double> p_dark_rev;
    double mirror_power_min = 0.0;
    double mirror_power_max = 1.0;
    int mirror_power_points = 8;
    double sigma_w = 1.0;
    std::uint64_t n_samples = 1u << 18;
    double dwell_samples = 0.0;
    Hertz sample_rate{1e8};

    // fit
    std::filesystem::path data_csv;
    RadPerSec qubit_freq{0.0};
    QubitRates initial;
    double probe_power = 0.0;  // |alpha|^2 / gamma_r
    std::string fit_mode = "decoherence_sum";

    // Config with defaults filled, external units. Written into the manifest.
    nlohmann::ordered_json echo;
};

// Reads a config (or a previous run's manifest) for `mode`. Throws
// HarnessError with exit code 2 on any parse or schema problem.
RunConfig load_config(const std::filesystem::path& path, Mode mode);
RunConfig parse_config(const std::string& text, Mode mode, const std::filesystem::path& base_dir = {});

// Human-readable listing of the filled config; rates are also shown in MHz/kHz.
std::string describe(const RunConfig& c);

}  // namespace qdh
