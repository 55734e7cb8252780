#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qdh {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

enum ModeBit : unsigned {
    kFitBit = 1u << 0,
    kSweepPowerBit = 1u << 1,
    kSweepFreqBit = 1u << 2,
    kSpectrumBit = 1u << 3,
    kMirrorBit = 1u << 4,
    kSteadyBit = 1u << 5,
    kAllModes = 0x3fu,
    kDiodeModes = kSweepPowerBit | kSweepFreqBit | kSpectrumBit | kMirrorBit | kSteadyBit,
};

unsigned bit(Mode m) {
    switch (m) {
        case Mode::kFit: return kFitBit;
        case Mode::kSweepPower: return kSweepPowerBit;
        case Mode::kSweepFrequency: return kSweepFreqBit;
        case Mode::kSpectrum: return kSpectrumBit;
        case Mode::kMirrorMc: return kMirrorBit;
        case Mode::kSteadyState: return kSteadyBit;
    }
    return 0;
}

enum class Kind { kNumber, kInteger, kString, kNumberOrArray };

struct KeySpec {
    const char* name;
    Kind kind;
    unsigned modes;
    json fallback;  // null: no default
};

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> keys = {
        {"mode", Kind::kString, kAllModes, nullptr},
        {"seed", Kind::kInteger, kAllModes, 0},
        {"threads", Kind::kInteger, kAllModes, 1},

        {"q1_gamma_r_hz", Kind::kNumber, kDiodeModes, nullptr},
        {"q2_gamma_r_hz", Kind::kNumber, kDiodeModes, nullptr},
        {"gamma_nr_hz", Kind::kNumber, kDiodeModes, 0.0},
        {"gamma_phi_hz", Kind::kNumber, kDiodeModes, 0.0},
        {"drive_freq_hz", Kind::kNumber, kDiodeModes, 8.8e9},
        {"delta_sq", Kind::kNumberOrArray, kDiodeModes, nullptr},
        {"omega_pi_hz", Kind::kNumber, kDiodeModes, nullptr},
        {"q1_freq_hz", Kind::kNumber, kDiodeModes, nullptr},
        {"q2_freq_hz", Kind::kNumber, kDiodeModes, nullptr},

        {"power_min", Kind::kNumber, kSweepPowerBit, 1e-5},
        {"power_max", Kind::kNumber, kSweepPowerBit, 1e2},
        {"power_points", Kind::kInteger, kSweepPowerBit, 71},

        {"alpha_re", Kind::kNumber, kSweepFreqBit | kSteadyBit, 0.0},
        {"alpha_im", Kind::kNumber, kSweepFreqBit | kSteadyBit, 0.0},
        {"beta_re", Kind::kNumber, kSweepFreqBit | kSteadyBit, 0.0},
        {"beta_im", Kind::kNumber, kSweepFreqBit | kSteadyBit, 0.0},
        {"detuning_min_hz", Kind::kNumber, kSweepFreqBit, nullptr},
        {"detuning_max_hz", Kind::kNumber, kSweepFreqBit, nullptr},
        {"detuning_points", Kind::kInteger, kSweepFreqBit, 201},

        {"power_per_gammabar", Kind::kNumber, kSpectrumBit | kMirrorBit, nullptr},
        {"direction", Kind::kString, kSpectrumBit, "forward"},
        {"port", Kind::kString, kSpectrumBit, "transmitted"},
        {"span_per_linewidth", Kind::kNumber, kSpectrumBit, 10.0},
        {"freq_points", Kind::kInteger, kSpectrumBit, 801},

        {"p_dark_fwd", Kind::kNumber, kMirrorBit, nullptr},
        {"p_dark_rev", Kind::kNumber, kMirrorBit, nullptr},
        {"mirror_power_min", Kind::kNumber, kMirrorBit, 0.0},
        {"mirror_power_max", Kind::kNumber, kMirrorBit, 1.0},
        {"mirror_power_points", Kind::kInteger, kMirrorBit, 8},
        {"sigma_w", Kind::kNumber, kMirrorBit, 1.0},
        {"n_samples", Kind::kInteger, kMirrorBit, 1 << 18},
        {"dwell_samples", Kind::kNumber, kMirrorBit, 0.0},
        {"sample_rate_hz", Kind::kNumber, kMirrorBit, 1e8},

        {"data_csv", Kind::kString, kFitBit, nullptr},
        {"qubit_freq_hz", Kind::kNumber, kFitBit, 0.0},
        {"initial_gamma_r_hz", Kind::kNumber, kFitBit, nullptr},
        {"initial_gamma_nr_hz", Kind::kNumber, kFitBit, 0.0},
        {"initial_gamma_phi_hz", Kind::kNumber, kFitBit, 0.0},
        {"probe_power", Kind::kNumber, kFitBit, 0.0},
        {"fit_mode", Kind::kString, kFitBit, "decoherence_sum"},
    };
    return keys;
}

const KeySpec* find_key(const std::string& name) {
    for (const auto& k : schema())
        if (name == k.name) return &k;
    return nullptr;
}

bool kind_matches(Kind kind, const json& v) {
    switch (kind) {
        case Kind::kNumber: return v.is_number();
        case Kind::kInteger: return v.is_number_integer();
        case Kind::kString: return v.is_string();
        case Kind::kNumberOrArray:
            if (v.is_number()) return true;
            return v.is_array() && !v.empty() &&
                   std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
    }
    return false;
}

const char* kind_label(Kind kind) {
    switch (kind) {
        case Kind::kNumber: return "a number";
        case Kind::kInteger: return "an integer";
        case Kind::kString: return "a string";
        case Kind::kNumberOrArray: return "a number or a non-empty array of numbers";
    }
    return "?";
}

// Reads validated values out of the filled echo object.
class Reader {
public:
    explicit Reader(const ordered_json& j) : j_(j) {}

    bool has(const char* key) const { return j_.contains(key); }

    double number(const char* key) const {
        const double v = j_.at(key).get<double>();
        if (!std::isfinite(v)) throw config_error(std::string(key) + " must be finite", key);
        return v;
    }
    double positive(const char* key) const {
        const double v = number(key);
        if (!(v > 0.0)) throw config_error(std::string(key) + " must be > 0", key);
        return v;
    }
    double non_negative(const char* key) const {
        const double v = number(key);
        if (!(v >= 0.0)) throw config_error(std::string(key) + " must be >= 0", key);
        return v;
    }
    double probability(const char* key) const {
        const double v = number(key);
        if (!(v >= 0.0 && v <= 1.0)) throw config_error(std::string(key) + " must lie in [0, 1]", key);
        return v;
    }
    long long integer(const char* key, long long lo) const {
        const auto& v = j_.at(key);
        if (v.is_number_unsigned() && v.get<unsigned long long>() > 9007199254740992ull)
            throw config_error(std::string(key) + " is too large", key);
        const long long x = v.get<long long>();
        if (x < lo) throw config_error(std::string(key) + " must be >= " + std::to_string(lo), key);
        return x;
    }
    std::string choice(const char* key, std::initializer_list<const char*> allowed) const {
        const auto s = j_.at(key).get<std::string>();
        for (const char* a : allowed)
            if (s == a) return s;
        std::string msg = std::string(key) + " must be one of:";
        for (const char* a : allowed) msg += std::string(" ") + a;
        throw config_error(msg, key);
    }
    RadPerSec rate(const char* key) const { return qdiode::to_angular(Hertz{non_negative(key)}); }
    RadPerSec positive_rate(const char* key) const { return qdiode::to_angular(Hertz{positive(key)}); }
    RadPerSec frequency(const char* key) const { return qdiode::to_angular(Hertz{number(key)}); }

private:
    const ordered_json& j_;
};

std::string location(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

DiodeSection read_diode(const Reader& r, Mode mode) {
    if (!r.has("q1_gamma_r_hz")) throw config_error("missing required key q1_gamma_r_hz", "q1_gamma_r_hz");
    DiodeSection d;
    const RadPerSec gnr = r.rate("gamma_nr_hz");
    const RadPerSec gphi = r.rate("gamma_phi_hz");
    d.q1 = {r.positive_rate("q1_gamma_r_hz"), gnr, gphi};
    d.q2 = {r.positive_rate("q2_gamma_r_hz"), gnr, gphi};
    d.drive_freq = qdiode::to_angular(Hertz{r.positive("drive_freq_hz")});

    const bool has_delta = r.has("delta_sq");
    const bool has_pi = r.has("omega_pi_hz");
    if (has_delta == has_pi)
        throw config_error("exactly one of delta_sq and omega_pi_hz must be given", has_delta ? "omega_pi_hz" : "delta_sq");
    if (has_pi) {
        d.omega_pi = qdiode::to_angular(Hertz{r.positive("omega_pi_hz")});
        if (mode == Mode::kSpectrum) throw config_error("spectrum mode needs delta_sq", "omega_pi_hz");
    }

    if (r.has("q1_freq_hz") != r.has("q2_freq_hz"))
        throw config_error("q1_freq_hz and q2_freq_hz must be given together", r.has("q1_freq_hz") ? "q2_freq_hz" : "q1_freq_hz");
    if (r.has("q1_freq_hz")) {
        if (mode == Mode::kSpectrum) throw config_error("spectrum mode uses the optimal tuning", "q1_freq_hz");
        d.q1_freq = r.frequency("q1_freq_hz");
        d.q2_freq = r.frequency("q2_freq_hz");
    }
    return d;
}

std::vector<double> read_delta_sq(const ordered_json& v, Mode mode) {
    std::vector<double> out;
    if (v.is_array()) {
        if (mode != Mode::kSpectrum) throw config_error("delta_sq must be a single number in this mode", "delta_sq");
        for (const auto& e : v) out.push_back(e.get<double>());
    } else {
        out.push_back(v.get<double>());
    }
    for (double x : out)
        if (!(x > 0.0) || !(x < 1.0) || !std::isfinite(x))
            throw config_error("delta_sq values must lie in (0, 1)", "delta_sq");
    return out;
}

}  // namespace

std::optional<Mode> parse_mode(const std::string& name) {
    if (name == "fit") return Mode::kFit;
    if (name == "sweep-power") return Mode::kSweepPower;
    if (name == "sweep-frequency") return Mode::kSweepFrequency;
    if (name == "spectrum") return Mode::kSpectrum;
    if (name == "mirror-mc") return Mode::kMirrorMc;
    if (name == "steady-state") return Mode::kSteadyState;
    return std::nullopt;
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::kFit: return "fit";
        case Mode::kSweepPower: return "sweep-power";
        case Mode::kSweepFrequency: return "sweep-frequency";
        case Mode::kSpectrum: return "spectrum";
        case Mode::kMirrorMc: return "mirror-mc";
        case Mode::kSteadyState: return "steady-state";
    }
    return "?";
}

HarnessError config_error(const std::string& message, const std::string& key) {
    return HarnessError(kExitConfig, "config_error", message, key);
}

RunConfig parse_config(const std::string& text, Mode mode, const std::filesystem::path& base_dir) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config is not valid JSON at " + location(text, e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) throw config_error("config must be a JSON object");
    // A manifest from an earlier run carries the filled config under "config".
    if (doc.contains("tool") && doc.contains("config") && doc["config"].is_object()) {
        const ordered_json inner = doc["config"];
        doc = inner;
    }

    const unsigned mbit = bit(mode);
    ordered_json echo = ordered_json::object();
    echo["mode"] = mode_name(mode);
    for (const auto& [key, value] : doc.items()) {
        const KeySpec* spec = find_key(key);
        if (!spec) throw config_error("unknown key '" + key + "'", key);
        if (!(spec->modes & mbit))
            throw config_error("key '" + key + "' is not used by mode " + mode_name(mode), key);
        if (!kind_matches(spec->kind, value))
            throw config_error("key '" + key + "' must be " + kind_label(spec->kind), key);
        if (key == "mode") {
            if (value.get<std::string>() != mode_name(mode))
                throw config_error("config is for mode '" + value.get<std::string>() + "' but '" +
                                       mode_name(mode) + "' was requested",
                                   key);
            continue;
        }
        echo[key] = value;
    }

    RunConfig c;
    c.mode = mode;
    c.base_dir = base_dir;

    // Mirror runs only need the diode when a dark population is missing.
    const bool needs_diode = (mbit & kDiodeModes) &&
                             !(mode == Mode::kMirrorMc && echo.contains("p_dark_fwd") && echo.contains("p_dark_rev"));
    if (needs_diode && echo.contains("q1_gamma_r_hz") && !echo.contains("q2_gamma_r_hz"))
        echo["q2_gamma_r_hz"] = echo["q1_gamma_r_hz"];
    for (const auto& spec : schema()) {
        if (!(spec.modes & mbit) || spec.fallback.is_null() || echo.contains(spec.name)) continue;
        if (!needs_diode && (spec.modes == kDiodeModes)) continue;
        echo[spec.name] = spec.fallback;
    }

    const Reader r(echo);
    c.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
    c.threads = static_cast<int>(std::min<long long>(r.integer("threads", 1), 1024));

    if (needs_diode) {
        c.diode = read_diode(r, mode);
        if (echo.contains("delta_sq")) c.diode->delta_sq = read_delta_sq(echo["delta_sq"], mode);
    }

    switch (mode) {
        case Mode::kSweepPower:
            c.power_min = r.positive("power_min");
            c.power_max = r.positive("power_max");
            if (!(c.power_max > c.power_min)) throw config_error("power_max must exceed power_min", "power_max");
            c.power_points = static_cast<int>(r.integer("power_points", 2));
            break;
        case Mode::kSweepFrequency:
        case Mode::kSteadyState: {
            c.alpha_re = r.number("alpha_re");
            c.alpha_im = r.number("alpha_im");
            c.beta_re = r.number("beta_re");
            c.beta_im = r.number("beta_im");
            const bool a = c.alpha_re != 0.0 || c.alpha_im != 0.0;
            const bool b = c.beta_re != 0.0 || c.beta_im != 0.0;
            if (a && b)
                throw config_error("drive must be directional: alpha and beta cannot both be nonzero", "beta_re");
            if (!a && !b) throw config_error("a drive is required: set alpha_re/alpha_im or beta_re/beta_im", "alpha_re");
            if (mode == Mode::kSweepFrequency) {
                for (const char* k : {"detuning_min_hz", "detuning_max_hz"})
                    if (!r.has(k)) throw config_error(std::string("missing required key ") + k, k);
                c.detuning_min = r.frequency("detuning_min_hz");
                c.detuning_max = r.frequency("detuning_max_hz");
                if (!(c.detuning_max.value > c.detuning_min.value))
                    throw config_error("detuning_max_hz must exceed detuning_min_hz", "detuning_max_hz");
                c.detuning_points = static_cast<int>(r.integer("detuning_points", 2));
            }
            break;
        }
        case Mode::kSpectrum:
            if (r.has("power_per_gammabar")) c.power_per_gammabar = r.positive("power_per_gammabar");
            c.direction = r.choice("direction", {"forward", "reverse"});
            c.port = r.choice("port", {"transmitted", "reflected"});
            c.span_per_linewidth = r.positive("span_per_linewidth");
            c.freq_points = static_cast<int>(r.integer("freq_points", 5));
            break;
        case Mode::kMirrorMc:
            if (r.has("p_dark_fwd")) c.p_dark_fwd = r.probability("p_dark_fwd");
            if (r.has("p_dark_rev")) c.p_dark_rev = r.probability("p_dark_rev");
            if (r.has("power_per_gammabar")) c.power_per_gammabar = r.positive("power_per_gammabar");
            c.mirror_power_min = r.non_negative("mirror_power_min");
            c.mirror_power_max = r.non_negative("mirror_power_max");
            if (!(c.mirror_power_max > c.mirror_power_min))
                throw config_error("mirror_power_max must exceed mirror_power_min", "mirror_power_max");
            c.mirror_power_points = static_cast<int>(r.integer("mirror_power_points", 2));
            c.sigma_w = r.non_negative("sigma_w");
            c.n_samples = static_cast<std::uint64_t>(r.integer("n_samples", 2));
            c.dwell_samples = r.non_negative("dwell_samples");
            c.sample_rate = Hertz{r.positive("sample_rate_hz")};
            break;
        case Mode::kFit:
            if (!r.has("data_csv")) throw config_error("missing required key data_csv", "data_csv");
            if (!r.has("initial_gamma_r_hz"))
                throw config_error("missing required key initial_gamma_r_hz", "initial_gamma_r_hz");
            c.data_csv = echo["data_csv"].get<std::string>();
            c.qubit_freq = r.frequency("qubit_freq_hz");
            c.initial = {r.positive_rate("initial_gamma_r_hz"), r.rate("initial_gamma_nr_hz"),
                         r.rate("initial_gamma_phi_hz")};
            c.probe_power = r.non_negative("probe_power");
            c.fit_mode = r.choice("fit_mode", {"decoherence_sum", "separate_rates"});
            break;
    }

    c.echo = std::move(echo);
    return c;
}

RunConfig load_config(const std::filesystem::path& path, Mode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), mode, path.parent_path());
}

std::string describe(const RunConfig& c) {
    std::ostringstream os;
    os << "mode: " << mode_name(c.mode) << '\n';
    for (const auto& [key, value] : c.echo.items()) {
        if (key == "mode") continue;
        os << "  " << key << " = " << value.dump();
        const bool hz = key.size() > 3 && key.compare(key.size() - 3, 3, "_hz") == 0;
        if (hz && value.is_number()) {
            const double v = value.get<double>();
            char buf[64];
            if (std::abs(v) >= 1e9) std::snprintf(buf, sizeof buf, "%.6g GHz", v / 1e9);
            else if (std::abs(v) >= 1e6) std::snprintf(buf, sizeof buf, "%.6g MHz", v / 1e6);
            else std::snprintf(buf, sizeof buf, "%.6g kHz", v / 1e3);
            os << "  (" << buf << ")";
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace qdh
