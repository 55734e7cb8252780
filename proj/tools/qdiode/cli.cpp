#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "run.hpp"

namespace qdh {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-qubit waveguide diode simulator"};
    std::string mode_text;
    std::string config_path;
    std::string out_dir = "qdiode_out";
    std::uint64_t seed = 0;
    int threads = 0;

    app.add_option("mode", mode_text, "fit | sweep-power | sweep-frequency | spectrum | mirror-mc | steady-state")
        ->required();
    app.add_option("--config", config_path, "JSON config or a previous manifest.json")->required();
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads (overrides the config)")
                            ->check(CLI::Range(1, 1024));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kExitOk : kExitConfig;
    }

    const auto mode = parse_mode(mode_text);
    if (!mode) {
        err << "error: unknown mode '" << mode_text << "'\n";
        return kExitConfig;
    }

    RunConfig config;
    try {
        config = load_config(config_path, *mode);
    } catch (const HarnessError& e) {
        // Record the failure next to where the outputs would have gone.
        err << "error: " << e.what() << '\n';
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (!ec) {
            nlohmann::ordered_json rec = {{"status", e.kind()}, {"exit_code", e.exit_code()}, {"message", e.what()}};
            if (!e.key().empty()) rec["key"] = e.key();
            std::ofstream(std::filesystem::path(out_dir) / "error.json", std::ios::binary) << rec.dump(2) << '\n';
        }
        return e.exit_code();
    }
    if (*seed_opt) config.seed = seed;
    if (*threads_opt) config.threads = threads;

    const auto result = run(std::move(config), out_dir, err);
    if (result.exit_code == kExitOk) {
        for (const auto& f : result.outputs) out << (std::filesystem::path(out_dir) / f).string() << '\n';
        out << (std::filesystem::path(out_dir) / "manifest.json").string() << '\n';
    }
    return result.exit_code;
}

}  // namespace qdh
