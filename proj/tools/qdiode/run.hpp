#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace qdh {

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::string> outputs;  // file names relative to the output directory
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

// Executes one configured run, writing data files, manifest.json and, on
// failure, error.json into `out_dir`. Never throws for run-time failures.
RunResult run(RunConfig config, const std::filesystem::path& out_dir, std::ostream& log);

// Full command line: `<tool> <mode> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qdh
