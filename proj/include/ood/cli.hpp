#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include <json.hpp>

namespace ood::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kNumerical = 3,
    kSampler = 4,
};

struct Options {
    /// ANSI colour in summary lines (callers disable it for NO_COLOR or non-tty output).
    bool color = false;
};

/// Parses argv and runs one command. Never throws; returns an ExitCode.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err, const Options &options = {});

/**
 * Executes a fully resolved command document (the content of a run.json).
 * `out_override` replaces the document's output location. Throws the
 * library's exceptions; `run` maps them to exit codes.
 */
void execute(nlohmann::json config, const std::optional<std::filesystem::path> &out_override, std::ostream &out,
             const Options &options = {});

}  // namespace ood::cli
