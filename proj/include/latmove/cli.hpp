#pragma once

// Command-line front end: run configuration, flag overrides and subcommand dispatch.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "latmove/beta_estimation.hpp"
#include "latmove/metrics.hpp"
#include "latmove/policy_opt.hpp"

namespace latmove {

enum class OutputFormat { Json, Csv };
enum class VariantSelection { Risky, Conservative, Both };

/// One experiment. Paths in the config file are relative to the file's directory.
struct RunConfig {
    std::optional<std::filesystem::path> network;
    std::optional<std::filesystem::path> policy;
    std::optional<std::filesystem::path> costs;
    std::optional<std::filesystem::path> auth_log;
    std::optional<std::filesystem::path> output;
    OutputFormat format = OutputFormat::Json;

    ObjectiveWeights weights;
    CorWeighting cor_weighting = CorWeighting::Paper;
    std::size_t delta_k = 3;
    double epsilon = 1e-6;
    std::size_t max_iter = 200;
    VariantSelection variant = VariantSelection::Both;

    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    double level = 0.95;
    std::size_t threads = 0;
    std::optional<std::uint64_t> trace_trial;
    std::optional<std::filesystem::path> trace_output;

    bool bounds_only = false;
    std::optional<double> threshold;

    std::optional<std::string> initial_node;
    std::optional<std::string> honeypot_node;

    double window_seconds = 3600.0;
    std::optional<TimeSpan> span;
};

/// Throws ParseError naming the offending field.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

inline const std::vector<std::string> kSubcommands = {"validate",         "ltv",           "optimize",    "simulate",
                                                      "analyze-direct",   "analyze-indirect", "estimate-beta"};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand. Results go to config.output (or `out`), diagnostics to `err`.
int dispatch(const std::string& subcommand, const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command line: `latmove <subcommand> --config <path> [flags]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace latmove
