#pragma once

#include "repoloc/agent_loop.hpp"

#include <optional>
#include <string>

namespace repoloc::cli {

struct BackendSettings {
    std::string kind = "http"; // "http" or "scripted"
    std::string base_url;
    std::string model;
    double temperature = 0.0;
    std::string api_key_env = "REPOLOC_API_KEY";
    std::string script_path; // scripted backend only
};

// Effective settings for one command invocation. Precedence:
// flag > environment variable > config file > built-in default.
struct RunConfig {
    BackendSettings backend;
    agent::EpisodeBudget budget;
    int k = 5;
    std::string level = "function";
    std::string policy = "any";
    double reward_threshold = 0.5;
    int parallelism = 1;
    std::optional<std::uint64_t> seed;
};

// Loads the optional JSON config file, then overlays REPOLOC_* environment
// variables. Flag overrides happen at the CLI layer.
RunConfig load_run_config(const std::optional<std::string>& config_path);

// Printable snapshot; secret values never appear, only whether their
// environment variable is set.
std::string describe_config(const RunConfig& config);

} // namespace repoloc::cli
