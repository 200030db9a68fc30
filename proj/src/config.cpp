#include "repoloc/config.hpp"

#include "repoloc/error.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace repoloc::cli {

namespace {

std::optional<std::string> env_value(const char* name) {
    if (const char* value = std::getenv(name)) {
        return std::string(value);
    }
    return std::nullopt;
}

void apply_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("missing_config", "cannot open config file: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_config", "config file is not valid JSON: " + std::string(e.what()));
    }
    if (doc.contains("backend")) {
        const auto& backend = doc["backend"];
        config.backend.kind = backend.value("kind", config.backend.kind);
        config.backend.base_url = backend.value("base_url", config.backend.base_url);
        config.backend.model = backend.value("model", config.backend.model);
        config.backend.temperature = backend.value("temperature", config.backend.temperature);
        config.backend.api_key_env = backend.value("api_key_env", config.backend.api_key_env);
        config.backend.script_path = backend.value("script_path", config.backend.script_path);
    }
    if (doc.contains("budget")) {
        const auto& budget = doc["budget"];
        config.budget.max_turns = budget.value("max_turns", config.budget.max_turns);
        config.budget.max_observation_lines =
            budget.value("max_observation_lines", config.budget.max_observation_lines);
        config.budget.max_total_response_chars = budget.value(
            "max_total_response_chars", config.budget.max_total_response_chars);
    }
    config.k = doc.value("k", config.k);
    config.level = doc.value("level", config.level);
    config.policy = doc.value("policy", config.policy);
    config.reward_threshold = doc.value("reward_threshold", config.reward_threshold);
    config.parallelism = doc.value("parallelism", config.parallelism);
    if (doc.contains("seed")) {
        config.seed = doc["seed"].get<std::uint64_t>();
    }
}

void apply_env(RunConfig& config) {
    if (auto value = env_value("REPOLOC_BACKEND")) {
        config.backend.kind = *value;
    }
    if (auto value = env_value("REPOLOC_BASE_URL")) {
        config.backend.base_url = *value;
    }
    if (auto value = env_value("REPOLOC_MODEL")) {
        config.backend.model = *value;
    }
    if (auto value = env_value("REPOLOC_TEMPERATURE")) {
        config.backend.temperature = std::stod(*value);
    }
    if (auto value = env_value("REPOLOC_MAX_TURNS")) {
        config.budget.max_turns = std::stoi(*value);
    }
    if (auto value = env_value("REPOLOC_PARALLELISM")) {
        config.parallelism = std::stoi(*value);
    }
    if (auto value = env_value("REPOLOC_SEED")) {
        config.seed = std::stoull(*value);
    }
}

} // namespace

RunConfig load_run_config(const std::optional<std::string>& config_path) {
    RunConfig config;
    if (config_path) {
        apply_file(config, *config_path);
    }
    apply_env(config);
    return config;
}

std::string describe_config(const RunConfig& config) {
    std::ostringstream out;
    out << "backend=" << config.backend.kind;
    if (config.backend.kind == "http") {
        out << " base_url=" << (config.backend.base_url.empty() ? "(unset)"
                                                                : config.backend.base_url)
            << " model=" << (config.backend.model.empty() ? "(unset)" : config.backend.model)
            << " temperature=" << config.backend.temperature << " api_key_env="
            << config.backend.api_key_env << "("
            << (std::getenv(config.backend.api_key_env.c_str()) ? "set" : "unset") << ")";
    } else if (!config.backend.script_path.empty()) {
        out << " script=" << config.backend.script_path;
    }
    out << " max_turns=" << config.budget.max_turns << " k=" << config.k
        << " level=" << config.level << " policy=" << config.policy
        << " parallelism=" << config.parallelism;
    if (config.seed) {
        out << " seed=" << *config.seed;
    }
    return out.str();
}

} // namespace repoloc::cli
