#include "repoloc/model_backend.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <thread>

namespace repoloc::agent {

ScriptedBackend::ScriptedBackend(std::vector<std::string> turns, bool repeat_last)
    : turns_(std::move(turns)), repeat_last_(repeat_last) {}

ScriptedBackend ScriptedBackend::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw BackendUnavailable("cannot open script file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw BackendUnavailable("script file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.contains("turns") || !doc["turns"].is_array()) {
        throw BackendUnavailable("script file must contain a \"turns\" array");
    }
    std::vector<std::string> turns;
    for (const auto& turn : doc["turns"]) {
        turns.push_back(turn.get<std::string>());
    }
    return ScriptedBackend(std::move(turns), doc.value("repeat_last", false));
}

std::string ScriptedBackend::complete(const std::vector<ChatMessage>& messages,
                                      std::optional<std::uint64_t> /*seed*/) {
    size_t assistant_turns = 0;
    for (const ChatMessage& message : messages) {
        if (message.role == kRoleAssistant) {
            ++assistant_turns;
        }
    }
    if (assistant_turns < turns_.size()) {
        return turns_[assistant_turns];
    }
    if (repeat_last_ && !turns_.empty()) {
        return turns_.back();
    }
    throw BackendUnavailable("script exhausted after " + std::to_string(turns_.size()) +
                             " turns");
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
        api_key_ = key;
    }
}

namespace {

std::string wire_role(const std::string& role) {
    // the loop's observation messages ride as user turns on the wire
    if (role == kRoleToolObservation) {
        return std::string(kRoleUser);
    }
    return role;
}

} // namespace

std::string HttpBackend::complete(const std::vector<ChatMessage>& messages,
                                  std::optional<std::uint64_t> seed) {
    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    if (seed) {
        body["seed"] = *seed;
    }
    auto& wire_messages = body["messages"] = nlohmann::json::array();
    for (const ChatMessage& message : messages) {
        wire_messages.push_back({{"role", wire_role(message.role)},
                                 {"content", message.content}});
    }
    const std::string payload = body.dump();

    std::string last_error = "no attempts made";
    auto backoff = config_.initial_backoff;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(std::chrono::seconds(10));
        client.set_read_timeout(config_.request_timeout);
        httplib::Headers headers;
        if (!api_key_.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key_);
        }
        auto response = client.Post(config_.completions_path, headers, payload,
                                    "application/json");
        if (!response) {
            last_error = "transport error: " + httplib::to_string(response.error());
            continue;
        }
        if (response->status != 200) {
            last_error = "HTTP " + std::to_string(response->status);
            if (response->status >= 400 && response->status < 500 &&
                response->status != 429) {
                // client errors will not heal on retry
                break;
            }
            continue;
        }
        try {
            nlohmann::json doc = nlohmann::json::parse(response->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            last_error = "malformed completion response: " + std::string(e.what());
            continue;
        }
    }
    throw BackendUnavailable(last_error);
}

} // namespace repoloc::agent
