#pragma once

#include "repoloc/error.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace repoloc::agent {

inline constexpr std::string_view kRoleSystem = "system";
inline constexpr std::string_view kRoleUser = "user";
inline constexpr std::string_view kRoleAssistant = "assistant";
inline constexpr std::string_view kRoleToolObservation = "tool-observation";

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

class BackendUnavailable : public Error {
public:
    explicit BackendUnavailable(const std::string& why)
        : Error("backend_unavailable", "model backend unavailable: " + why) {}
};

// The only capability the episode loop needs: a transcript in, one
// assistant reply out. Implementations must be safe for concurrent
// complete() calls from batch episodes.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;

    virtual std::string identity() const = 0;
    virtual std::string complete(const std::vector<ChatMessage>& messages,
                                 std::optional<std::uint64_t> seed) = 0;
};

// Replays canned assistant turns keyed by how many assistant messages the
// transcript already holds — a pure function of the transcript, so shared
// use across parallel episodes stays deterministic.
class ScriptedBackend final : public ModelBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> turns, bool repeat_last = false);

    static ScriptedBackend from_json_file(const std::filesystem::path& path);

    std::string identity() const override { return "scripted"; }
    std::string complete(const std::vector<ChatMessage>& messages,
                         std::optional<std::uint64_t> seed) override;

private:
    std::vector<std::string> turns_;
    bool repeat_last_ = false;
};

struct HttpBackendConfig {
    std::string base_url;          // e.g. "http://localhost:8000"
    std::string model;
    double temperature = 0.0;
    std::string api_key_env = "REPOLOC_API_KEY"; // secrets only via environment
    std::string completions_path = "/v1/chat/completions";
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::seconds request_timeout{120};
};

// Chat-completions client: messages array in, choices[0].message.content
// out. Retries transport failures with exponential backoff before giving
// up with BackendUnavailable.
class HttpBackend final : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    std::string identity() const override { return "http:" + config_.model; }
    std::string complete(const std::vector<ChatMessage>& messages,
                         std::optional<std::uint64_t> seed) override;

private:
    HttpBackendConfig config_;
    std::string api_key_;
};

} // namespace repoloc::agent
