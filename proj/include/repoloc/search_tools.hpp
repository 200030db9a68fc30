#pragma once

#include "repoloc/repo_index.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace repoloc::tools {

inline constexpr std::string_view kToolNames[] = {
    "GetRepoStructure", "GetImportOfFile", "SearchClass",
    "SearchFunction",   "SearchClassMethod", "Exit",
};

struct ToolCall {
    std::string tool_name;
    std::map<std::string, std::string> arguments;
    int turn_index = 1;
};

enum class ToolStatus { Ok, Error };

struct ToolResult {
    ToolStatus status = ToolStatus::Ok;
    std::string observation;
    bool valid_call = false;
    bool exit_requested = false;
    std::chrono::microseconds elapsed{0}; // runtime telemetry, never persisted
};

struct Validity {
    bool valid = false;
    std::string reason; // empty when valid
};

// Appendix-style success verdict: the tool exists, the argument keys match
// its signature, and every named file/class/function/method is present in
// the index. Never throws.
Validity validate_call(const ToolCall& call, const index::RepoIndex& index);

struct ToolOptions {
    int max_observation_lines = 400;
    int structure_max_depth = 16;
};

// Executes the call and always returns a result; failures come back as
// status=error with a corrective observation so the episode can recover.
ToolResult dispatch(const ToolCall& call, const index::RepoIndex& index,
                    const ToolOptions& options = {});

// Fixed description block of the six tools plus the call syntax. Identical
// bytes on every call.
const std::string& tool_catalog();

// Keeps the first and last halves when text exceeds max_lines, with an
// elision marker naming the number of dropped lines.
std::string truncate_lines(const std::string& text, int max_lines);

double success_rate(std::span<const ToolResult> results);

} // namespace repoloc::tools
