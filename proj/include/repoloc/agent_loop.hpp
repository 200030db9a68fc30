#pragma once

#include "repoloc/model_backend.hpp"
#include "repoloc/repo_index.hpp"
#include "repoloc/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace repoloc::agent {

struct EpisodeBudget {
    int max_turns = 20;
    int max_observation_lines = 400;
    std::size_t max_total_response_chars = 262144;
};

// Outcome of parsing one raw model reply. A reply holding both a tool call
// and a final answer counts as the final answer.
struct ParsedTurn {
    enum class Kind { ToolCall, FinalAnswer, Unparseable };
    Kind kind = Kind::Unparseable;
    std::string thought; // text outside the fenced blocks
    tools::ToolCall call;
    std::vector<std::string> answer_files;     // raw, before normalization
    std::vector<std::string> answer_functions; // raw, before normalization
};

ParsedTurn parse_model_turn(std::string_view text);

// Explicit files first, then each function's file on first occurrence.
std::vector<std::string> derive_file_ranking(
    const std::vector<FunctionIdentifier>& ranked_functions,
    const std::vector<std::string>& explicit_files);

// System message: tool catalog plus the answer-format contract.
const std::string& system_prompt();

struct EpisodeOptions {
    std::string query_id = "query";
    EpisodeBudget budget;
    std::optional<std::uint64_t> seed;
    int structure_max_depth = 16;
};

// One full localization episode: thought -> tool call -> observation until
// Exit, turn/size budget exhaustion, or three consecutive unparseable
// replies. Only BackendUnavailable escapes.
Trajectory run_episode(const std::string& issue_text, const index::RepoIndex& index,
                       ModelBackend& backend, const EpisodeOptions& options = {});

struct EpisodeRequest {
    std::string query_id;
    std::string issue_text;
};

using IndexProvider =
    std::function<std::shared_ptr<const index::RepoIndex>(const EpisodeRequest&)>;

struct BatchFailure {
    std::size_t input_index = 0;
    std::string query_id;
    std::string error;
};

struct BatchResult {
    std::vector<std::optional<Trajectory>> trajectories; // input order, nullopt on failure
    std::vector<BatchFailure> failures;
};

// Runs episodes with at most `parallelism` in flight. Output order always
// matches input order and per-episode failures never sink the batch. When
// a base seed is given, episode i receives seed + i.
BatchResult batch_run(std::span<const EpisodeRequest> requests, const IndexProvider& provider,
                      ModelBackend& backend, const EpisodeBudget& budget, int parallelism,
                      std::optional<std::uint64_t> seed = std::nullopt);

} // namespace repoloc::agent
