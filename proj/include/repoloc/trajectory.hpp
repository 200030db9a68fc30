#pragma once

#include "repoloc/identifiers.hpp"
#include "repoloc/model_backend.hpp"
#include "repoloc/search_tools.hpp"

#include <optional>
#include <string>
#include <vector>

namespace repoloc::agent {

// The ranked lists the agent emits at exit. Both lists are duplicate-free;
// the file ranking is derived from the functions unless the model supplied
// an explicit files list.
struct LocalizationResult {
    std::vector<FunctionIdentifier> ranked_functions;
    std::vector<std::string> ranked_files;

    std::vector<std::string> function_items() const;

    bool operator==(const LocalizationResult&) const = default;
};

struct TrajectoryStep {
    std::string thought;
    tools::ToolCall call;
    tools::ToolResult result;
};

enum class Termination { ExitTool, BudgetExhausted, ParseFailureLimit };

std::string_view termination_str(Termination termination);
Termination parse_termination(std::string_view text);

struct Trajectory {
    std::string query_id;
    std::vector<ChatMessage> messages; // full ordered transcript
    std::vector<TrajectoryStep> steps;
    std::optional<LocalizationResult> final_answer;
    Termination termination = Termination::BudgetExhausted;
    std::optional<double> reward;
};

// Fraction of steps whose calls were valid; 1.0 for an episode that made
// no calls at all.
double tool_success_rate(const Trajectory& trajectory);

// One-line JSON record: query_id, messages, steps, final_answer,
// termination, reward. Deterministic key order; elapsed timings are
// deliberately not persisted.
std::string trajectory_to_jsonl(const Trajectory& trajectory);
Trajectory trajectory_from_jsonl(const std::string& line);

} // namespace repoloc::agent
