#include "repoloc/trajectory.hpp"

#include "repoloc/version.hpp"

#include <nlohmann/json.hpp>

using ordered_json = nlohmann::ordered_json;

namespace repoloc::agent {

std::vector<std::string> LocalizationResult::function_items() const {
    std::vector<std::string> out;
    out.reserve(ranked_functions.size());
    for (const FunctionIdentifier& fn : ranked_functions) {
        out.push_back(fn.to_string());
    }
    return out;
}

std::string_view termination_str(Termination termination) {
    switch (termination) {
    case Termination::ExitTool: return "exit_tool";
    case Termination::BudgetExhausted: return "budget_exhausted";
    case Termination::ParseFailureLimit: return "parse_failure_limit";
    }
    return "budget_exhausted";
}

Termination parse_termination(std::string_view text) {
    if (text == "exit_tool") {
        return Termination::ExitTool;
    }
    if (text == "parse_failure_limit") {
        return Termination::ParseFailureLimit;
    }
    if (text == "budget_exhausted") {
        return Termination::BudgetExhausted;
    }
    throw Error("bad_termination", "unknown termination '" + std::string(text) + "'");
}

double tool_success_rate(const Trajectory& trajectory) {
    if (trajectory.steps.empty()) {
        return 1.0;
    }
    size_t valid = 0;
    for (const TrajectoryStep& step : trajectory.steps) {
        if (step.result.valid_call) {
            ++valid;
        }
    }
    return static_cast<double>(valid) / static_cast<double>(trajectory.steps.size());
}

std::string trajectory_to_jsonl(const Trajectory& trajectory) {
    ordered_json messages = ordered_json::array();
    for (const ChatMessage& message : trajectory.messages) {
        messages.push_back({{"role", message.role}, {"content", message.content}});
    }
    ordered_json steps = ordered_json::array();
    for (const TrajectoryStep& step : trajectory.steps) {
        ordered_json args = ordered_json::object();
        for (const auto& [key, value] : step.call.arguments) {
            args[key] = value;
        }
        steps.push_back(
            {{"turn", step.call.turn_index},
             {"thought", step.thought},
             {"call", {{"tool", step.call.tool_name}, {"args", std::move(args)}}},
             {"result",
              {{"status", step.result.status == tools::ToolStatus::Ok ? "ok" : "error"},
               {"valid", step.result.valid_call},
               {"observation", step.result.observation}}}});
    }
    ordered_json answer;
    if (trajectory.final_answer) {
        answer = ordered_json{{"functions", trajectory.final_answer->function_items()},
                              {"files", trajectory.final_answer->ranked_files}};
    } else {
        answer = nullptr;
    }
    ordered_json doc{{"schema_version", kTrajectorySchemaVersion},
                     {"tool_version", std::string(kToolVersion)},
                     {"query_id", trajectory.query_id},
                     {"messages", std::move(messages)},
                     {"steps", std::move(steps)},
                     {"final_answer", std::move(answer)},
                     {"termination", std::string(termination_str(trajectory.termination))},
                     {"reward", trajectory.reward ? ordered_json(*trajectory.reward)
                                                  : ordered_json(nullptr)}};
    return doc.dump();
}

Trajectory trajectory_from_jsonl(const std::string& line) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_trajectory_line", std::string("trajectory line is not JSON: ") +
                                               e.what());
    }
    try {
        Trajectory trajectory;
        trajectory.query_id = doc.at("query_id").get<std::string>();
        for (const ordered_json& message : doc.at("messages")) {
            trajectory.messages.push_back(ChatMessage{
                message.at("role").get<std::string>(),
                message.at("content").get<std::string>()});
        }
        for (const ordered_json& step_json : doc.at("steps")) {
            TrajectoryStep step;
            step.thought = step_json.at("thought").get<std::string>();
            step.call.turn_index = step_json.at("turn").get<int>();
            step.call.tool_name = step_json.at("call").at("tool").get<std::string>();
            for (const auto& [key, value] : step_json.at("call").at("args").items()) {
                step.call.arguments[key] = value.get<std::string>();
            }
            const ordered_json& result = step_json.at("result");
            step.result.status = result.at("status").get<std::string>() == "ok"
                                     ? tools::ToolStatus::Ok
                                     : tools::ToolStatus::Error;
            step.result.valid_call = result.at("valid").get<bool>();
            step.result.observation = result.at("observation").get<std::string>();
            step.result.exit_requested = step.call.tool_name == "Exit" &&
                                         step.result.status == tools::ToolStatus::Ok;
            trajectory.steps.push_back(std::move(step));
        }
        if (!doc.at("final_answer").is_null()) {
            LocalizationResult answer;
            for (const ordered_json& fn : doc.at("final_answer").at("functions")) {
                NormalizedItem item = normalize_identifier(fn.get<std::string>());
                answer.ranked_functions.push_back(
                    FunctionIdentifier{item.path, item.name});
            }
            answer.ranked_files =
                doc.at("final_answer").at("files").get<std::vector<std::string>>();
            trajectory.final_answer = std::move(answer);
        }
        trajectory.termination =
            parse_termination(doc.at("termination").get<std::string>());
        if (!doc.at("reward").is_null()) {
            trajectory.reward = doc.at("reward").get<double>();
        }
        return trajectory;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_trajectory_line",
                    std::string("trajectory record malformed: ") + e.what());
    }
}

} // namespace repoloc::agent
