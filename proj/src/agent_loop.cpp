#include "repoloc/agent_loop.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

namespace repoloc::agent {

namespace {

constexpr int kMaxConsecutiveParseFailures = 3;

constexpr std::string_view kAnswerFormatHint =
    "{\"files\": [\"path.py\", ...], \"functions\": [\"path.py::Qualified.name\", ...]}";

struct FencedBlock {
    std::string body;
    size_t begin = 0; // offsets of the whole fenced region in the source text
    size_t end = 0;
};

std::vector<FencedBlock> extract_fenced_blocks(std::string_view text) {
    std::vector<FencedBlock> blocks;
    size_t pos = 0;
    while (true) {
        size_t open = text.find("```", pos);
        if (open == std::string_view::npos) {
            break;
        }
        size_t body_start = text.find('\n', open + 3);
        if (body_start == std::string_view::npos) {
            break;
        }
        ++body_start;
        size_t close = text.find("```", body_start);
        if (close == std::string_view::npos) {
            break;
        }
        FencedBlock block;
        block.body = std::string(text.substr(body_start, close - body_start));
        block.begin = open;
        size_t after = close + 3;
        block.end = after;
        blocks.push_back(std::move(block));
        pos = after;
    }
    return blocks;
}

std::string thought_outside_blocks(std::string_view text,
                                   const std::vector<FencedBlock>& blocks) {
    std::string out;
    size_t pos = 0;
    for (const FencedBlock& block : blocks) {
        out += std::string(text.substr(pos, block.begin - pos));
        pos = block.end;
    }
    out += std::string(text.substr(pos));
    // trim
    size_t b = out.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    size_t e = out.find_last_not_of(" \t\r\n");
    return out.substr(b, e - b + 1);
}

bool string_array_field(const nlohmann::json& doc, const char* key,
                        std::vector<std::string>& out) {
    if (!doc.contains(key)) {
        return true;
    }
    if (!doc[key].is_array()) {
        return false;
    }
    for (const auto& item : doc[key]) {
        if (!item.is_string()) {
            return false;
        }
        out.push_back(item.get<std::string>());
    }
    return true;
}

} // namespace

ParsedTurn parse_model_turn(std::string_view text) {
    ParsedTurn parsed;
    const std::vector<FencedBlock> blocks = extract_fenced_blocks(text);
    parsed.thought = thought_outside_blocks(text, blocks);

    std::optional<tools::ToolCall> first_call;
    for (const FencedBlock& block : blocks) {
        nlohmann::json doc = nlohmann::json::parse(block.body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            continue;
        }
        if (doc.contains("files") || doc.contains("functions")) {
            std::vector<std::string> files;
            std::vector<std::string> functions;
            if (!string_array_field(doc, "files", files) ||
                !string_array_field(doc, "functions", functions)) {
                continue;
            }
            parsed.kind = ParsedTurn::Kind::FinalAnswer;
            parsed.answer_files = std::move(files);
            parsed.answer_functions = std::move(functions);
            return parsed; // a final answer wins over any tool call
        }
        if (!first_call && doc.contains("tool") && doc["tool"].is_string()) {
            bool well_formed = true;
            tools::ToolCall call;
            call.tool_name = doc["tool"].get<std::string>();
            for (const auto& [key, value] : doc.items()) {
                if (key != "tool" && key != "args") {
                    well_formed = false;
                }
            }
            if (doc.contains("args")) {
                if (!doc["args"].is_object()) {
                    well_formed = false;
                } else {
                    for (const auto& [key, value] : doc["args"].items()) {
                        if (!value.is_string()) {
                            well_formed = false;
                            break;
                        }
                        call.arguments[key] = value.get<std::string>();
                    }
                }
            }
            if (well_formed) {
                first_call = std::move(call);
            }
        }
    }
    if (first_call) {
        parsed.kind = ParsedTurn::Kind::ToolCall;
        parsed.call = std::move(*first_call);
    }
    return parsed;
}

std::vector<std::string> derive_file_ranking(
    const std::vector<FunctionIdentifier>& ranked_functions,
    const std::vector<std::string>& explicit_files) {
    std::vector<std::string> files;
    std::set<std::string> seen;
    for (const std::string& file : explicit_files) {
        if (seen.insert(file).second) {
            files.push_back(file);
        }
    }
    for (const FunctionIdentifier& fn : ranked_functions) {
        if (seen.insert(fn.relative_path).second) {
            files.push_back(fn.relative_path);
        }
    }
    return files;
}

const std::string& system_prompt() {
    static const std::string prompt = [] {
        std::string text =
            "You are a repository issue-localization agent. Navigate the repository "
            "with the tools below and produce a ranked list of the code locations "
            "that must change to resolve the reported issue.\n\n";
        text += tools::tool_catalog();
        text +=
            "\n\n"
            "When you have gathered enough information, call Exit. Then reply with "
            "the final answer as one fenced json block of the form\n"
            "\n"
            "```json\n";
        text += kAnswerFormatHint;
        text +=
            "\n```\n"
            "\n"
            "Rank the most suspicious entries first. Spell every function as "
            "\"<relative path>::<function>\" or \"<relative path>::<Class.method>\".";
        return text;
    }();
    return prompt;
}

namespace {

LocalizationResult build_answer(const ParsedTurn& parsed) {
    LocalizationResult answer;
    std::set<std::string> seen;
    for (const std::string& raw : parsed.answer_functions) {
        try {
            NormalizedItem item = normalize_identifier(raw);
            if (!item.is_function()) {
                continue; // bare file paths don't belong in the function list
            }
            if (seen.insert(item.canonical()).second) {
                answer.ranked_functions.push_back(FunctionIdentifier{item.path, item.name});
            }
        } catch (const MalformedIdentifier&) {
            // unusable spelling; unknown-but-well-formed names are kept elsewhere
        }
    }
    std::vector<std::string> explicit_files;
    for (const std::string& raw : parsed.answer_files) {
        std::string path = normalize_path(raw);
        if (!path.empty()) {
            explicit_files.push_back(std::move(path));
        }
    }
    answer.ranked_files = derive_file_ranking(answer.ranked_functions, explicit_files);
    return answer;
}

std::string parse_failure_observation() {
    return "Error: could not parse a tool call or final answer from the reply. "
           "Reply with a thought plus exactly one fenced json block: either "
           "{\"tool\": \"<name>\", \"args\": {...}} or the final answer " +
           std::string(kAnswerFormatHint) + ".";
}

std::string exit_observation() {
    return "Search ended. Reply now with the final answer as one fenced json block: " +
           std::string(kAnswerFormatHint) + ".";
}

std::string budget_observation() {
    return "Turn budget exhausted. Reply now with the final answer as one fenced "
           "json block: " +
           std::string(kAnswerFormatHint) + ".";
}

} // namespace

Trajectory run_episode(const std::string& issue_text, const index::RepoIndex& index,
                       ModelBackend& backend, const EpisodeOptions& options) {
    Trajectory trajectory;
    trajectory.query_id = options.query_id;
    trajectory.messages.push_back(
        ChatMessage{std::string(kRoleSystem), system_prompt()});
    trajectory.messages.push_back(ChatMessage{std::string(kRoleUser), issue_text});

    // budgets are positive by contract; clamp rather than loop forever or never
    EpisodeBudget budget = options.budget;
    budget.max_turns = std::max(1, budget.max_turns);
    budget.max_observation_lines = std::max(1, budget.max_observation_lines);
    budget.max_total_response_chars = std::max<std::size_t>(1, budget.max_total_response_chars);

    tools::ToolOptions tool_options;
    tool_options.max_observation_lines = budget.max_observation_lines;
    tool_options.structure_max_depth = options.structure_max_depth;

    int consecutive_failures = 0;
    std::size_t response_chars = 0;
    bool exited = false;
    bool done = false;

    for (int turn = 1; turn <= budget.max_turns; ++turn) {
        const std::string reply = backend.complete(trajectory.messages, options.seed);
        trajectory.messages.push_back(ChatMessage{std::string(kRoleAssistant), reply});
        response_chars += reply.size();

        const ParsedTurn parsed = parse_model_turn(reply);
        if (parsed.kind == ParsedTurn::Kind::FinalAnswer) {
            trajectory.final_answer = build_answer(parsed);
            trajectory.termination = Termination::ExitTool;
            done = true;
            break;
        }
        if (parsed.kind == ParsedTurn::Kind::ToolCall && !exited) {
            consecutive_failures = 0;
            TrajectoryStep step;
            step.thought = parsed.thought;
            step.call = parsed.call;
            step.call.turn_index = static_cast<int>(trajectory.steps.size()) + 1;
            step.result = tools::dispatch(step.call, index, tool_options);
            const bool exit_now = step.result.exit_requested;
            trajectory.messages.push_back(
                ChatMessage{std::string(kRoleToolObservation),
                            exit_now ? exit_observation() : step.result.observation});
            trajectory.steps.push_back(std::move(step));
            if (exit_now) {
                exited = true;
            }
        } else {
            // unparseable reply, or a tool call after Exit when only the
            // final answer is acceptable
            ++consecutive_failures;
            if (consecutive_failures >= kMaxConsecutiveParseFailures) {
                trajectory.termination = Termination::ParseFailureLimit;
                done = true;
                break;
            }
            trajectory.messages.push_back(ChatMessage{
                std::string(kRoleToolObservation),
                exited ? exit_observation() : parse_failure_observation()});
        }
        if (response_chars > budget.max_total_response_chars) {
            break;
        }
    }

    if (!done) {
        // budget exhausted: one forced answer-only turn
        trajectory.termination = Termination::BudgetExhausted;
        trajectory.messages.push_back(
            ChatMessage{std::string(kRoleToolObservation), budget_observation()});
        const std::string reply = backend.complete(trajectory.messages, options.seed);
        trajectory.messages.push_back(ChatMessage{std::string(kRoleAssistant), reply});
        const ParsedTurn parsed = parse_model_turn(reply);
        if (parsed.kind == ParsedTurn::Kind::FinalAnswer) {
            trajectory.final_answer = build_answer(parsed);
        }
    }
    return trajectory;
}

BatchResult batch_run(std::span<const EpisodeRequest> requests, const IndexProvider& provider,
                      ModelBackend& backend, const EpisodeBudget& budget, int parallelism,
                      std::optional<std::uint64_t> seed) {
    BatchResult result;
    result.trajectories.resize(requests.size());
    if (requests.empty()) {
        return result;
    }
    parallelism = std::max(1, parallelism);

    std::atomic<std::size_t> next{0};
    std::mutex failures_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) {
                return;
            }
            const EpisodeRequest& request = requests[i];
            try {
                std::shared_ptr<const index::RepoIndex> index = provider(request);
                if (!index) {
                    throw Error("no_index", "index provider returned nothing");
                }
                EpisodeOptions options;
                options.query_id = request.query_id;
                options.budget = budget;
                if (seed) {
                    options.seed = *seed + i;
                }
                result.trajectories[i] = run_episode(request.issue_text, *index, backend,
                                                     options);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failures_mutex);
                result.failures.push_back(BatchFailure{i, request.query_id, e.what()});
            }
        }
    };

    const std::size_t thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), requests.size());
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) {
        threads.emplace_back(worker);
    }
    for (std::thread& thread : threads) {
        thread.join();
    }
    std::sort(result.failures.begin(), result.failures.end(),
              [](const BatchFailure& a, const BatchFailure& b) {
                  return a.input_index < b.input_index;
              });
    return result;
}

} // namespace repoloc::agent
