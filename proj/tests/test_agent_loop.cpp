#include "repoloc/agent_loop.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

using namespace repoloc;
using namespace repoloc::agent;
using testsupport::TempDir;

namespace {

index::RepoIndex fixture_index(const TempDir& dir) {
    testsupport::write_small_fixture(dir.path());
    index::IndexConfig config;
    config.root_label = "fixture";
    return index::build_index(dir.path(), config);
}

} // namespace

TEST_CASE("parse_model_turn extracts a tool call and the surrounding thought") {
    ParsedTurn parsed = parse_model_turn(
        "Let me look at C first.\n"
        "\n"
        "```json\n"
        "{\"tool\": \"SearchClass\", \"args\": {\"file\": \"pkg/b.py\", \"class\": \"C\"}}\n"
        "```\n"
        "Trailing remark.");
    REQUIRE(parsed.kind == ParsedTurn::Kind::ToolCall);
    CHECK(parsed.call.tool_name == "SearchClass");
    CHECK(parsed.call.arguments.at("file") == "pkg/b.py");
    CHECK(parsed.call.arguments.at("class") == "C");
    CHECK(parsed.thought.find("Let me look at C first.") != std::string::npos);
    CHECK(parsed.thought.find("Trailing remark.") != std::string::npos);
    CHECK(parsed.thought.find("SearchClass") == std::string::npos);
}

TEST_CASE("parse_model_turn extracts a final answer with order preserved") {
    ParsedTurn parsed = parse_model_turn(testsupport::final_answer_turn(
        "Answer now.", {"b.py", "a.py"}, {"b.py::C.m", "a.py::f", "b.py::g"}));
    REQUIRE(parsed.kind == ParsedTurn::Kind::FinalAnswer);
    CHECK(parsed.answer_files == std::vector<std::string>{"b.py", "a.py"});
    CHECK(parsed.answer_functions ==
          std::vector<std::string>{"b.py::C.m", "a.py::f", "b.py::g"});
}

TEST_CASE("parse_model_turn classifies malformed blocks as unparseable") {
    CHECK(parse_model_turn("no blocks at all").kind == ParsedTurn::Kind::Unparseable);
    CHECK(parse_model_turn("```json\n{\"tool\": }\n```").kind ==
          ParsedTurn::Kind::Unparseable);
    CHECK(parse_model_turn("```json\n[1, 2]\n```").kind == ParsedTurn::Kind::Unparseable);
    // tool with non-string args is not a call
    CHECK(parse_model_turn("```json\n{\"tool\": \"Exit\", \"args\": {\"x\": 3}}\n```").kind ==
          ParsedTurn::Kind::Unparseable);
    // unknown extra keys make the block untrustworthy
    CHECK(parse_model_turn("```json\n{\"tool\": \"Exit\", \"bonus\": 1}\n```").kind ==
          ParsedTurn::Kind::Unparseable);
}

TEST_CASE("a turn holding both a tool call and an answer counts as the answer") {
    ParsedTurn parsed = parse_model_turn(
        "```json\n{\"tool\": \"Exit\", \"args\": {}}\n```\n"
        "```json\n{\"files\": [\"a.py\"], \"functions\": [\"a.py::f\"]}\n```\n");
    CHECK(parsed.kind == ParsedTurn::Kind::FinalAnswer);
}

TEST_CASE("first tool block wins when several are present") {
    ParsedTurn parsed = parse_model_turn(
        "```json\n{\"tool\": \"GetRepoStructure\", \"args\": {}}\n```\n"
        "```json\n{\"tool\": \"Exit\", \"args\": {}}\n```\n");
    REQUIRE(parsed.kind == ParsedTurn::Kind::ToolCall);
    CHECK(parsed.call.tool_name == "GetRepoStructure");
}

TEST_CASE("derive_file_ranking: first occurrence and explicit precedence") {
    std::vector<FunctionIdentifier> functions = {
        {"b.py", "C.m"}, {"a.py", "f"}, {"b.py", "g"}};
    CHECK(derive_file_ranking(functions, {}) == std::vector<std::string>{"b.py", "a.py"});
    CHECK(derive_file_ranking({}, {"a.py"}) == std::vector<std::string>{"a.py"});
    CHECK(derive_file_ranking(functions, {"a.py"}) ==
          std::vector<std::string>{"a.py", "b.py"});
}

TEST_CASE("golden episode: search, exit, answer") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    ScriptedBackend backend(testsupport::golden_episode_turns());

    Trajectory trajectory = run_episode("f returns the wrong value.", idx, backend,
                                        EpisodeOptions{"golden", {}, {}, 16});

    CHECK(trajectory.termination == Termination::ExitTool);
    REQUIRE(trajectory.steps.size() == 2);
    CHECK(trajectory.steps[0].call.tool_name == "SearchFunction");
    CHECK(trajectory.steps[0].call.turn_index == 1);
    CHECK(trajectory.steps[0].result.valid_call);
    CHECK(trajectory.steps[1].call.tool_name == "Exit");
    CHECK(trajectory.steps[1].call.turn_index == 2);

    REQUIRE(trajectory.final_answer.has_value());
    REQUIRE(trajectory.final_answer->ranked_functions.size() == 1);
    CHECK(trajectory.final_answer->ranked_functions[0].to_string() == "a.py::f");
    CHECK(trajectory.final_answer->ranked_files == std::vector<std::string>{"a.py"});

    // transcript shape: system, user, then assistant/observation alternation
    REQUIRE(trajectory.messages.size() == 7);
    CHECK(trajectory.messages[0].role == "system");
    CHECK(trajectory.messages[1].role == "user");
    CHECK(trajectory.messages[2].role == "assistant");
    CHECK(trajectory.messages[3].role == "tool-observation");
    CHECK(trajectory.messages[6].role == "assistant");
}

TEST_CASE("budget exhaustion forces an answer attempt") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    ScriptedBackend backend(
        {testsupport::tool_call_turn("looking", "GetRepoStructure", {})}, true);

    EpisodeOptions options;
    options.budget.max_turns = 3;
    Trajectory trajectory = run_episode("issue text", idx, backend, options);

    CHECK(trajectory.termination == Termination::BudgetExhausted);
    CHECK(trajectory.steps.size() == 3);
    CHECK(!trajectory.final_answer.has_value());
}

TEST_CASE("budget exhaustion can still recover an answer from the forced turn") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    std::vector<std::string> turns = {
        testsupport::tool_call_turn("look", "GetRepoStructure", {}),
        testsupport::tool_call_turn("look again", "GetImportOfFile", {{"file", "a.py"}}),
        testsupport::final_answer_turn("fine, answering", {"a.py"}, {"a.py::f"}),
    };
    ScriptedBackend backend(turns);

    EpisodeOptions options;
    options.budget.max_turns = 2;
    Trajectory trajectory = run_episode("issue text", idx, backend, options);

    CHECK(trajectory.termination == Termination::BudgetExhausted);
    CHECK(trajectory.steps.size() == 2);
    REQUIRE(trajectory.final_answer.has_value());
    CHECK(trajectory.final_answer->ranked_functions[0].to_string() == "a.py::f");
}

TEST_CASE("three consecutive unparseable turns end the episode") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    ScriptedBackend backend(testsupport::failure_episode_turns());

    Trajectory trajectory = run_episode("issue text", idx, backend, EpisodeOptions{});
    CHECK(trajectory.termination == Termination::ParseFailureLimit);
    CHECK(trajectory.steps.empty());
    CHECK(!trajectory.final_answer.has_value());
}

TEST_CASE("a parse failure streak interrupted by a call does not trip the limit") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    std::vector<std::string> turns = {
        "gibberish",
        "more gibberish",
        testsupport::tool_call_turn("recovering", "GetRepoStructure", {}),
        "gibberish again",
        "and again",
        testsupport::final_answer_turn("answer", {"a.py"}, {"a.py::f"}),
    };
    ScriptedBackend backend(turns);
    Trajectory trajectory = run_episode("issue", idx, backend, EpisodeOptions{});
    CHECK(trajectory.termination == Termination::ExitTool);
    CHECK(trajectory.steps.size() == 1);
    REQUIRE(trajectory.final_answer.has_value());
}

TEST_CASE("the loop dedups model-emitted answers and keeps unknown identifiers") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    std::vector<std::string> turns = {
        testsupport::final_answer_turn(
            "noisy answer", {"a.py", "a.py", "ghost.py"},
            {"ghost.py::phantom", "a.py::f", "ghost.py::phantom", "::broken", "bare.py"}),
    };
    ScriptedBackend backend(turns);
    Trajectory trajectory = run_episode("issue", idx, backend, EpisodeOptions{});

    REQUIRE(trajectory.final_answer.has_value());
    const auto items = trajectory.final_answer->function_items();
    // hallucinated-but-well-formed stays; malformed and bare paths drop; dups collapse
    CHECK(items == std::vector<std::string>{"ghost.py::phantom", "a.py::f"});
    CHECK(trajectory.final_answer->ranked_files ==
          std::vector<std::string>{"a.py", "ghost.py"});
}

TEST_CASE("replay equivalence: recorded results equal a fresh dispatch") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    std::vector<std::string> turns = {
        testsupport::tool_call_turn("t", "GetRepoStructure", {}),
        testsupport::tool_call_turn("t", "SearchFunction",
                                    {{"file", "a.py"}, {"function", "ghost"}}),
        testsupport::tool_call_turn("t", "SearchClassMethod",
                                    {{"file", "pkg/b.py"}, {"class", "C"}, {"method", "m"}}),
        testsupport::tool_call_turn("t", "Exit", {}),
        testsupport::final_answer_turn("a", {}, {"pkg/b.py::C.m"}),
    };
    ScriptedBackend backend(turns);
    Trajectory trajectory = run_episode("issue", idx, backend, EpisodeOptions{});

    REQUIRE(trajectory.steps.size() == 4);
    for (const TrajectoryStep& step : trajectory.steps) {
        tools::ToolResult fresh = tools::dispatch(step.call, idx);
        CHECK(fresh.observation == step.result.observation);
        CHECK((fresh.status == step.result.status));
        CHECK(fresh.valid_call == step.result.valid_call);
    }
    CHECK(tool_success_rate(trajectory) == 0.75);
}

TEST_CASE("prompt monotonicity under a deterministic backend") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);

    // capture transcript prefixes as the backend sees them
    struct Recorder final : ModelBackend {
        std::vector<std::vector<ChatMessage>> seen;
        std::vector<std::string> turns = testsupport::golden_episode_turns();
        std::string identity() const override { return "recorder"; }
        std::string complete(const std::vector<ChatMessage>& messages,
                             std::optional<std::uint64_t>) override {
            seen.push_back(messages);
            size_t assistant_count = 0;
            for (const ChatMessage& m : messages) {
                if (m.role == "assistant") {
                    ++assistant_count;
                }
            }
            return turns.at(assistant_count);
        }
    };
    Recorder backend;
    run_episode("issue", idx, backend, EpisodeOptions{});

    REQUIRE(backend.seen.size() == 3);
    for (size_t i = 1; i < backend.seen.size(); ++i) {
        const auto& shorter = backend.seen[i - 1];
        const auto& longer = backend.seen[i];
        REQUIRE(shorter.size() < longer.size());
        for (size_t j = 0; j < shorter.size(); ++j) {
            CHECK(shorter[j] == longer[j]);
        }
    }
}

TEST_CASE("deterministic backends make run_episode reproducible") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    ScriptedBackend backend(testsupport::golden_episode_turns());

    Trajectory first = run_episode("issue", idx, backend, EpisodeOptions{"q", {}, {}, 16});
    Trajectory second = run_episode("issue", idx, backend, EpisodeOptions{"q", {}, {}, 16});
    CHECK(trajectory_to_jsonl(first) == trajectory_to_jsonl(second));
}

TEST_CASE("trajectory JSONL round-trips") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    ScriptedBackend backend(testsupport::golden_episode_turns());
    Trajectory trajectory = run_episode("issue", idx, backend,
                                        EpisodeOptions{"roundtrip", {}, {}, 16});
    trajectory.reward = 1.0;

    const std::string line = trajectory_to_jsonl(trajectory);
    Trajectory restored = trajectory_from_jsonl(line);
    CHECK(restored.query_id == trajectory.query_id);
    CHECK(restored.messages == trajectory.messages);
    CHECK(restored.steps.size() == trajectory.steps.size());
    CHECK(restored.final_answer == trajectory.final_answer);
    CHECK(restored.termination == trajectory.termination);
    CHECK(restored.reward == trajectory.reward);
    CHECK(trajectory_to_jsonl(restored) == line);
}

TEST_CASE("batch_run preserves input order at any parallelism") {
    TempDir dir;
    auto idx = std::make_shared<const index::RepoIndex>(fixture_index(dir));
    ScriptedBackend backend(testsupport::golden_episode_turns());

    std::vector<EpisodeRequest> requests;
    for (int i = 0; i < 6; ++i) {
        requests.push_back({"q" + std::to_string(i), "issue " + std::to_string(i)});
    }
    IndexProvider provider = [idx](const EpisodeRequest&) { return idx; };

    BatchResult serial = batch_run(requests, provider, backend, {}, 1);
    BatchResult parallel = batch_run(requests, provider, backend, {}, 4);

    REQUIRE(serial.trajectories.size() == 6);
    REQUIRE(parallel.trajectories.size() == 6);
    CHECK(serial.failures.empty());
    CHECK(parallel.failures.empty());
    for (size_t i = 0; i < requests.size(); ++i) {
        REQUIRE(serial.trajectories[i].has_value());
        REQUIRE(parallel.trajectories[i].has_value());
        CHECK(serial.trajectories[i]->query_id == requests[i].query_id);
        CHECK(trajectory_to_jsonl(*serial.trajectories[i]) ==
              trajectory_to_jsonl(*parallel.trajectories[i]));
    }
}

TEST_CASE("batch_run isolates per-episode failures") {
    TempDir dir;
    auto idx = std::make_shared<const index::RepoIndex>(fixture_index(dir));

    struct FlakyBackend final : ModelBackend {
        std::string identity() const override { return "flaky"; }
        std::string complete(const std::vector<ChatMessage>& messages,
                             std::optional<std::uint64_t>) override {
            for (const ChatMessage& m : messages) {
                if (m.role == "user" && m.content.find("poison") != std::string::npos) {
                    throw BackendUnavailable("poisoned episode");
                }
            }
            return testsupport::final_answer_turn("a", {"a.py"}, {"a.py::f"});
        }
    };
    FlakyBackend backend;

    std::vector<EpisodeRequest> requests = {
        {"q0", "fine"}, {"q1", "poison"}, {"q2", "fine"}, {"q3", "fine"}};
    IndexProvider provider = [idx](const EpisodeRequest&) { return idx; };
    BatchResult result = batch_run(requests, provider, backend, {}, 2);

    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].query_id == "q1");
    CHECK(!result.trajectories[1].has_value());
    CHECK(result.trajectories[0].has_value());
    CHECK(result.trajectories[2].has_value());
    CHECK(result.trajectories[3].has_value());
}

TEST_CASE("an answer without a prior Exit call still terminates as exit_tool") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    ScriptedBackend backend(
        {testsupport::final_answer_turn("direct", {"a.py"}, {"a.py::f"})});
    Trajectory trajectory = run_episode("issue", idx, backend, EpisodeOptions{});
    CHECK(trajectory.termination == Termination::ExitTool);
    CHECK(trajectory.steps.empty());
    REQUIRE(trajectory.final_answer.has_value());
}

TEST_CASE("after Exit, a stray tool call counts toward the parse-failure limit") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    std::vector<std::string> turns = {
        testsupport::tool_call_turn("done", "Exit", {}),
        testsupport::tool_call_turn("oops", "GetRepoStructure", {}),
        testsupport::tool_call_turn("oops", "GetRepoStructure", {}),
        testsupport::tool_call_turn("oops", "GetRepoStructure", {}),
    };
    ScriptedBackend backend(turns, true);
    Trajectory trajectory = run_episode("issue", idx, backend, EpisodeOptions{});
    CHECK(trajectory.termination == Termination::ParseFailureLimit);
    CHECK(trajectory.steps.size() == 1); // only the Exit step
    CHECK(!trajectory.final_answer.has_value());
}

TEST_CASE("response character budget ends the episode") {
    TempDir dir;
    index::RepoIndex idx = fixture_index(dir);
    ScriptedBackend backend(
        {testsupport::tool_call_turn("look", "GetRepoStructure", {})}, true);

    EpisodeOptions options;
    options.budget.max_total_response_chars = 10;
    Trajectory trajectory = run_episode("issue", idx, backend, options);
    CHECK(trajectory.termination == Termination::BudgetExhausted);
    CHECK(trajectory.steps.size() == 1);
}
