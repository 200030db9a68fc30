#include "repoloc/jsonl.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

using namespace repoloc;
using testsupport::TempDir;

TEST_CASE("read_jsonl_lines skips blanks and reports missing files") {
    TempDir dir;
    auto path = dir.write("data.jsonl", "{\"a\":1}\n\n   \n{\"b\":2}\n");
    auto lines = io::read_jsonl_lines(path);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "{\"a\":1}");

    CHECK_THROWS_AS(io::read_jsonl_lines(dir.path() / "nope.jsonl"), Error);
}

TEST_CASE("load_predictions normalizes and rejects duplicates") {
    TempDir dir;
    auto path = dir.write(
        "preds.jsonl",
        R"({"query_id": "q1", "files": ["./pkg\\b.py"], "functions": [".\\a.py:f", "b.py g"]})"
        "\n");
    auto function_preds = io::load_predictions(path, metrics::Level::Function);
    REQUIRE(function_preds.size() == 1);
    CHECK(function_preds[0].items == std::vector<std::string>{"a.py::f", "b.py::g"});

    auto file_preds = io::load_predictions(path, metrics::Level::File);
    CHECK(file_preds[0].items == std::vector<std::string>{"pkg/b.py"});

    auto dup_path = dir.write(
        "dup.jsonl", R"({"query_id": "q1", "functions": ["a.py::f", "./a.py::f"]})"
                     "\n");
    CHECK_THROWS_WITH_AS(io::load_predictions(dup_path, metrics::Level::Function),
                         doctest::Contains("duplicate item"), Error);

    auto malformed_path = dir.write(
        "mal.jsonl", R"({"query_id": "q1", "functions": ["::broken"]})"
                     "\n");
    CHECK_THROWS_AS(io::load_predictions(malformed_path, metrics::Level::Function), Error);

    auto not_json = dir.write("notjson.jsonl", "{oops\n");
    CHECK_THROWS_AS(io::load_predictions(not_json, metrics::Level::Function), Error);
}

TEST_CASE("load_ground_truths accepts files-only and functions-only lines") {
    TempDir dir;
    auto path = dir.write("truth.jsonl",
                          R"({"query_id": "q1", "files": ["a.py"]})"
                          "\n"
                          R"({"query_id": "q2", "functions": ["pkg/b.py::C.m"]})"
                          "\n");
    auto truths = io::load_ground_truths(path);
    REQUIRE(truths.size() == 2);
    CHECK(truths[0].functions.empty());
    CHECK(truths[0].file_set() == std::set<std::string>{"a.py"});
    // file set of a functions-only truth covers the functions' paths
    CHECK(truths[1].file_set() == std::set<std::string>{"pkg/b.py"});
    CHECK(truths[1].function_set() == std::set<std::string>{"pkg/b.py::C.m"});
}

TEST_CASE("prediction_line_from_trajectory carries the ranked lists") {
    agent::Trajectory trajectory;
    trajectory.query_id = "q9";
    agent::LocalizationResult answer;
    answer.ranked_functions = {{"a.py", "f"}};
    answer.ranked_files = {"a.py"};
    trajectory.final_answer = answer;
    CHECK(io::prediction_line_from_trajectory(trajectory) ==
          R"({"query_id":"q9","files":["a.py"],"functions":["a.py::f"]})");

    agent::Trajectory empty;
    empty.query_id = "q0";
    CHECK(io::prediction_line_from_trajectory(empty) ==
          R"({"query_id":"q0","files":[],"functions":[]})");
}

TEST_CASE("save/load trajectories round-trip through a file") {
    TempDir dir;
    agent::Trajectory trajectory;
    trajectory.query_id = "q1";
    trajectory.messages = {{"system", "s"}, {"user", "u"}};
    trajectory.termination = agent::Termination::BudgetExhausted;

    const auto path = dir.path() / "trajs.jsonl";
    io::save_trajectories(path, {trajectory});
    auto loaded = io::load_trajectories(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].query_id == "q1");
    CHECK(loaded[0].messages == trajectory.messages);
    CHECK(loaded[0].termination == agent::Termination::BudgetExhausted);
    CHECK(!loaded[0].final_answer.has_value());
    CHECK(!loaded[0].reward.has_value());
}
