#include "support/fixtures.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace testsupport {

namespace {

std::string unique_name() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    std::ostringstream out;
    out << "repoloc-test-" << rd() << "-" << counter.fetch_add(1);
    return out.str();
}

} // namespace

TempDir::TempDir() : path_(fs::temp_directory_path() / unique_name()) {
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

fs::path TempDir::write(const std::string& relative, const std::string& content) const {
    const fs::path target = path_ / relative;
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    out << content;
    return target;
}

namespace {

void write_file(const fs::path& root, const std::string& relative,
                const std::string& content) {
    const fs::path target = root / relative;
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    out << content;
}

} // namespace

void write_small_fixture(const fs::path& root) {
    write_file(root, "a.py",
               "def f(x):\n"
               "    return x + 1\n");
    write_file(root, "pkg/b.py",
               "class C:\n"
               "    def m(self):\n"
               "        return 42\n");
}

void write_diff_pre_tree(const fs::path& root) {
    write_file(root, "a.py",
               "def old_fn(x):\n"
               "    return x\n"
               "\n"
               "\n"
               "def keep(x):\n"
               "    return x + 1\n");
    write_file(root, "pkg/b.py",
               "class C:\n"
               "    def m(self):\n"
               "        a = 1\n"
               "        b = 2\n"
               "        return a + b\n");
    write_file(root, "newfn.py",
               "def existing(x):\n"
               "    return x\n");
    write_file(root, "constants.py",
               "LIMIT = 10\n"
               "NAME = \"pre\"\n");
    write_file(root, "README.md", "# Readme\nText.\n");
}

void write_diff_post_tree(const fs::path& root) {
    write_file(root, "a.py",
               "def keep(x):\n"
               "    return x + 1\n");
    write_file(root, "pkg/b.py",
               "class C:\n"
               "    def m(self):\n"
               "        a = 1\n"
               "        b = 3\n"
               "        return a * b\n");
    write_file(root, "newfn.py",
               "def existing(x):\n"
               "    return x\n"
               "\n"
               "\n"
               "def g(y):\n"
               "    return y - 1\n");
    write_file(root, "constants.py",
               "LIMIT = 12\n"
               "NAME = \"pre\"\n");
    write_file(root, "README.md", "# Readme\nNew text.\n");
}

const std::string& diff_edit_in_method() {
    static const std::string diff =
        "diff --git a/pkg/b.py b/pkg/b.py\n"
        "--- a/pkg/b.py\n"
        "+++ b/pkg/b.py\n"
        "@@ -2,4 +2,4 @@\n"
        "     def m(self):\n"
        "         a = 1\n"
        "-        b = 2\n"
        "-        return a + b\n"
        "+        b = 3\n"
        "+        return a * b\n";
    return diff;
}

const std::string& diff_new_function() {
    static const std::string diff =
        "diff --git a/newfn.py b/newfn.py\n"
        "--- a/newfn.py\n"
        "+++ b/newfn.py\n"
        "@@ -2,1 +2,5 @@\n"
        "     return x\n"
        "+\n"
        "+\n"
        "+def g(y):\n"
        "+    return y - 1\n";
    return diff;
}

const std::string& diff_deleted_function() {
    static const std::string diff =
        "diff --git a/a.py b/a.py\n"
        "--- a/a.py\n"
        "+++ b/a.py\n"
        "@@ -1,6 +1,2 @@\n"
        "-def old_fn(x):\n"
        "-    return x\n"
        "-\n"
        "-\n"
        " def keep(x):\n"
        "     return x + 1\n";
    return diff;
}

const std::string& diff_constant_only() {
    static const std::string diff =
        "diff --git a/constants.py b/constants.py\n"
        "--- a/constants.py\n"
        "+++ b/constants.py\n"
        "@@ -1,2 +1,2 @@\n"
        "-LIMIT = 10\n"
        "+LIMIT = 12\n"
        " NAME = \"pre\"\n";
    return diff;
}

const std::string& diff_doc_only() {
    static const std::string diff =
        "diff --git a/README.md b/README.md\n"
        "--- a/README.md\n"
        "+++ b/README.md\n"
        "@@ -2,1 +2,1 @@\n"
        "-Text.\n"
        "+New text.\n";
    return diff;
}

std::string tool_call_turn(const std::string& thought, const std::string& tool,
                           const std::map<std::string, std::string>& args) {
    std::string json = "{\"tool\": \"" + tool + "\", \"args\": {";
    bool first = true;
    for (const auto& [key, value] : args) {
        if (!first) {
            json += ", ";
        }
        first = false;
        json += "\"" + key + "\": \"" + value + "\"";
    }
    json += "}}";
    return thought + "\n\n```json\n" + json + "\n```\n";
}

std::string final_answer_turn(const std::string& thought,
                              const std::vector<std::string>& files,
                              const std::vector<std::string>& functions) {
    auto render_list = [](const std::vector<std::string>& items) {
        std::string out = "[";
        for (size_t i = 0; i < items.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += "\"" + items[i] + "\"";
        }
        return out + "]";
    };
    return thought + "\n\n```json\n{\"files\": " + render_list(files) +
           ", \"functions\": " + render_list(functions) + "}\n```\n";
}

std::vector<std::string> golden_episode_turns() {
    return {
        tool_call_turn("The issue mentions f; inspect it.", "SearchFunction",
                       {{"file", "a.py"}, {"function", "f"}}),
        tool_call_turn("f is the culprit; done searching.", "Exit", {}),
        final_answer_turn("Final ranking.", {"a.py"}, {"a.py::f"}),
    };
}

std::vector<std::string> failure_episode_turns() {
    return {
        "I will look around the repo without calling anything.",
        "Still thinking out loud with no block.",
        "```json\n{\"tool\": \"SearchFunction\", \"args\": {\"file\": }\n```\n",
    };
}

} // namespace testsupport
