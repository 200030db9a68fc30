#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace testsupport {

// Unique directory under the system temp path, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path write(const std::string& relative,
                                const std::string& content) const;

private:
    std::filesystem::path path_;
};

// a.py (function f) + pkg/b.py (class C with method m)
void write_small_fixture(const std::filesystem::path& root);

// pre/post revision trees backing the hand-labeled diff cases
void write_diff_pre_tree(const std::filesystem::path& root);
void write_diff_post_tree(const std::filesystem::path& root);

const std::string& diff_edit_in_method();
const std::string& diff_new_function();
const std::string& diff_deleted_function();
const std::string& diff_constant_only();
const std::string& diff_doc_only();

std::string tool_call_turn(const std::string& thought, const std::string& tool,
                           const std::map<std::string, std::string>& args);
std::string final_answer_turn(const std::string& thought,
                              const std::vector<std::string>& files,
                              const std::vector<std::string>& functions);

// SearchFunction(f) -> Exit -> answer [a.py::f] on the small fixture
std::vector<std::string> golden_episode_turns();
std::vector<std::string> failure_episode_turns();

} // namespace testsupport
