#pragma once

#include "repoloc/error.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace repoloc::dataset {

class MalformedDiff : public Error {
public:
    explicit MalformedDiff(const std::string& why)
        : Error("malformed_diff", "unified diff unusable: " + why) {}
};

struct LineRange {
    int start = 0;
    int end = 0; // inclusive
};

struct FileChange {
    std::string pre_path;  // "" for a brand-new file
    std::string post_path; // "" for a deleted file
    bool is_new = false;
    bool is_deleted = false;
    std::vector<LineRange> deleted_ranges; // pre-image line numbers of '-' lines
    std::vector<LineRange> added_ranges;   // post-image line numbers of '+' lines

    // post path, falling back to the pre path for deletions
    const std::string& changed_path() const { return is_deleted ? pre_path : post_path; }
};

struct ParsedDiff {
    std::vector<FileChange> files;
};

// Strict unified-diff reader for git-style output. Hunk bodies must match
// their declared line counts; anything unrecognized raises MalformedDiff.
ParsedDiff parse_unified_diff(std::string_view diff_text);

} // namespace repoloc::dataset
