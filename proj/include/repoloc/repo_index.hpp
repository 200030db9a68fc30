#pragma once

#include "repoloc/error.hpp"
#include "repoloc/python_scanner.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace repoloc::index {

using ImportRecord = PyImport;

struct CodeEntity {
    EntityKind kind = EntityKind::Function;
    std::string qualified_name;
    std::string relative_path;
    int start_line = 1;
    int end_line = 1;
    std::string source_text; // verbatim lines [start_line, end_line]
};

struct SourceFileRecord {
    std::string relative_path; // forward slashes, relative to the repo root
    int line_count = 0;
    std::vector<ImportRecord> imports;
    std::vector<std::string> entity_names; // qualified, in definition order
    bool parse_error = false;
    bool has_duplicate_names = false;
};

struct IndexConfig {
    std::vector<std::string> include_patterns{"*.py"};
    std::vector<std::string> exclude_dir_names{"__pycache__"};
    std::string root_label;   // defaults to the root directory name
    std::string revision_tag; // opaque snapshot id, defaults to "unversioned"
};

class RootNotFound : public Error {
public:
    explicit RootNotFound(const std::string& path)
        : Error("root_not_found", "repository root not found: " + path) {}
};

class EmptyRepository : public Error {
public:
    explicit EmptyRepository(const std::string& path)
        : Error("empty_repository", "no source files matched under: " + path) {}
};

class FileNotInIndex : public Error {
public:
    explicit FileNotInIndex(const std::string& path)
        : Error("file_not_in_index", "file '" + path + "' not found in repository"),
          path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class EntityNotFound : public Error {
public:
    EntityNotFound(const std::string& path, const std::string& name,
                   std::vector<std::string> suggestions);

    const std::vector<std::string>& suggestions() const noexcept { return suggestions_; }

private:
    std::vector<std::string> suggestions_;
};

class CacheCorrupt : public Error {
public:
    explicit CacheCorrupt(const std::string& why)
        : Error("cache_corrupt", "index cache unusable: " + why) {}
};

// Immutable snapshot of one repository revision. Safe to share across
// threads once built; every query is read-only.
class RepoIndex {
public:
    RepoIndex() = default;
    RepoIndex(std::string root_label, std::string revision_tag,
              std::vector<SourceFileRecord> files,
              std::vector<CodeEntity> entities);

    const std::string& root_label() const noexcept { return root_label_; }
    const std::string& revision_tag() const noexcept { return revision_tag_; }
    const std::vector<SourceFileRecord>& files() const noexcept { return files_; }

    std::size_t file_count() const noexcept { return files_.size(); }
    std::size_t entity_count() const noexcept { return entity_list_.size(); }

    const SourceFileRecord* find_file(std::string_view relative_path) const;
    const CodeEntity* find_entity(std::string_view relative_path,
                                  std::string_view qualified_name) const;
    std::vector<const CodeEntity*> entities_in_file(std::string_view relative_path) const;
    const std::vector<CodeEntity>& entities() const noexcept { return entity_list_; }

private:
    std::string root_label_;
    std::string revision_tag_ = "unversioned";
    std::vector<SourceFileRecord> files_; // sorted by relative_path
    std::vector<CodeEntity> entity_list_;
    std::map<std::pair<std::string, std::string>, std::size_t> entity_table_;
    std::map<std::string, std::size_t> file_table_;
};

RepoIndex build_index(const std::filesystem::path& repo_root, const IndexConfig& config = {});

// Deterministic tree rendering of the indexed files, lexicographic order,
// directories suffixed with '/'. Levels deeper than max_depth collapse to a
// "..." marker line.
std::string render_structure(const RepoIndex& index, int max_depth);

const std::vector<ImportRecord>& imports_of(const RepoIndex& index,
                                            std::string_view relative_path);

const CodeEntity& resolve_entity(const RepoIndex& index, std::string_view relative_path,
                                 std::string_view qualified_name);

// Function/method entities whose span intersects [line_start, line_end];
// a class is included only when none of its own methods intersect.
std::vector<const CodeEntity*> entities_overlapping(const RepoIndex& index,
                                                    std::string_view relative_path,
                                                    int line_start, int line_end);

void persist_index(const RepoIndex& index, const std::filesystem::path& path);
RepoIndex load_index(const std::filesystem::path& path);

} // namespace repoloc::index
