#include "repoloc/repo_index.hpp"

#include "repoloc/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace repoloc::index {

namespace {

std::string join_suggestions(const std::vector<std::string>& suggestions) {
    if (suggestions.empty()) {
        return "";
    }
    std::string out = " Did you mean: ";
    for (size_t i = 0; i < suggestions.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += "'" + suggestions[i] + "'";
    }
    out += "?";
    return out;
}

bool glob_match(std::string_view pattern, std::string_view text) {
    // '*' and '?' only; enough for source-file patterns like "*.py"
    size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') {
        ++p;
    }
    return p == pattern.size();
}

std::string slice_lines(const std::vector<std::string>& lines, int start, int end) {
    std::string out;
    for (int i = start; i <= end && i <= static_cast<int>(lines.size()); ++i) {
        if (i > start) {
            out += '\n';
        }
        out += lines[static_cast<size_t>(i) - 1];
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view source) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= source.size()) {
        size_t nl = source.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < source.size()) {
                out.emplace_back(source.substr(start));
            }
            break;
        }
        out.emplace_back(source.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

EntityKind kind_from_str(std::string_view s) {
    if (s == "class") {
        return EntityKind::Class;
    }
    if (s == "method") {
        return EntityKind::Method;
    }
    return EntityKind::Function;
}

} // namespace

EntityNotFound::EntityNotFound(const std::string& path, const std::string& name,
                               std::vector<std::string> suggestions)
    : Error("entity_not_found",
            "entity '" + name + "' not found in '" + path + "'." +
                join_suggestions(suggestions)),
      suggestions_(std::move(suggestions)) {}

RepoIndex::RepoIndex(std::string root_label, std::string revision_tag,
                     std::vector<SourceFileRecord> files, std::vector<CodeEntity> entities)
    : root_label_(std::move(root_label)),
      revision_tag_(std::move(revision_tag)),
      files_(std::move(files)),
      entity_list_(std::move(entities)) {
    std::sort(files_.begin(), files_.end(),
              [](const SourceFileRecord& a, const SourceFileRecord& b) {
                  return a.relative_path < b.relative_path;
              });
    for (size_t i = 0; i < files_.size(); ++i) {
        file_table_.emplace(files_[i].relative_path, i);
    }
    for (size_t i = 0; i < entity_list_.size(); ++i) {
        entity_table_.emplace(
            std::make_pair(entity_list_[i].relative_path, entity_list_[i].qualified_name), i);
    }
}

const SourceFileRecord* RepoIndex::find_file(std::string_view relative_path) const {
    auto it = file_table_.find(std::string(relative_path));
    return it == file_table_.end() ? nullptr : &files_[it->second];
}

const CodeEntity* RepoIndex::find_entity(std::string_view relative_path,
                                         std::string_view qualified_name) const {
    auto it = entity_table_.find(
        std::make_pair(std::string(relative_path), std::string(qualified_name)));
    return it == entity_table_.end() ? nullptr : &entity_list_[it->second];
}

std::vector<const CodeEntity*> RepoIndex::entities_in_file(
    std::string_view relative_path) const {
    std::vector<const CodeEntity*> out;
    const SourceFileRecord* file = find_file(relative_path);
    if (file == nullptr) {
        return out;
    }
    for (const std::string& name : file->entity_names) {
        if (const CodeEntity* entity = find_entity(relative_path, name)) {
            out.push_back(entity);
        }
    }
    return out;
}

RepoIndex build_index(const fs::path& repo_root, const IndexConfig& config) {
    std::error_code ec;
    if (!fs::exists(repo_root, ec) || !fs::is_directory(repo_root, ec)) {
        throw RootNotFound(repo_root.string());
    }

    const std::set<std::string> excluded(config.exclude_dir_names.begin(),
                                         config.exclude_dir_names.end());
    std::vector<std::string> matched;
    fs::recursive_directory_iterator it(repo_root, fs::directory_options::skip_permission_denied);
    for (auto end = fs::recursive_directory_iterator(); it != end; ++it) {
        const std::string name = it->path().filename().string();
        if (it->is_directory()) {
            if ((!name.empty() && name.front() == '.') || excluded.count(name) > 0) {
                it.disable_recursion_pending();
            }
            continue;
        }
        if (!it->is_regular_file() || (!name.empty() && name.front() == '.')) {
            continue;
        }
        bool included = false;
        for (const std::string& pattern : config.include_patterns) {
            if (glob_match(pattern, name)) {
                included = true;
                break;
            }
        }
        if (!included) {
            continue;
        }
        std::string rel = fs::relative(it->path(), repo_root).generic_string();
        matched.push_back(std::move(rel));
    }
    if (matched.empty()) {
        throw EmptyRepository(repo_root.string());
    }
    std::sort(matched.begin(), matched.end());

    std::vector<SourceFileRecord> files;
    std::vector<CodeEntity> entities;
    files.reserve(matched.size());
    for (const std::string& rel : matched) {
        std::ifstream in(repo_root / fs::path(rel), std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        const std::string content = buffer.str();
        const std::vector<std::string> lines = split_lines(content);

        PyScanResult scan = scan_python_source(content);
        SourceFileRecord record;
        record.relative_path = rel;
        record.line_count = scan.line_count;
        record.parse_error = scan.parse_error;
        record.has_duplicate_names = scan.has_duplicate_names;
        record.imports = std::move(scan.imports);
        for (const PyEntity& entity : scan.entities) {
            CodeEntity code;
            code.kind = entity.kind;
            code.qualified_name = entity.qualified_name;
            code.relative_path = rel;
            code.start_line = entity.start_line;
            code.end_line = entity.end_line;
            code.source_text = slice_lines(lines, entity.start_line, entity.end_line);
            record.entity_names.push_back(entity.qualified_name);
            entities.push_back(std::move(code));
        }
        files.push_back(std::move(record));
    }

    std::string label = config.root_label.empty()
                            ? fs::absolute(repo_root).filename().string()
                            : config.root_label;
    if (label.empty()) {
        label = "repo";
    }
    std::string revision = config.revision_tag.empty() ? "unversioned" : config.revision_tag;
    return RepoIndex(std::move(label), std::move(revision), std::move(files),
                     std::move(entities));
}

std::string render_structure(const RepoIndex& index, int max_depth) {
    if (max_depth < 1) {
        max_depth = 1;
    }
    struct Node {
        std::map<std::string, Node> dirs;
        std::set<std::string> files;
    };
    Node root;
    for (const SourceFileRecord& file : index.files()) {
        Node* node = &root;
        std::string_view path = file.relative_path;
        size_t start = 0;
        while (true) {
            size_t slash = path.find('/', start);
            if (slash == std::string_view::npos) {
                node->files.insert(std::string(path.substr(start)));
                break;
            }
            node = &node->dirs[std::string(path.substr(start, slash - start))];
            start = slash + 1;
        }
    }

    std::string out = index.root_label() + "/";
    auto render = [&](auto&& self, const Node& node, int depth, const std::string& indent) -> void {
        if (depth > max_depth) {
            if (!node.dirs.empty() || !node.files.empty()) {
                out += "\n" + indent + "...";
            }
            return;
        }
        std::vector<std::pair<std::string, const Node*>> entries;
        for (const auto& [name, child] : node.dirs) {
            entries.emplace_back(name, &child);
        }
        for (const std::string& name : node.files) {
            entries.emplace_back(name, nullptr);
        }
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [name, child] : entries) {
            out += "\n" + indent + name;
            if (child != nullptr) {
                out += "/";
                self(self, *child, depth + 1, indent + "  ");
            }
        }
    };
    render(render, root, 1, "  ");
    return out;
}

const std::vector<ImportRecord>& imports_of(const RepoIndex& index,
                                            std::string_view relative_path) {
    const SourceFileRecord* file = index.find_file(relative_path);
    if (file == nullptr) {
        throw FileNotInIndex(std::string(relative_path));
    }
    return file->imports;
}

const CodeEntity& resolve_entity(const RepoIndex& index, std::string_view relative_path,
                                 std::string_view qualified_name) {
    const SourceFileRecord* file = index.find_file(relative_path);
    if (file == nullptr) {
        throw FileNotInIndex(std::string(relative_path));
    }
    if (const CodeEntity* entity = index.find_entity(relative_path, qualified_name)) {
        return *entity;
    }

    // near misses: same name elsewhere, or other members of the named class
    std::vector<std::string> suggestions;
    auto add = [&suggestions](const std::string& text) {
        if (suggestions.size() < 5 &&
            std::find(suggestions.begin(), suggestions.end(), text) == suggestions.end()) {
            suggestions.push_back(text);
        }
    };
    const std::string wanted(qualified_name);
    const size_t dot = wanted.find('.');
    if (dot != std::string::npos) {
        const std::string class_prefix = wanted.substr(0, dot + 1);
        for (const std::string& name : file->entity_names) {
            if (name.size() > class_prefix.size() &&
                name.compare(0, class_prefix.size(), class_prefix) == 0) {
                add(name);
            }
        }
    }
    for (const CodeEntity& entity : index.entities()) {
        if (entity.qualified_name == wanted && entity.relative_path != relative_path) {
            add(entity.relative_path + "::" + entity.qualified_name);
        }
    }
    throw EntityNotFound(std::string(relative_path), wanted, std::move(suggestions));
}

std::vector<const CodeEntity*> entities_overlapping(const RepoIndex& index,
                                                    std::string_view relative_path,
                                                    int line_start, int line_end) {
    const SourceFileRecord* file = index.find_file(relative_path);
    if (file == nullptr) {
        throw FileNotInIndex(std::string(relative_path));
    }
    auto intersects = [&](const CodeEntity& entity) {
        return entity.start_line <= line_end && entity.end_line >= line_start;
    };

    std::vector<const CodeEntity*> hits;
    std::vector<const CodeEntity*> classes;
    for (const CodeEntity* entity : index.entities_in_file(relative_path)) {
        if (!intersects(*entity)) {
            continue;
        }
        if (entity->kind == EntityKind::Class) {
            classes.push_back(entity);
        } else {
            hits.push_back(entity);
        }
    }
    for (const CodeEntity* cls : classes) {
        const std::string prefix = cls->qualified_name + ".";
        bool member_hit = false;
        for (const CodeEntity* hit : hits) {
            if (hit->kind == EntityKind::Method &&
                hit->qualified_name.compare(0, prefix.size(), prefix) == 0) {
                member_hit = true;
                break;
            }
        }
        if (!member_hit) {
            hits.push_back(cls);
        }
    }
    std::sort(hits.begin(), hits.end(), [](const CodeEntity* a, const CodeEntity* b) {
        return std::tie(a->start_line, a->qualified_name) <
               std::tie(b->start_line, b->qualified_name);
    });
    return hits;
}

namespace {

ordered_json payload_json(const RepoIndex& index) {
    ordered_json files = ordered_json::array();
    for (const SourceFileRecord& file : index.files()) {
        ordered_json imports = ordered_json::array();
        for (const ImportRecord& imp : file.imports) {
            imports.push_back({{"raw", imp.raw_text},
                               {"symbols", imp.imported_symbols},
                               {"module", imp.source_module},
                               {"line", imp.line}});
        }
        files.push_back({{"path", file.relative_path},
                         {"line_count", file.line_count},
                         {"imports", imports},
                         {"entities", file.entity_names},
                         {"parse_error", file.parse_error},
                         {"has_duplicate_names", file.has_duplicate_names}});
    }
    ordered_json entities = ordered_json::array();
    for (const CodeEntity& entity : index.entities()) {
        entities.push_back({{"kind", std::string(entity_kind_str(entity.kind))},
                            {"name", entity.qualified_name},
                            {"path", entity.relative_path},
                            {"start", entity.start_line},
                            {"end", entity.end_line},
                            {"source", entity.source_text}});
    }
    return ordered_json{{"root_label", index.root_label()},
                        {"revision_tag", index.revision_tag()},
                        {"files", files},
                        {"entities", entities}};
}

} // namespace

void persist_index(const RepoIndex& index, const fs::path& path) {
    ordered_json payload = payload_json(index);
    const std::string payload_text = payload.dump();
    ordered_json doc{{"format_version", kIndexCacheFormatVersion},
                     {"tool_version", std::string(kToolVersion)},
                     {"checksum", hex64(fnv1a64(payload_text))},
                     {"payload", std::move(payload)}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cache_unwritable", "cannot write index cache: " + path.string());
    }
    out << doc.dump() << "\n";
    if (!out) {
        throw Error("cache_unwritable", "failed writing index cache: " + path.string());
    }
}

RepoIndex load_index(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CacheCorrupt("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();

    ordered_json doc;
    try {
        doc = ordered_json::parse(buffer.str());
    } catch (const nlohmann::json::exception& e) {
        throw CacheCorrupt(std::string("not valid cache JSON: ") + e.what());
    }
    try {
        if (!doc.contains("format_version") ||
            doc["format_version"].get<int>() != kIndexCacheFormatVersion) {
            throw CacheCorrupt("format version mismatch");
        }
        const std::string payload_text = doc.at("payload").dump();
        if (doc.at("checksum").get<std::string>() != hex64(fnv1a64(payload_text))) {
            throw CacheCorrupt("checksum mismatch");
        }
        const ordered_json& payload = doc.at("payload");

        std::vector<SourceFileRecord> files;
        for (const ordered_json& f : payload.at("files")) {
            SourceFileRecord record;
            record.relative_path = f.at("path").get<std::string>();
            record.line_count = f.at("line_count").get<int>();
            record.parse_error = f.at("parse_error").get<bool>();
            record.has_duplicate_names = f.at("has_duplicate_names").get<bool>();
            for (const ordered_json& imp : f.at("imports")) {
                ImportRecord import_record;
                import_record.raw_text = imp.at("raw").get<std::string>();
                import_record.imported_symbols =
                    imp.at("symbols").get<std::vector<std::string>>();
                import_record.source_module = imp.at("module").get<std::string>();
                import_record.line = imp.at("line").get<int>();
                record.imports.push_back(std::move(import_record));
            }
            record.entity_names = f.at("entities").get<std::vector<std::string>>();
            files.push_back(std::move(record));
        }
        std::vector<CodeEntity> entities;
        for (const ordered_json& e : payload.at("entities")) {
            CodeEntity entity;
            entity.kind = kind_from_str(e.at("kind").get<std::string>());
            entity.qualified_name = e.at("name").get<std::string>();
            entity.relative_path = e.at("path").get<std::string>();
            entity.start_line = e.at("start").get<int>();
            entity.end_line = e.at("end").get<int>();
            entity.source_text = e.at("source").get<std::string>();
            entities.push_back(std::move(entity));
        }
        return RepoIndex(payload.at("root_label").get<std::string>(),
                         payload.at("revision_tag").get<std::string>(), std::move(files),
                         std::move(entities));
    } catch (const CacheCorrupt&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw CacheCorrupt(std::string("cache record malformed: ") + e.what());
    }
}

} // namespace repoloc::index
