#include "repoloc/diff_parser.hpp"

#include <charconv>
#include <optional>

namespace repoloc::dataset {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) {
                out.push_back(text.substr(start));
            }
            break;
        }
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::string strip_prefix(std::string_view path) {
    if (path == "/dev/null") {
        return "";
    }
    if (path.rfind("a/", 0) == 0 || path.rfind("b/", 0) == 0) {
        path.remove_prefix(2);
    }
    // `--- path<TAB>timestamp` form
    if (size_t tab = path.find('\t'); tab != std::string_view::npos) {
        path = path.substr(0, tab);
    }
    return std::string(path);
}

struct HunkHeader {
    int old_start = 0;
    int old_count = 0;
    int new_start = 0;
    int new_count = 0;
};

std::optional<int> parse_int(std::string_view text) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

// "@@ -l[,c] +l[,c] @@ optional context"
std::optional<HunkHeader> parse_hunk_header(std::string_view line) {
    if (line.rfind("@@ -", 0) != 0) {
        return std::nullopt;
    }
    size_t close = line.find(" @@", 4);
    if (close == std::string_view::npos) {
        return std::nullopt;
    }
    std::string_view middle = line.substr(4, close - 4); // "l[,c] +l[,c]"
    size_t space = middle.find(" +");
    if (space == std::string_view::npos) {
        return std::nullopt;
    }
    std::string_view old_part = middle.substr(0, space);
    std::string_view new_part = middle.substr(space + 2);

    auto split_counts = [](std::string_view part, int& start, int& count) {
        size_t comma = part.find(',');
        std::optional<int> s =
            parse_int(comma == std::string_view::npos ? part : part.substr(0, comma));
        if (!s) {
            return false;
        }
        start = *s;
        if (comma == std::string_view::npos) {
            count = 1;
        } else {
            std::optional<int> c = parse_int(part.substr(comma + 1));
            if (!c) {
                return false;
            }
            count = *c;
        }
        return true;
    };

    HunkHeader header;
    if (!split_counts(old_part, header.old_start, header.old_count) ||
        !split_counts(new_part, header.new_start, header.new_count)) {
        return std::nullopt;
    }
    return header;
}

void add_line(std::vector<LineRange>& ranges, int line) {
    if (!ranges.empty() && ranges.back().end == line - 1) {
        ranges.back().end = line;
    } else {
        ranges.push_back(LineRange{line, line});
    }
}

bool is_file_metadata(std::string_view line) {
    return line.rfind("diff --git", 0) == 0 || line.rfind("index ", 0) == 0 ||
           line.rfind("new file mode", 0) == 0 || line.rfind("deleted file mode", 0) == 0 ||
           line.rfind("old mode", 0) == 0 || line.rfind("new mode", 0) == 0 ||
           line.rfind("similarity index", 0) == 0 || line.rfind("rename from", 0) == 0 ||
           line.rfind("rename to", 0) == 0 || line.rfind("Binary files", 0) == 0;
}

} // namespace

ParsedDiff parse_unified_diff(std::string_view diff_text) {
    ParsedDiff parsed;
    const std::vector<std::string_view> lines = split_lines(diff_text);

    FileChange* current = nullptr;
    size_t i = 0;
    while (i < lines.size()) {
        std::string_view line = lines[i];
        if (line.rfind("--- ", 0) == 0) {
            if (i + 1 >= lines.size() || lines[i + 1].rfind("+++ ", 0) != 0) {
                throw MalformedDiff("'---' header without matching '+++' at line " +
                                    std::to_string(i + 1));
            }
            FileChange change;
            change.pre_path = strip_prefix(line.substr(4));
            change.post_path = strip_prefix(lines[i + 1].substr(4));
            change.is_new = change.pre_path.empty();
            change.is_deleted = change.post_path.empty();
            if (change.pre_path.empty() && change.post_path.empty()) {
                throw MalformedDiff("both sides are /dev/null at line " +
                                    std::to_string(i + 1));
            }
            parsed.files.push_back(std::move(change));
            current = &parsed.files.back();
            i += 2;
            continue;
        }
        if (auto header = parse_hunk_header(line)) {
            if (current == nullptr) {
                throw MalformedDiff("hunk header before any file header at line " +
                                    std::to_string(i + 1));
            }
            int old_line = header->old_start;
            int new_line = header->new_start;
            int old_remaining = header->old_count;
            int new_remaining = header->new_count;
            ++i;
            while (old_remaining > 0 || new_remaining > 0) {
                if (i >= lines.size()) {
                    throw MalformedDiff("hunk body shorter than declared counts");
                }
                std::string_view body = lines[i];
                if (body.rfind("\\", 0) == 0) {
                    ++i; // "\ No newline at end of file"
                    continue;
                }
                const char tag = body.empty() ? ' ' : body.front();
                if (tag == ' ') {
                    if (old_remaining <= 0 || new_remaining <= 0) {
                        throw MalformedDiff("context line overruns hunk counts");
                    }
                    ++old_line;
                    ++new_line;
                    --old_remaining;
                    --new_remaining;
                } else if (tag == '-') {
                    if (old_remaining <= 0) {
                        throw MalformedDiff("deletion overruns hunk counts");
                    }
                    add_line(current->deleted_ranges, old_line);
                    ++old_line;
                    --old_remaining;
                } else if (tag == '+') {
                    if (new_remaining <= 0) {
                        throw MalformedDiff("addition overruns hunk counts");
                    }
                    add_line(current->added_ranges, new_line);
                    ++new_line;
                    --new_remaining;
                } else {
                    throw MalformedDiff("unexpected hunk line at line " +
                                        std::to_string(i + 1));
                }
                ++i;
            }
            continue;
        }
        if (is_file_metadata(line) || line.empty() || line.front() == '\\') {
            ++i;
            continue;
        }
        throw MalformedDiff("unrecognized line " + std::to_string(i + 1) + ": '" +
                            std::string(line.substr(0, 40)) + "'");
    }
    if (parsed.files.empty()) {
        throw MalformedDiff("no file changes found");
    }
    return parsed;
}

} // namespace repoloc::dataset
