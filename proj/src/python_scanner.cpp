#include "repoloc/python_scanner.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace repoloc::index {

std::string_view entity_kind_str(EntityKind kind) {
    switch (kind) {
    case EntityKind::Class: return "class";
    case EntityKind::Function: return "function";
    case EntityKind::Method: return "method";
    }
    return "function";
}

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// One logical line: physical lines joined across bracket/backslash/string
// continuations. `masked` has comments stripped and string interiors
// blanked so structural scanning never trips on quoted text.
struct LogicalLine {
    int first_line = 0;
    int last_line = 0;
    int indent = 0;
    std::string raw;
    std::string masked;
    bool starts_blank = true; // only whitespace/comments
};

int indent_columns(std::string_view line) {
    int col = 0;
    for (char c : line) {
        if (c == ' ') {
            ++col;
        } else if (c == '\t') {
            col += 8 - (col % 8);
        } else {
            break;
        }
    }
    return col;
}

struct Assembler {
    std::vector<LogicalLine> lines;
    bool in_triple = false;
    char triple_quote = '"';
    int bracket_depth = 0;
    bool error = false;
    std::string error_message;

    // current pending logical line
    bool pending = false;
    LogicalLine current;
    bool explicit_continuation = false;

    void feed(std::string_view line, int line_number) {
        if (!pending) {
            current = LogicalLine{};
            current.first_line = line_number;
            current.indent = indent_columns(line);
            pending = true;
        } else {
            current.raw += '\n';
            current.masked += '\n';
        }
        current.last_line = line_number;
        current.raw.append(line);

        explicit_continuation = false;
        scan_physical(line);

        bool continues = in_triple || bracket_depth > 0 || explicit_continuation;
        if (!continues) {
            bool blank = true;
            for (char c : current.masked) {
                if (!std::isspace(static_cast<unsigned char>(c))) {
                    blank = false;
                    break;
                }
            }
            current.starts_blank = blank;
            if (!blank) {
                lines.push_back(current);
            }
            pending = false;
        }
    }

    void finish() {
        if (in_triple) {
            error = true;
            error_message = "unterminated triple-quoted string";
            return;
        }
        if (bracket_depth > 0) {
            error = true;
            error_message = "unbalanced brackets at end of file";
            return;
        }
        if (pending) {
            // trailing backslash on the last line; accept what we have
            bool blank = current.masked.find_first_not_of(" \t\r\n") == std::string::npos;
            if (!blank) {
                lines.push_back(current);
            }
            pending = false;
        }
    }

private:
    void scan_physical(std::string_view line) {
        size_t i = 0;
        const size_t n = line.size();
        auto triple_at = [&](size_t pos, char quote) {
            return pos + 2 < n && line[pos] == quote && line[pos + 1] == quote &&
                   line[pos + 2] == quote;
        };
        if (in_triple) {
            // consume until the closing triple quote, masking everything
            while (i < n) {
                if (line[i] == '\\' && i + 1 < n) {
                    current.masked += "  ";
                    i += 2;
                    continue;
                }
                if (triple_at(i, triple_quote)) {
                    current.masked.append(3, triple_quote);
                    i += 3;
                    in_triple = false;
                    break;
                }
                current.masked += ' ';
                ++i;
            }
            if (in_triple) {
                return; // whole line swallowed by the string
            }
        }
        while (i < n) {
            char c = line[i];
            if (c == '#') {
                // comment to end of physical line
                break;
            }
            if (c == '\'' || c == '"') {
                if (triple_at(i, c)) {
                    triple_quote = c;
                    current.masked.append(3, c);
                    i += 3;
                    // scan for the closing triple on this same line
                    bool closed = false;
                    while (i < n) {
                        if (line[i] == '\\' && i + 1 < n) {
                            current.masked += "  ";
                            i += 2;
                            continue;
                        }
                        if (triple_at(i, triple_quote)) {
                            current.masked.append(3, triple_quote);
                            i += 3;
                            closed = true;
                            break;
                        }
                        current.masked += ' ';
                        ++i;
                    }
                    if (!closed) {
                        in_triple = true;
                        return;
                    }
                    continue;
                }
                // single-quoted string: ends on this physical line (an
                // unterminated one is closed at EOL rather than flagged)
                char quote = c;
                current.masked += quote;
                ++i;
                while (i < n) {
                    if (line[i] == '\\' && i + 1 < n) {
                        current.masked += "  ";
                        i += 2;
                        continue;
                    }
                    if (line[i] == quote) {
                        current.masked += quote;
                        ++i;
                        break;
                    }
                    current.masked += ' ';
                    ++i;
                }
                continue;
            }
            if (c == '(' || c == '[' || c == '{') {
                ++bracket_depth;
            } else if (c == ')' || c == ']' || c == '}') {
                if (bracket_depth > 0) {
                    --bracket_depth;
                }
            } else if (c == '\\' && i + 1 == n) {
                explicit_continuation = true;
                current.masked += ' ';
                ++i;
                continue;
            }
            current.masked += c;
            ++i;
        }
    }
};

std::vector<std::string> split_physical_lines(std::string_view source) {
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

std::string_view trimmed(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool starts_with_keyword(std::string_view text, std::string_view kw) {
    if (text.substr(0, kw.size()) != kw) {
        return false;
    }
    return text.size() == kw.size() || !is_ident_char(text[kw.size()]);
}

std::optional<std::string> ident_after(std::string_view text, size_t pos) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) {
        ++pos;
    }
    if (pos >= text.size() || !is_ident_start(text[pos])) {
        return std::nullopt;
    }
    size_t end = pos;
    while (end < text.size() && is_ident_char(text[end])) {
        ++end;
    }
    return std::string(text.substr(pos, end - pos));
}

// ':' at bracket depth zero anywhere after the header keyword
bool has_toplevel_colon(std::string_view masked) {
    int depth = 0;
    for (char c : masked) {
        if (c == '(' || c == '[' || c == '{') {
            ++depth;
        } else if (c == ')' || c == ']' || c == '}') {
            --depth;
        } else if (c == ':' && depth == 0) {
            return true;
        }
    }
    return false;
}

// `import a.b.c as d, e` — returns bound names; `from` handled separately
void parse_plain_import(std::string_view body, std::vector<std::string>& symbols) {
    size_t pos = 0;
    while (pos < body.size()) {
        size_t comma = body.find(',', pos);
        std::string_view part = trimmed(body.substr(pos, comma == std::string_view::npos
                                                             ? std::string_view::npos
                                                             : comma - pos));
        if (!part.empty()) {
            size_t as_pos = part.rfind(" as ");
            if (as_pos != std::string_view::npos) {
                symbols.emplace_back(trimmed(part.substr(as_pos + 4)));
            } else {
                size_t dot = part.find('.');
                symbols.emplace_back(trimmed(part.substr(0, dot)));
            }
        }
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
}

void parse_from_targets(std::string_view body, std::vector<std::string>& symbols) {
    std::string cleaned;
    cleaned.reserve(body.size());
    for (char c : body) {
        if (c == '(' || c == ')' || c == '\n' || c == '\r') {
            cleaned += ' ';
        } else {
            cleaned += c;
        }
    }
    size_t pos = 0;
    while (pos < cleaned.size()) {
        size_t comma = cleaned.find(',', pos);
        std::string_view part = trimmed(std::string_view(cleaned).substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!part.empty()) {
            size_t as_pos = part.rfind(" as ");
            if (as_pos != std::string_view::npos) {
                symbols.emplace_back(trimmed(part.substr(as_pos + 4)));
            } else {
                symbols.emplace_back(part);
            }
        }
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
}

struct Scope {
    EntityKind kind;
    bool top_level_class = false;
    std::string name;
    int indent = 0;
    int entity_slot = -1; // index into result.entities, -1 when not indexed
};

} // namespace

PyScanResult scan_python_source(std::string_view source) {
    PyScanResult result;
    const std::vector<std::string> physical = split_physical_lines(source);
    result.line_count = static_cast<int>(physical.size());

    Assembler assembler;
    for (size_t i = 0; i < physical.size(); ++i) {
        assembler.feed(physical[i], static_cast<int>(i) + 1);
    }
    assembler.finish();
    if (assembler.error) {
        result.parse_error = true;
        result.parse_error_message = assembler.error_message;
        return result;
    }

    std::vector<Scope> stack;
    std::map<std::string, int> slot_by_name;
    std::optional<int> pending_decorator_start;
    int prev_logical_end = 0;

    auto close_scopes_down_to = [&](int indent) {
        while (!stack.empty() && stack.back().indent >= indent) {
            const Scope scope = stack.back();
            stack.pop_back();
            if (scope.entity_slot >= 0) {
                result.entities[static_cast<size_t>(scope.entity_slot)].end_line =
                    prev_logical_end;
            }
        }
    };

    auto record_entity = [&](EntityKind kind, const std::string& qualified,
                             int start_line) -> int {
        auto it = slot_by_name.find(qualified);
        if (it != slot_by_name.end()) {
            result.has_duplicate_names = true;
            return -1; // first definition wins
        }
        PyEntity entity;
        entity.kind = kind;
        entity.qualified_name = qualified;
        entity.start_line = start_line;
        entity.end_line = start_line;
        result.entities.push_back(entity);
        int slot = static_cast<int>(result.entities.size()) - 1;
        slot_by_name.emplace(qualified, slot);
        return slot;
    };

    for (const LogicalLine& line : assembler.lines) {
        close_scopes_down_to(line.indent);
        std::string_view code = trimmed(line.masked);

        if (!code.empty() && code.front() == '@') {
            if (!pending_decorator_start) {
                pending_decorator_start = line.first_line;
            }
            prev_logical_end = line.last_line;
            continue;
        }

        bool is_async = false;
        std::string_view header = code;
        if (starts_with_keyword(header, "async")) {
            is_async = true;
            header = trimmed(header.substr(5));
        }

        if (starts_with_keyword(header, "def")) {
            auto name = ident_after(header, 3);
            if (!name || !has_toplevel_colon(header)) {
                result.parse_error = true;
                result.parse_error_message = "malformed def header at line " +
                                             std::to_string(line.first_line);
                break;
            }
            int start = pending_decorator_start.value_or(line.first_line);
            pending_decorator_start.reset();

            EntityKind kind = EntityKind::Function;
            std::string qualified = *name;
            if (!stack.empty() && stack.back().kind == EntityKind::Class &&
                stack.back().top_level_class) {
                kind = EntityKind::Method;
                qualified = stack.back().name + "." + *name;
            }
            int slot = record_entity(kind, qualified, start);
            stack.push_back(Scope{EntityKind::Function, false, *name, line.indent, slot});
        } else if (starts_with_keyword(header, "class") && !is_async) {
            auto name = ident_after(header, 5);
            if (!name || !has_toplevel_colon(header)) {
                result.parse_error = true;
                result.parse_error_message = "malformed class header at line " +
                                             std::to_string(line.first_line);
                break;
            }
            int start = pending_decorator_start.value_or(line.first_line);
            pending_decorator_start.reset();

            bool top_level = stack.empty();
            int slot = top_level ? record_entity(EntityKind::Class, *name, start) : -1;
            stack.push_back(Scope{EntityKind::Class, top_level, *name, line.indent, slot});
        } else {
            pending_decorator_start.reset();
            if (line.indent == 0 && stack.empty()) {
                if (starts_with_keyword(header, "import")) {
                    PyImport record;
                    record.raw_text = line.raw;
                    record.line = line.first_line;
                    parse_plain_import(header.substr(6), record.imported_symbols);
                    result.imports.push_back(std::move(record));
                } else if (starts_with_keyword(header, "from")) {
                    size_t import_kw = header.find(" import ");
                    // `from x import(y)` also legal; search the keyword loosely
                    if (import_kw == std::string_view::npos) {
                        size_t alt = header.find("import", 4);
                        if (alt != std::string_view::npos) {
                            import_kw = alt - 1;
                        }
                    }
                    if (import_kw != std::string_view::npos) {
                        PyImport record;
                        record.raw_text = line.raw;
                        record.line = line.first_line;
                        record.source_module =
                            std::string(trimmed(header.substr(4, import_kw - 4 + 1)));
                        parse_from_targets(header.substr(import_kw + 8),
                                           record.imported_symbols);
                        result.imports.push_back(std::move(record));
                    }
                }
            }
        }
        prev_logical_end = line.last_line;
    }

    close_scopes_down_to(0);

    if (result.parse_error) {
        result.entities.clear();
        result.imports.clear();
        result.has_duplicate_names = false;
    }
    return result;
}

} // namespace repoloc::index
