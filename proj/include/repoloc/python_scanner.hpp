#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace repoloc::index {

enum class EntityKind { Class, Function, Method };

std::string_view entity_kind_str(EntityKind kind);

struct PyImport {
    std::string raw_text;                      // statement verbatim, physical lines joined with '\n'
    std::vector<std::string> imported_symbols; // names bound in the module namespace
    std::string source_module;                 // "" for plain `import`, dotted path for `from`
    int line = 1;                              // first physical line, 1-based
};

struct PyEntity {
    EntityKind kind = EntityKind::Function;
    std::string qualified_name; // "name" or "Class.name"
    int start_line = 1;         // includes decorators
    int end_line = 1;
};

struct PyScanResult {
    std::vector<PyImport> imports;
    std::vector<PyEntity> entities;
    int line_count = 0;
    bool parse_error = false;
    std::string parse_error_message;
    bool has_duplicate_names = false;
};

// Structural scan of one Python source file. Extracts module-level imports,
// top-level classes, their methods, and functions (nested or conditional
// defs are recorded under their flat name, first definition wins). The scan
// is tolerant: it never throws; unrecoverable breakage (unterminated triple
// quote, unbalanced brackets, a def/class header without a name or colon)
// sets parse_error and clears the extracted records.
PyScanResult scan_python_source(std::string_view source);

} // namespace repoloc::index
