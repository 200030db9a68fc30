#pragma once

#include "repoloc/error.hpp"

#include <compare>
#include <string>
#include <string_view>

namespace repoloc {

class MalformedIdentifier : public Error {
public:
    explicit MalformedIdentifier(const std::string& raw)
        : Error("malformed_identifier", "malformed identifier: '" + raw + "'") {}
};

// "<relative_path>::<qualified_name>" — the canonical spelling of one
// function or method location.
struct FunctionIdentifier {
    std::string relative_path;
    std::string qualified_name;

    std::string to_string() const { return relative_path + "::" + qualified_name; }
    auto operator<=>(const FunctionIdentifier&) const = default;
};

// Path cleanup only: trims, backslashes to slashes, strips "./" and leading
// slashes. Never throws; an empty result means the input was effectively empty.
std::string normalize_path(std::string_view raw);

// Canonicalized prediction/ground-truth item: a function identifier when
// `name` is non-empty, otherwise a bare file path.
struct NormalizedItem {
    std::string path;
    std::string name;

    bool is_function() const { return !name.empty(); }
    std::string canonical() const { return name.empty() ? path : path + "::" + name; }
};

// Accepts "path::name", "path:name", "path name" and bare paths; throws
// MalformedIdentifier when either side of a separator is empty.
NormalizedItem normalize_identifier(std::string_view raw);

} // namespace repoloc
