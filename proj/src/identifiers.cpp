#include "repoloc/identifiers.hpp"

#include <algorithm>
#include <cctype>

namespace repoloc {

namespace {

std::string_view trim(std::string_view s) {
    size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    size_t e = s.size();
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return s.substr(b, e - b);
}

} // namespace

std::string normalize_path(std::string_view raw) {
    std::string path(trim(raw));
    std::replace(path.begin(), path.end(), '\\', '/');
    while (path.rfind("./", 0) == 0) {
        path.erase(0, 2);
    }
    while (!path.empty() && path.front() == '/') {
        path.erase(0, 1);
    }
    return path;
}

NormalizedItem normalize_identifier(std::string_view raw) {
    std::string text(trim(raw));
    std::replace(text.begin(), text.end(), '\\', '/');

    std::string path_part;
    std::string name_part;
    bool has_separator = false;

    if (size_t sep = text.find("::"); sep != std::string::npos) {
        path_part = text.substr(0, sep);
        name_part = text.substr(sep + 2);
        has_separator = true;
    } else if (size_t colon = text.find(':'); colon != std::string::npos) {
        path_part = text.substr(0, colon);
        name_part = text.substr(colon + 1);
        has_separator = true;
    } else if (size_t space = text.find_first_of(" \t"); space != std::string::npos) {
        path_part = text.substr(0, space);
        name_part = text.substr(space + 1);
        has_separator = true;
    } else {
        path_part = text;
    }

    NormalizedItem item;
    item.path = normalize_path(path_part);
    item.name = std::string(trim(name_part));
    if (item.path.empty()) {
        throw MalformedIdentifier(std::string(raw));
    }
    if (has_separator &&
        (item.name.empty() ||
         item.name.find_first_of(" \t:/") != std::string::npos)) {
        throw MalformedIdentifier(std::string(raw));
    }
    return item;
}

} // namespace repoloc
