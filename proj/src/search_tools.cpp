#include "repoloc/search_tools.hpp"

#include <algorithm>
#include <sstream>

namespace repoloc::tools {

namespace {

struct ToolSignature {
    std::string_view name;
    std::vector<std::string_view> parameters;
};

const std::vector<ToolSignature>& signatures() {
    static const std::vector<ToolSignature> table = {
        {"GetRepoStructure", {}},
        {"GetImportOfFile", {"file"}},
        {"SearchClass", {"file", "class"}},
        {"SearchFunction", {"file", "function"}},
        {"SearchClassMethod", {"file", "class", "method"}},
        {"Exit", {}},
    };
    return table;
}

const ToolSignature* find_signature(std::string_view name) {
    for (const ToolSignature& sig : signatures()) {
        if (sig.name == name) {
            return &sig;
        }
    }
    return nullptr;
}

std::string known_tools_list() {
    std::string out;
    for (const ToolSignature& sig : signatures()) {
        if (!out.empty()) {
            out += ", ";
        }
        out += sig.name;
    }
    return out;
}

Validity invalid(std::string reason) {
    return Validity{false, std::move(reason)};
}

// entity lookup shared by validation and dispatch so the two can never
// disagree about what exists
const index::CodeEntity* lookup(const index::RepoIndex& idx, const std::string& file,
                                const std::string& name, std::string& error_out) {
    try {
        return &index::resolve_entity(idx, file, name);
    } catch (const index::FileNotInIndex& e) {
        error_out = e.what();
    } catch (const index::EntityNotFound& e) {
        error_out = e.what();
    }
    return nullptr;
}

std::string entity_kind_word(const ToolSignature& sig) {
    if (sig.name == "SearchClass") {
        return "class";
    }
    if (sig.name == "SearchFunction") {
        return "function";
    }
    return "method";
}

} // namespace

Validity validate_call(const ToolCall& call, const index::RepoIndex& index) {
    const ToolSignature* sig = find_signature(call.tool_name);
    if (sig == nullptr) {
        return invalid("unknown tool '" + call.tool_name +
                       "'. Available tools: " + known_tools_list() + ".");
    }
    for (std::string_view param : sig->parameters) {
        if (call.arguments.count(std::string(param)) == 0) {
            return invalid("missing argument '" + std::string(param) + "' for " +
                           std::string(sig->name) + ".");
        }
    }
    for (const auto& [key, value] : call.arguments) {
        if (std::find(sig->parameters.begin(), sig->parameters.end(), key) ==
            sig->parameters.end()) {
            return invalid("unexpected argument '" + key + "' for " + std::string(sig->name) +
                           ".");
        }
    }
    if (sig->name == "GetRepoStructure" || sig->name == "Exit") {
        return Validity{true, ""};
    }

    const std::string& file = call.arguments.at("file");
    if (index.find_file(file) == nullptr) {
        return invalid("file '" + file + "' not found in repository.");
    }
    std::string wanted;
    if (sig->name == "GetImportOfFile") {
        return Validity{true, ""};
    }
    if (sig->name == "SearchClass") {
        wanted = call.arguments.at("class");
    } else if (sig->name == "SearchFunction") {
        wanted = call.arguments.at("function");
    } else {
        wanted = call.arguments.at("class") + "." + call.arguments.at("method");
    }
    std::string lookup_error;
    if (lookup(index, file, wanted, lookup_error) == nullptr) {
        return invalid(lookup_error);
    }
    return Validity{true, ""};
}

ToolResult dispatch(const ToolCall& call, const index::RepoIndex& index,
                    const ToolOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    ToolResult result;

    const Validity verdict = validate_call(call, index);
    if (!verdict.valid) {
        result.status = ToolStatus::Error;
        result.valid_call = false;
        result.observation = "Error: " + verdict.reason;
    } else {
        result.valid_call = true;
        const std::string& name = call.tool_name;
        if (name == "GetRepoStructure") {
            result.observation = index::render_structure(index, options.structure_max_depth);
        } else if (name == "GetImportOfFile") {
            const std::string& file = call.arguments.at("file");
            const auto& imports = index::imports_of(index, file);
            if (imports.empty()) {
                result.observation = "File '" + file + "' has no module-level imports.";
            } else {
                std::string text = "Imports of '" + file + "':";
                for (const auto& imp : imports) {
                    text += "\n" + imp.raw_text;
                }
                result.observation = text;
            }
        } else if (name == "Exit") {
            result.exit_requested = true;
        } else {
            const std::string& file = call.arguments.at("file");
            std::string wanted = name == "SearchClassMethod"
                                     ? call.arguments.at("class") + "." +
                                           call.arguments.at("method")
                                     : call.arguments.at(name == "SearchClass" ? "class"
                                                                               : "function");
            const index::CodeEntity& entity = index::resolve_entity(index, file, wanted);
            std::ostringstream text;
            text << "Content of '" << entity.qualified_name << "' in '" << file << "' (lines "
                 << entity.start_line << "-" << entity.end_line << "):\n"
                 << truncate_lines(entity.source_text, options.max_observation_lines);
            result.observation = text.str();
        }
    }
    result.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - started);
    return result;
}

const std::string& tool_catalog() {
    static const std::string catalog =
        "Available repository search tools (exactly one call per turn):\n"
        "\n"
        "GetRepoStructure()\n"
        "  Get the repository file structure.\n"
        "GetImportOfFile(file)\n"
        "  Get the imports of the given file.\n"
        "SearchClass(file, class)\n"
        "  Search for the content of the class in the file.\n"
        "SearchFunction(file, function)\n"
        "  Search for the content of the function in the file.\n"
        "SearchClassMethod(file, class, method)\n"
        "  Search for the content of the method in the class of the file.\n"
        "Exit()\n"
        "  Exit once you have found all the information needed.\n"
        "\n"
        "Call syntax: reply with your reasoning, then exactly one fenced json block\n"
        "holding a single object, for example:\n"
        "\n"
        "```json\n"
        "{\"tool\": \"SearchFunction\", \"args\": {\"file\": \"pkg/mod.py\", \"function\": \"name\"}}\n"
        "```\n"
        "\n"
        "Tools without parameters take an empty args object.";
    return catalog;
}

std::string truncate_lines(const std::string& text, int max_lines) {
    if (max_lines < 2) {
        max_lines = 2;
    }
    std::vector<std::string_view> lines;
    size_t start = 0;
    std::string_view view(text);
    while (start <= view.size()) {
        size_t nl = view.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(view.substr(start));
            break;
        }
        lines.push_back(view.substr(start, nl - start));
        start = nl + 1;
    }
    if (lines.size() <= static_cast<size_t>(max_lines)) {
        return text;
    }
    const size_t head = static_cast<size_t>(max_lines) / 2;
    const size_t tail = static_cast<size_t>(max_lines) - head;
    const size_t elided = lines.size() - head - tail;
    std::string out;
    for (size_t i = 0; i < head; ++i) {
        out += std::string(lines[i]) + "\n";
    }
    out += "... (" + std::to_string(elided) + " lines elided) ...";
    for (size_t i = lines.size() - tail; i < lines.size(); ++i) {
        out += "\n" + std::string(lines[i]);
    }
    return out;
}

double success_rate(std::span<const ToolResult> results) {
    if (results.empty()) {
        return 1.0;
    }
    size_t valid = 0;
    for (const ToolResult& result : results) {
        if (result.valid_call) {
            ++valid;
        }
    }
    return static_cast<double>(valid) / static_cast<double>(results.size());
}

} // namespace repoloc::tools
