#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace repoloc {

// Base for every classified failure. `code()` is a stable machine-readable
// tag; `what()` is the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace repoloc
