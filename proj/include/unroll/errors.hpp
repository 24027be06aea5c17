#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace unroll {

// Validation failures carry a short machine-readable name ("separation",
// "dimension_mismatch", ...) in front of the human-readable detail, so tests
// and callers can dispatch on the name without parsing prose.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string name, const std::string& detail)
        : std::runtime_error(name + ": " + detail), name_(std::move(name)) {}

    const std::string& name() const { return name_; }

private:
    std::string name_;
};

} // namespace unroll
