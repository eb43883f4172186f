#pragma once

#include <stdexcept>
#include <string>

namespace calabi {

// Argument outside the mathematical domain of an operation (log of a
// non-positive jet, point outside a family chart, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Jets with different base points may never be combined.
struct BasePointMismatch : std::logic_error {
    using std::logic_error::logic_error;
};

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::size_t off, const std::string& what)
        : std::runtime_error("parse error at offset " + std::to_string(off) + ": " + what),
          offset(off) {}
};

struct UnknownIdentifier : ParseError {
    UnknownIdentifier(std::size_t off, const std::string& name)
        : ParseError(off, "unknown identifier '" + name + "'") {}
};

struct UnboundConstant : std::runtime_error {
    explicit UnboundConstant(const std::string& name)
        : std::runtime_error("constant '" + name + "' has no binding") {}
};

struct SingularFrame : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BlockStructureViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace calabi
