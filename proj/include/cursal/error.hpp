#pragma once

#include <stdexcept>
#include <string>

namespace cursal {

// Base for every error the library raises. `code()` is the stable
// machine-readable tag used by the HTTP layer and the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// A scalar argument is outside its admissible range.
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& message) : Error("parameter_error", message) {}
};

/// Two inputs that must agree in dimensions do not.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message) : Error("shape_error", message) {}
};

/// A metric was asked about a map with no mass.
class UndefinedMetricError : public Error {
public:
    explicit UndefinedMetricError(const std::string& message)
        : Error("undefined_metric", message) {}
};

/// Inputs that should describe one entity describe several.
class ConsistencyError : public Error {
public:
    explicit ConsistencyError(const std::string& message) : Error("consistency_error", message) {}
};

/// Malformed text input. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error("parse_error",
                line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io_error", message) {}
};

} // namespace cursal
