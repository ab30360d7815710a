#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace svan {

/// All toolkit errors carry a short machine-readable code next to the
/// human-readable message. CLI maps any Error to exit code 2.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// input text could not be parsed at all
class ParseError : public Error {
public:
    ParseError(const std::string& what) : Error("syntax", what) {}
};

// input parsed but violates a structural invariant
class SemanticError : public Error {
public:
    SemanticError(std::string code, const std::string& what)
        : Error(std::move(code), what) {}
};

// analysis cannot proceed on this input (e.g. ambiguous-routing)
class AnalysisError : public Error {
public:
    AnalysisError(std::string code, const std::string& what)
        : Error(std::move(code), what) {}
};

} // namespace svan
