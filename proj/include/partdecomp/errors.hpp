#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace partdecomp {

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable tag used by the CLI's JSON error objects.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class SizeLimitError : public Error {
public:
    explicit SizeLimitError(const std::string& detail) : Error("size_limit", detail) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& detail) : Error("domain", detail) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& detail, std::size_t position)
        : Error("parse", detail + " at offset " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class LookupError : public Error {
public:
    explicit LookupError(const std::string& detail) : Error("lookup", detail) {}
};

class ArityError : public Error {
public:
    explicit ArityError(const std::string& detail) : Error("arity", detail) {}
};

class CostLimitError : public Error {
public:
    explicit CostLimitError(const std::string& detail) : Error("cost_limit", detail) {}
};

class HypothesisError : public Error {
public:
    explicit HypothesisError(const std::string& detail) : Error("hypothesis", detail) {}
};

class ExactnessError : public Error {
public:
    explicit ExactnessError(const std::string& detail) : Error("not_exact", detail) {}
};

}  // namespace partdecomp
