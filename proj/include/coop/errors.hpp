#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace coop {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (n = 0, a < 0, beta <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Unknown actor, dependum, or link key.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Derivative requested at a_i = 0 where the power or geometric-mean form is not differentiable.
class BoundaryDerivative : public Error {
public:
    using Error::Error;
};

/// Problem too large for an exact method, or a sweep grid above its cap.
class SizeError : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0)
        : Error(message), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct Violation {
    std::string code;
    std::string message;

    bool operator==(const Violation&) const = default;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(summarize(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& v) {
        std::string out = "validation failed";
        for (const auto& item : v) {
            out += "; ";
            out += item.code;
            out += ": ";
            out += item.message;
        }
        return out;
    }

    std::vector<Violation> violations_;
};

}  // namespace coop
