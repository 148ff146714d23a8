#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cyscm {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed model file text. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

// Well-formed JSON that does not describe a model.
class SchemaError : public Error {
public:
    SchemaError(const std::string& field, const std::string& what)
        : Error("schema error at '" + field + "': " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Errors from the mechanism formula language. Position is a 0-based character offset.
class ExprError : public Error {
public:
    enum class Kind { Syntax, UnknownIdentifier, UnknownFunction };

    ExprError(Kind kind, const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), kind_(kind), position_(position) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t position() const noexcept { return position_; }

private:
    Kind kind_;
    std::size_t position_;
};

class NonLinearModel : public Error {
public:
    using Error::Error;
};

class Uncertifiable : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class KappaNotContractive : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class DegenerateNoise : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class InvalidIntervention : public Error {
public:
    using Error::Error;
};

}  // namespace cyscm
