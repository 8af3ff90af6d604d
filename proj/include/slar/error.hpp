#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slar {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// log_model

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingColumn : public Error {
public:
    explicit MissingColumn(const std::string& column)
        : Error("missing column '" + column + "'"), column_(column) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class EmptyLog : public Error {
public:
    EmptyLog() : Error("log contains no observations") {}
};

class DegenerateSplit : public Error {
public:
    using Error::Error;
};

class InvalidSchema : public Error {
public:
    using Error::Error;
};

// abstraction

class UnknownVariable : public Error {
public:
    explicit UnknownVariable(const std::string& name)
        : Error("unknown variable '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class InvalidPredicate : public Error {
public:
    using Error::Error;
};

// pst_learner

class WordTooLong : public Error {
public:
    using Error::Error;
};

class UnseenContext : public Error {
public:
    using Error::Error;
};

class TraceTooShort : public Error {
public:
    using Error::Error;
};

// markov

class PropertyPredicateMissing : public Error {
public:
    using Error::Error;
};

// validation_refinement

class InvalidCounts : public Error {
public:
    using Error::Error;
};

class NoMatchingState : public Error {
public:
    NoMatchingState() : Error("no position of the trace matches a state label") {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateHyperplane : public Error {
public:
    DegenerateHyperplane() : Error("hyperplane has no nonzero weight") {}
};

// cli_io

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& what)
        : Error("syntax error at position " + std::to_string(position) + ": " + what),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace slar
