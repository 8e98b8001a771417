#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bbo {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A value lies outside its parameter domain, or a point does not belong
/// to the space it is used with.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Mismatched lengths or dimensionalities between paired arguments.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise unusable numeric input.
class DataError : public Error {
public:
    using Error::Error;
};

/// An operation was called in a state that cannot support it.
class StateError : public Error {
public:
    using Error::Error;
};

/// A linear-algebra factorization failed beyond recovery.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration: unknown names, bad hyperparameters, duplicates.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An optimizer broke the suggest/observe contract.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// A child-process message could not be parsed or had the wrong shape.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// A child process failed to answer within its deadline.
class TimeoutError : public Error {
public:
    using Error::Error;
};

/// Random-search statistics too flat to normalize against.
class DegenerateBaselineError : public Error {
public:
    using Error::Error;
};

/// A result grid is missing cells; carries one entry per gap.
class IncompleteGridError : public Error {
public:
    IncompleteGridError(const std::string& msg, std::vector<std::string> gaps)
        : Error(msg), gaps_(std::move(gaps)) {}

    const std::vector<std::string>& gaps() const noexcept { return gaps_; }

private:
    std::vector<std::string> gaps_;
};

} // namespace bbo
