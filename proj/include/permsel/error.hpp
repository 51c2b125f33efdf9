#pragma once

#include <stdexcept>
#include <string>

namespace permsel {

// Malformed or inconsistent input data (CSV cells, tensor shapes, indices).
class DataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A precondition on an argument (fraction, alpha, lambda, ...) was violated.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine failed: singular system, no convergence, limit exceeded.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by the pipeline; carries the name of the stage that failed.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace permsel
