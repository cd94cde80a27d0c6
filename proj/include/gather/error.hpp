#pragma once

#include <stdexcept>
#include <string>

namespace gather {

// Every failure mode carries a kind so tests can assert on the exact cause.
enum class ErrorKind {
    DisconnectedInput,
    DuplicateEdge,
    SelfLoop,
    BadPortAssignment,
    BadParameters,
    InvalidStrategyForTopology,
    PebbleBudgetExceeded,
    PebbleMissing,
    IllegalPort,
    ProtocolInvariantViolation,
    DegreeMismatch,
    BadCandidate,
    MalformedTrace,
    ConfigError,
};

const char* to_string(ErrorKind k);

class SimError : public std::runtime_error {
public:
    SimError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw SimError(kind, what);
}

}  // namespace gather
