#pragma once

// Error taxonomy shared by the library and the CLI. The CLI maps these to
// exit codes: parse_error -> 2, invariant_violation -> 3, guard_refusal -> 4.

#include <stdexcept>
#include <string>

namespace affimp {

class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller passed something outside an operation's contract.
class invalid_parameter : public error {
public:
    explicit invalid_parameter(const std::string& msg) : error(msg) {}
};

// Operation called in a state its contract forbids (e.g. certifying a
// non-member).
class invalid_state : public error {
public:
    explicit invalid_state(const std::string& msg) : error(msg) {}
};

// Malformed input file. Carries a human-readable position when known.
class parse_error : public error {
public:
    explicit parse_error(const std::string& msg) : error(msg) {}
};

// A configurable resource guard (enumeration cap, expansion bound) refused
// the request. Not a bug: the work was declined, not attempted.
class guard_refusal : public error {
public:
    explicit guard_refusal(const std::string& msg) : error(msg) {}
};

// An internal consistency check failed. Always a bug.
class invariant_violation : public error {
public:
    explicit invariant_violation(const std::string& msg) : error(msg) {}
};

}  // namespace affimp
