#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace itmdp {

// Base for every domain error raised by the library. The CLI maps the
// concrete subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that breaks a model or parameter constraint.
class InvalidInput : public Error {
public:
    explicit InvalidInput(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

// Unreadable or ill-formed input document.
class ParseError : public Error {
public:
    using Error::Error;
};

// The chain induced by a policy has more than one recurrent class.
class MultichainError : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double last_span)
        : Error(what), last_span_(last_span) {}
    double last_span() const noexcept { return last_span_; }

private:
    double last_span_;
};

// An observation with zero likelihood under the current belief.
class ImpossibleObservation : public Error {
public:
    using Error::Error;
};

// Request too large to honour (e.g. policy enumeration beyond the size guard).
class SizeLimitExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace itmdp
