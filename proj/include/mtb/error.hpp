#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mtb {

// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Invalid or incomplete configuration (including non-retryable auth failures).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A value violated a domain invariant. May carry several defects at once.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message)
        : Error(message), defects_{message} {}
    explicit ValidationError(std::vector<std::string> defects);

    const std::vector<std::string>& defects() const noexcept { return defects_; }

private:
    std::vector<std::string> defects_;
};

// A model reply did not follow the expected response format.
class ParseError : public Error {
public:
    using Error::Error;
};

// A provider kept failing after all retries.
class ProviderUnavailable : public Error {
public:
    ProviderUnavailable(std::string provider_id, const std::string& detail)
        : Error("provider '" + provider_id + "' unavailable: " + detail),
          provider_id_(std::move(provider_id)) {}

    const std::string& provider_id() const noexcept { return provider_id_; }

private:
    std::string provider_id_;
};

// Stored data does not match what was expected (corrupt cache entry, conflicting put).
class IntegrityError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mtb
