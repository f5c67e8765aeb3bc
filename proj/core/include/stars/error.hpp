#pragma once

#include <stdexcept>
#include <string>

namespace stars {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (files, model output). Carries enough context to
/// locate the offending record; parse errors from model output keep the raw
/// text for diagnostics.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::string raw = {})
        : Error(what), raw_text_(std::move(raw)) {}

    const std::string& raw_text() const { return raw_text_; }

private:
    std::string raw_text_;
};

/// Violated invariant or precondition on otherwise well-formed data.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Bad or incomplete run configuration (missing paths, out-of-range values).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Completion backend failure that survived the retry policy.
class GatewayError : public Error {
public:
    explicit GatewayError(const std::string& what, int attempts = 0)
        : Error(what), attempts_(attempts) {}

    int attempts() const { return attempts_; }

private:
    int attempts_ = 0;
};

/// Embedding provider failure (transport, dimension mismatch).
class ProviderError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (unreadable input, unwritable output).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace stars
