#pragma once

#include <stdexcept>
#include <string>

namespace lahar {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Dataset-level failures (ingest).
class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line_number, const std::string& detail)
        : Error("malformed line " + std::to_string(line_number) + ": " + detail),
          line_number_(line_number) {}
    std::size_t line_number() const { return line_number_; }

private:
    std::size_t line_number_;
};

class MissingDay : public Error {
public:
    using Error::Error;
};

class UnmappedLabel : public Error {
public:
    using Error::Error;
};

class UnknownSensor : public Error {
public:
    using Error::Error;
};

class EmptyChunk : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

// Model-response parse failures. `kind` is stable text the repair loop and
// tests key off ("NoJsonFound", "MissingKey", "BadTimestamp", ...).
class ResponseParseError : public Error {
public:
    ResponseParseError(std::string kind, const std::string& detail)
        : Error(kind + ": " + detail), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class BackendUnavailable : public BackendError {
public:
    using BackendError::BackendError;
};

class RateLimited : public BackendError {
public:
    RateLimited(const std::string& what, long retry_after_ms)
        : BackendError(what), retry_after_ms_(retry_after_ms) {}
    long retry_after_ms() const { return retry_after_ms_; }

private:
    long retry_after_ms_;
};

class ContextTooLong : public BackendError {
public:
    using BackendError::BackendError;
};

} // namespace lahar
