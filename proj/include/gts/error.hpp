#pragma once

#include <stdexcept>
#include <string>

namespace gts {

// Root of every error raised by the library. Callers that only need to
// report a failure can catch this; the subclasses exist so that tests and
// the batch runner can tell failure classes apart.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Mismatched lengths or dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (window sizes, thresholds, bindings).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A metric that has no value for the given input (empty list, zero mean).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// -- backend errors ---------------------------------------------------------

class BackendError : public Error {
public:
    using Error::Error;
};

/// Transport failed on every attempt.
class BackendUnavailableError : public BackendError {
public:
    using BackendError::BackendError;
};

class TimeoutError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Response (or request) violates the wire schema. Carries the raw body.
class ProtocolError : public BackendError {
public:
    ProtocolError(const std::string& what, std::string raw_body = {})
        : BackendError(what), raw_body_(std::move(raw_body)) {}

    const std::string& raw_body() const noexcept { return raw_body_; }

private:
    std::string raw_body_;
};

/// Integrator returned a category outside taxonomy + "Normal".
class CategoryError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

/// Mock backend has no rule for a request.
class ScriptedMissError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Prompt generator returned an empty static or dynamic list.
class PromptGenerationError : public BackendError {
public:
    PromptGenerationError(const std::string& what, std::string caption)
        : BackendError(what), caption_(std::move(caption)) {}

    const std::string& caption() const noexcept { return caption_; }

private:
    std::string caption_;
};

// -- dataset errors ---------------------------------------------------------

class LoadError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class IngestionError : public Error {
public:
    using Error::Error;
};

class ExtractionError : public Error {
public:
    using Error::Error;
};

// -- harness errors ---------------------------------------------------------

class UsageError : public Error {
public:
    using Error::Error;
};

class EvalError : public Error {
public:
    using Error::Error;
};

}  // namespace gts
