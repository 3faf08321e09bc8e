#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lru {

/// Machine-readable failure category. The CLI prints the category name and
/// maps it to a distinct exit code.
enum class ErrorKind {
    Config,         // invalid configuration or hyperparameters
    Contract,       // dimension / precondition violation on an API call
    Schema,         // CSV header mismatch
    Parse,          // malformed file contents
    Imputation,     // nothing to impute from
    Coverage,       // weather data does not cover an emission row
    Usage,          // API used out of order (e.g. apply before fit)
    Compatibility,  // checkpoint and data disagree
    Version,        // unsupported checkpoint format version
    Training,       // non-finite loss or gradient
    Io,             // filesystem failure
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exit code used by the CLI for a given category (always nonzero).
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Thrown by bptt_gradient when a window produces a non-finite loss.
class TrainingError : public Error {
public:
    TrainingError(const std::string& message, long batch_index)
        : Error(ErrorKind::Training, message), batch_index_(batch_index) {}

    long batch_index() const noexcept { return batch_index_; }

private:
    long batch_index_;
};

/// Thrown on malformed files; offset is a byte position when known, else -1.
class ParseError : public Error {
public:
    ParseError(const std::string& message, long byte_offset)
        : Error(ErrorKind::Parse, message), byte_offset_(byte_offset) {}

    long byte_offset() const noexcept { return byte_offset_; }

private:
    long byte_offset_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const char* message) {
    if (!condition) {
        throw Error(kind, message);
    }
}

}  // namespace lru
