#pragma once

#include <stdexcept>
#include <string>

namespace newscast {

/// Broad failure category, used by the CLI to pick an exit code.
enum class ErrorCategory { config, data, numeric, internal };

/// Root of the library's exception hierarchy. `error_class()` is a stable,
/// machine-parseable slug (e.g. "shape-error") printed by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string error_class, ErrorCategory category, const std::string& message)
        : std::runtime_error(message), class_(std::move(error_class)), category_(category) {}

    const std::string& error_class() const noexcept { return class_; }
    ErrorCategory category() const noexcept { return category_; }

private:
    std::string class_;
    ErrorCategory category_;
};

#define NEWSCAST_DEFINE_ERROR(Name, slug, cat)                                   \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& message) : Error(slug, cat, message) {} \
    }

NEWSCAST_DEFINE_ERROR(ArgumentError, "argument-error", ErrorCategory::config);
NEWSCAST_DEFINE_ERROR(ConfigError, "config-error", ErrorCategory::config);
NEWSCAST_DEFINE_ERROR(ArchitectureMismatchError, "architecture-mismatch", ErrorCategory::config);
NEWSCAST_DEFINE_ERROR(NumericError, "numeric-error", ErrorCategory::numeric);
NEWSCAST_DEFINE_ERROR(ShapeError, "shape-error", ErrorCategory::internal);
NEWSCAST_DEFINE_ERROR(StateError, "state-error", ErrorCategory::internal);
NEWSCAST_DEFINE_ERROR(IoError, "io-error", ErrorCategory::data);
NEWSCAST_DEFINE_ERROR(DegenerateSeriesError, "degenerate-series", ErrorCategory::data);
NEWSCAST_DEFINE_ERROR(DivisionByZeroError, "division-by-zero", ErrorCategory::numeric);

#undef NEWSCAST_DEFINE_ERROR

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class FormatError : public Error {
public:
    FormatError(const std::string& message, std::size_t line = 0)
        : Error("format-error", ErrorCategory::data,
                line ? message + " (line " + std::to_string(line) + ")" : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A sentiment scorer failed on one headline.
class ScorerError : public Error {
public:
    ScorerError(std::string headline_id, const std::string& message)
        : Error("scorer-error", ErrorCategory::data,
                "scorer failed on headline '" + headline_id + "': " + message),
          headline_id_(std::move(headline_id)) {}

    const std::string& headline_id() const noexcept { return headline_id_; }

private:
    std::string headline_id_;
};

/// Process exit code for an error category: 2 config, 3 data, 4 numeric.
int exit_code_for(ErrorCategory category) noexcept;

}  // namespace newscast
