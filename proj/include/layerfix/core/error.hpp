#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace layerfix {

enum class ErrorKind {
    validation,
    parse,
    config,
    transport,
    domain,
    not_found,
    sandbox,
    unbudgetable,
    io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library. The kind lets callers decide
/// between quarantining a bug, retrying, or aborting.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Transport failures that may succeed on retry (timeouts, 5xx, 429).
class TransientError : public Error {
public:
    explicit TransientError(const std::string& message) : Error(ErrorKind::transport, message) {}
};

}  // namespace layerfix
