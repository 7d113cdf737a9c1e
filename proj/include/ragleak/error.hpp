#pragma once

#include <stdexcept>
#include <string>

namespace ragleak {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Transport/protocol failure talking to a backend. Retryable errors (HTTP
/// 429/5xx, connection failures) are retried with capped backoff before they
/// surface.
struct BackendError : Error {
    BackendError(const std::string& msg, int http_status_, bool retryable_)
        : Error(msg), http_status(http_status_), retryable(retryable_) {}
    int http_status = 0;
    bool retryable = false;
};

}  // namespace ragleak
