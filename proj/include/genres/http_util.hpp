#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "genres/core.hpp"

namespace genres::http {

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{250};
    std::chrono::milliseconds max_delay{8000};
};

struct Response {
    int status = 0;
    std::string body;
    /// Retry-After header in seconds, when the server sent one.
    int retry_after_seconds = 0;
};

/// One attempt; returns status 0 on transport error.
using RequestFn = std::function<Response()>;

bool is_retryable_status(int status);

/// Exponential backoff: base * 2^attempt, capped, or the server's
/// Retry-After when larger. Retries on transport errors (status 0),
/// 408, 429 and 5xx. Throws TransportError once retries are exhausted.
Response request_with_retry(const RequestFn& attempt, const RetryPolicy& policy,
                            const std::string& what);

/// POST a JSON body and return the parsed response body. Bearer auth when
/// api_key is non-empty. `base_url` is scheme://host[:port]; `path`
/// starts with '/'.
std::string post_json(const std::string& base_url, const std::string& path,
                      const std::string& body, const std::string& api_key,
                      std::chrono::milliseconds timeout, const RetryPolicy& policy);

/// Connection settings shared by the HTTP-backed embedding provider and
/// completion client. Secrets come from the named environment variable,
/// never from config values.
struct BackendConfig {
    std::string base_url;
    std::string model;
    std::string api_key_env;
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;
    int max_parallel = 4;

    std::string api_key_from_env() const;
};

} // namespace genres::http
