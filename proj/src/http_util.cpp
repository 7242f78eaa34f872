#include "genres/http_util.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

namespace genres::http {

bool is_retryable_status(int status) {
    return status == 0 || status == 408 || status == 429 || status >= 500;
}

Response request_with_retry(const RequestFn& attempt, const RetryPolicy& policy,
                            const std::string& what) {
    Response last;
    for (int try_index = 0; try_index <= policy.max_retries; ++try_index) {
        if (try_index > 0) {
            auto delay = policy.base_delay * (1LL << (try_index - 1));
            if (delay > policy.max_delay) delay = policy.max_delay;
            const auto server_delay = std::chrono::seconds(last.retry_after_seconds);
            if (server_delay > delay && server_delay <= policy.max_delay)
                delay = std::chrono::duration_cast<std::chrono::milliseconds>(server_delay);
            std::this_thread::sleep_for(delay);
        }
        last = attempt();
        if (!is_retryable_status(last.status)) return last;
    }
    throw TransportError(what + ": giving up after " + std::to_string(policy.max_retries + 1) +
                         " attempts (last status " + std::to_string(last.status) + ")");
}

std::string post_json(const std::string& base_url, const std::string& path,
                      const std::string& body, const std::string& api_key,
                      std::chrono::milliseconds timeout, const RetryPolicy& policy) {
    httplib::Client client(base_url);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));

    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    const Response response = request_with_retry(
        [&]() -> Response {
            Response r;
            auto res = client.Post(path, headers, body, "application/json");
            if (!res) return r; // status 0: transport error
            r.status = res->status;
            r.body = res->body;
            if (res->has_header("Retry-After"))
                r.retry_after_seconds = std::atoi(res->get_header_value("Retry-After").c_str());
            return r;
        },
        policy, "POST " + base_url + path);

    if (response.status < 200 || response.status >= 300)
        throw TransportError("POST " + base_url + path + ": HTTP " +
                             std::to_string(response.status) + ": " +
                             response.body.substr(0, 200));
    return response.body;
}

std::string BackendConfig::api_key_from_env() const {
    if (api_key_env.empty()) return "";
    if (const char* key = std::getenv(api_key_env.c_str())) return key;
    return "";
}

} // namespace genres::http
