#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "genres/embed_http.hpp"
#include "genres/http_util.hpp"
#include "genres/llm.hpp"

using namespace genres;
using nlohmann::json;

namespace {

/// Loopback HTTP server for backend tests; owns its listener thread.
class TestServer {
public:
    TestServer() = default;

    void start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~TestServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    httplib::Server& server() { return server_; }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

http::RetryPolicy fast_retry(int max_retries) {
    http::RetryPolicy policy;
    policy.max_retries = max_retries;
    policy.base_delay = std::chrono::milliseconds(5);
    policy.max_delay = std::chrono::milliseconds(50);
    return policy;
}

} // namespace

TEST_CASE("post_json retries through 429 and 500 then succeeds") {
    TestServer server;
    std::atomic_int hits{0};
    server.server().Post("/v1/test", [&](const httplib::Request&, httplib::Response& res) {
        const int n = ++hits;
        if (n == 1) {
            res.status = 429;
            res.set_header("Retry-After", "0");
            res.set_content("slow down", "text/plain");
        } else if (n == 2) {
            res.status = 500;
            res.set_content("oops", "text/plain");
        } else {
            res.set_content(R"({"ok":true})", "application/json");
        }
    });
    server.start();

    const std::string body = http::post_json(server.base_url(), "/v1/test", "{}", "",
                                             std::chrono::milliseconds(2000), fast_retry(3));
    CHECK(body == R"({"ok":true})");
    CHECK(hits.load() == 3);
}

TEST_CASE("post_json gives up after exhausting retries") {
    TestServer server;
    std::atomic_int hits{0};
    server.server().Post("/v1/test", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
    });
    server.start();

    CHECK_THROWS_AS(http::post_json(server.base_url(), "/v1/test", "{}", "",
                                    std::chrono::milliseconds(2000), fast_retry(2)),
                    TransportError);
    CHECK(hits.load() == 3); // initial try + 2 retries
}

TEST_CASE("non-retryable client errors fail immediately") {
    TestServer server;
    std::atomic_int hits{0};
    server.server().Post("/v1/test", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    server.start();

    CHECK_THROWS_AS(http::post_json(server.base_url(), "/v1/test", "{}", "",
                                    std::chrono::milliseconds(2000), fast_retry(3)),
                    TransportError);
    CHECK(hits.load() == 1);
}

TEST_CASE("http embedding provider parses an OpenAI-style response") {
    TestServer server;
    server.server().Post("/v1/embeddings", [&](const httplib::Request& req,
                                               httplib::Response& res) {
        const json body = json::parse(req.body);
        CHECK(body.at("model") == "test-embedder");
        json data = json::array();
        int index = 0;
        for (const auto& text : body.at("input")) {
            const double base = static_cast<double>(text.get<std::string>().size());
            data.push_back({{"index", index++}, {"embedding", {base, base + 1.0}}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    server.start();

    http::BackendConfig config;
    config.base_url = server.base_url();
    config.model = "test-embedder";
    config.retry = fast_retry(1);
    embed::HttpEmbeddingProvider provider(config, /*max_batch=*/2);

    const auto out = provider.embed_batch({"a", "bb", "ccc"});
    REQUIRE(out.size() == 3);
    CHECK(out[0].values == std::vector<double>{1.0, 2.0});
    CHECK(out[1].values == std::vector<double>{2.0, 3.0});
    CHECK(out[2].values == std::vector<double>{3.0, 4.0});
    CHECK(provider.dim() == 2);
}

TEST_CASE("http completion client extracts choices[0].text and auth header") {
    TestServer server;
    std::string seen_auth;
    server.server().Post("/v1/completions", [&](const httplib::Request& req,
                                                httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        const json body = json::parse(req.body);
        CHECK(body.at("max_tokens") == 800);
        res.set_content(json{{"choices", {{{"text", "true"}}}}}.dump(), "application/json");
    });
    server.start();

    setenv("GENRES_TEST_API_KEY", "sk-fixture", 1);
    http::BackendConfig config;
    config.base_url = server.base_url();
    config.model = "test-judge";
    config.api_key_env = "GENRES_TEST_API_KEY";
    config.retry = fast_retry(1);
    llm::HttpCompletionClient client(config);

    CHECK(client.complete("is it true?", 800, 0.3) == "true");
    CHECK(seen_auth == "Bearer sk-fixture");
}

TEST_CASE("scripted mock client matches fingerprints, substrings and sequences") {
    auto client = llm::MockScriptedClient::from_json_text(R"({
        "responses": {
            "unique marker": "matched by substring",
            "longer unique marker": "longest wins",
            "seq key": ["first", "second"]
        },
        "default": "fallback"
    })");

    CHECK(client->complete("text with unique marker inside", 10, 0.0) == "matched by substring");
    CHECK(client->complete("text with longer unique marker inside", 10, 0.0) == "longest wins");
    CHECK(client->complete("nothing matches", 10, 0.0) == "fallback");

    CHECK(client->complete("has seq key", 10, 0.0) == "first");
    CHECK(client->complete("has seq key", 10, 0.0) == "second");
    CHECK(client->complete("has seq key", 10, 0.0) == "second"); // holds the last entry

    const std::string fp = llm::prompt_fingerprint("exact prompt");
    auto client2 = llm::MockScriptedClient::from_json_text(
        R"({"responses": {")" + fp + R"(": "by fingerprint"}})");
    CHECK(client2->complete("exact prompt", 10, 0.0) == "by fingerprint");
    CHECK_THROWS_AS(client2->complete("other prompt", 10, 0.0), TransportError);
}
