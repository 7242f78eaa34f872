#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "genres/core.hpp"
#include "genres/http_util.hpp"

namespace genres::llm {

/// Text-completion backend shared by the GRE extractor and the judge.
/// Implementations return the completion text or throw TransportError;
/// they never silently truncate below max_new_tokens.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual std::string model_id() const = 0;
    virtual std::string complete(const std::string& prompt, int max_new_tokens,
                                 double temperature) = 0;
};

/// Hex fingerprint of a prompt, usable as a mock-script key ("fp:...").
std::string prompt_fingerprint(const std::string& prompt);

/// Deterministic scripted backend driven by a JSON file:
///   {
///     "responses": {"<key>": "canned text" | ["first call", "second", ...]},
///     "default": "fallback text"
///   }
/// A key matches when it equals the prompt's fingerprint ("fp:<hex>") or
/// occurs as a substring of the prompt (triple text, unit text). The
/// longest substring match wins; ties break lexicographically. Array
/// values are consumed call by call, holding the last entry afterwards,
/// which is how retry behavior is scripted.
class MockScriptedClient : public CompletionClient {
public:
    explicit MockScriptedClient(const std::string& script_path);
    static std::unique_ptr<MockScriptedClient> from_json_text(const std::string& json_text,
                                                              std::string origin = "<inline>");

    std::string model_id() const override { return "mock-scripted"; }
    std::string complete(const std::string& prompt, int max_new_tokens,
                         double temperature) override;

private:
    MockScriptedClient() = default;
    void parse_script(const std::string& json_text, const std::string& origin);

    std::map<std::string, std::vector<std::string>> responses_;
    std::string default_response_;
    bool has_default_ = false;
    std::map<std::string, std::size_t> call_counts_;
    std::mutex mutex_;
};

/// OpenAI-style completions endpoint (POST /v1/completions with
/// {model, prompt, max_tokens, temperature}).
class HttpCompletionClient : public CompletionClient {
public:
    explicit HttpCompletionClient(http::BackendConfig config);

    std::string model_id() const override { return config_.model; }
    std::string complete(const std::string& prompt, int max_new_tokens,
                         double temperature) override;

private:
    http::BackendConfig config_;
    std::string api_key_;
};

} // namespace genres::llm
