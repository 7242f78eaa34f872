#include "genres/llm.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace genres::llm {

using nlohmann::json;

std::string prompt_fingerprint(const std::string& prompt) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(prompt)));
    return std::string("fp:") + buf;
}

MockScriptedClient::MockScriptedClient(const std::string& script_path) {
    std::ifstream in(script_path, std::ios::binary);
    if (!in) throw FormatError("cannot open mock script: " + script_path);
    std::stringstream buf;
    buf << in.rdbuf();
    parse_script(buf.str(), script_path);
}

std::unique_ptr<MockScriptedClient> MockScriptedClient::from_json_text(
    const std::string& json_text, std::string origin) {
    std::unique_ptr<MockScriptedClient> client(new MockScriptedClient());
    client->parse_script(json_text, origin);
    return client;
}

void MockScriptedClient::parse_script(const std::string& json_text, const std::string& origin) {
    json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        throw FormatError("mock script is not a JSON object: " + origin);

    const json responses = j.contains("responses") ? j.at("responses") : json::object();
    for (const auto& [key, value] : responses.items()) {
        if (value.is_string()) {
            responses_[key] = {value.get<std::string>()};
        } else if (value.is_array()) {
            std::vector<std::string> seq;
            for (const auto& item : value) seq.push_back(item.get<std::string>());
            if (seq.empty()) throw FormatError("mock script: empty sequence for key " + key);
            responses_[key] = std::move(seq);
        } else {
            throw FormatError("mock script: value for key '" + key +
                              "' must be a string or array of strings");
        }
    }
    if (j.contains("default")) {
        default_response_ = j.at("default").get<std::string>();
        has_default_ = true;
    }
}

std::string MockScriptedClient::complete(const std::string& prompt, int /*max_new_tokens*/,
                                         double /*temperature*/) {
    std::lock_guard<std::mutex> lock(mutex_);

    const std::string fp = prompt_fingerprint(prompt);
    const std::string* best_key = nullptr;
    const auto fp_it = responses_.find(fp);
    if (fp_it != responses_.end()) {
        best_key = &fp_it->first;
    } else {
        // Longest substring key wins; std::map order makes ties
        // lexicographic and therefore deterministic.
        std::size_t best_len = 0;
        for (const auto& [key, seq] : responses_) {
            if (key.size() > best_len && prompt.find(key) != std::string::npos) {
                best_key = &key;
                best_len = key.size();
            }
        }
    }

    if (!best_key) {
        if (has_default_) return default_response_;
        throw TransportError("mock script has no response for prompt " + fp);
    }

    const std::vector<std::string>& seq = responses_.at(*best_key);
    const std::size_t call = call_counts_[*best_key]++;
    return seq[std::min(call, seq.size() - 1)];
}

HttpCompletionClient::HttpCompletionClient(http::BackendConfig config)
    : config_(std::move(config)) {
    if (config_.base_url.empty())
        throw ValidationError("http completion backend: base_url required");
    api_key_ = config_.api_key_from_env();
}

std::string HttpCompletionClient::complete(const std::string& prompt, int max_new_tokens,
                                           double temperature) {
    json body;
    body["model"] = config_.model;
    body["prompt"] = prompt;
    body["max_tokens"] = max_new_tokens;
    body["temperature"] = temperature;

    const std::string response_text = http::post_json(
        config_.base_url, "/v1/completions", body.dump(), api_key_, config_.timeout,
        config_.retry);

    json response = json::parse(response_text, nullptr, /*allow_exceptions=*/false);
    if (response.is_discarded())
        throw TransportError("completion backend returned malformed JSON");
    try {
        return response.at("choices").at(0).at("text").get<std::string>();
    } catch (const json::exception&) {
        throw TransportError("completion backend response missing choices[0].text");
    }
}

} // namespace genres::llm
