#include "genres/embed_http.hpp"

#include <algorithm>
#include <future>

#include <json.hpp>

namespace genres::embed {

using nlohmann::json;

HttpEmbeddingProvider::HttpEmbeddingProvider(http::BackendConfig config, int max_batch)
    : config_(std::move(config)), max_batch_(max_batch) {
    if (config_.base_url.empty())
        throw ValidationError("http embedding backend: base_url required");
    if (max_batch_ < 1) throw ValidationError("http embedding backend: max_batch must be >= 1");
    api_key_ = config_.api_key_from_env();
}

std::string HttpEmbeddingProvider::provider_id() const {
    return "http:" + config_.model;
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::fetch_chunk(
    const std::vector<std::string>& texts) {
    json body;
    body["model"] = config_.model;
    body["input"] = texts;

    const std::string response_text = http::post_json(
        config_.base_url, "/v1/embeddings", body.dump(), api_key_, config_.timeout,
        config_.retry);

    json response = json::parse(response_text, nullptr, /*allow_exceptions=*/false);
    if (response.is_discarded())
        throw TransportError("embedding backend returned malformed JSON");

    std::vector<EmbeddingVector> out(texts.size());
    try {
        const json& data = response.at("data");
        if (data.size() != texts.size())
            throw TransportError("embedding backend returned " + std::to_string(data.size()) +
                                 " embeddings for " + std::to_string(texts.size()) + " inputs");
        std::size_t running = 0;
        for (const json& item : data) {
            // Responses may arrive out of order; "index" restores it.
            const std::size_t index =
                item.contains("index") ? item.at("index").get<std::size_t>() : running;
            ++running;
            if (index >= out.size())
                throw TransportError("embedding backend returned out-of-range index");
            EmbeddingVector v;
            v.provider_id = provider_id();
            v.values = item.at("embedding").get<std::vector<double>>();
            out[index] = std::move(v);
        }
    } catch (const json::exception&) {
        throw TransportError("embedding backend response missing data[].embedding");
    }

    for (const EmbeddingVector& v : out) {
        if (v.values.empty()) throw TransportError("embedding backend returned empty vector");
    }
    dim_ = static_cast<int>(out.front().values.size());
    return out;
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    if (texts.empty()) return {};

    std::vector<std::vector<std::string>> chunks;
    for (std::size_t i = 0; i < texts.size(); i += max_batch_) {
        const std::size_t end = std::min(texts.size(), i + max_batch_);
        chunks.emplace_back(texts.begin() + i, texts.begin() + end);
    }

    // Bounded fan-out over chunks; results reassembled in input order.
    std::vector<std::vector<EmbeddingVector>> results(chunks.size());
    const int workers = std::max(1, std::min<int>(config_.max_parallel,
                                                  static_cast<int>(chunks.size())));
    std::atomic_size_t next{0};
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < chunks.size(); i = next.fetch_add(1))
                results[i] = fetch_chunk(chunks[i]);
        }));
    }
    for (auto& f : futures) f.get(); // rethrows the first failure

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto& chunk : results)
        for (auto& v : chunk) out.push_back(std::move(v));
    return out;
}

} // namespace genres::embed
