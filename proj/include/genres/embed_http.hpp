#pragma once

#include "genres/embed.hpp"
#include "genres/http_util.hpp"

namespace genres::embed {

/// OpenAI-style embeddings endpoint (POST /v1/embeddings with
/// {model, input: [texts]}). Batches are chunked to max_batch texts per
/// request; requests within one embed_batch call run concurrently up to
/// config.max_parallel.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(http::BackendConfig config, int max_batch = 128);

    std::string provider_id() const override;
    /// Dimension as reported by the first response; 0 until then.
    int dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::vector<EmbeddingVector> fetch_chunk(const std::vector<std::string>& texts);

    http::BackendConfig config_;
    std::string api_key_;
    int max_batch_;
    std::atomic_int dim_{0};
};

} // namespace genres::embed
