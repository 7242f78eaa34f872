#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "genres/core.hpp"

namespace genres::embed {

struct EmbeddingVector {
    std::vector<double> values;
    std::string provider_id;

    int dim() const { return static_cast<int>(values.size()); }
};

/// Pluggable text-embedding backend. Implementations must be
/// deterministic per text within one provider_id and must return batch
/// results in input order.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string provider_id() const = 0;
    virtual int dim() const = 0;
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

/// Offline deterministic provider: each text hashes to a seeded RNG that
/// fills a unit vector. Identical texts map to identical vectors, and
/// distinct texts collide with negligible probability, which is what the
/// uniqueness/completeness tests rely on.
class MockHashProvider : public EmbeddingProvider {
public:
    explicit MockHashProvider(int dim = 64, std::uint64_t seed = 0);

    std::string provider_id() const override { return id_; }
    int dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

    /// Number of embed_batch calls so far; cache tests count these.
    long long call_count() const { return calls_; }

private:
    int dim_;
    std::uint64_t seed_;
    std::string id_;
    std::atomic_llong calls_{0};
};

/// dot(u, v) / (|u| |v|). Bitwise-equal vectors return exactly 1; the
/// result is clamped to [-1, 1]. Throws on dimension mismatch or a
/// zero-norm input.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Append-only persistent cache keyed by (provider_id, exact text).
/// Records carry a checksum; a corrupted or truncated record is treated
/// as a miss and overwritten by the next store. Writes are serialized,
/// reads hit the in-memory index.
class EmbeddingCache {
public:
    /// In-memory-only cache when path is empty.
    explicit EmbeddingCache(std::string path = "");

    std::optional<EmbeddingVector> lookup(const std::string& provider_id,
                                          const std::string& text) const;
    void store(const std::string& provider_id, const std::string& text,
               const EmbeddingVector& vec);
    std::size_t size() const;

private:
    void load_file();
    void append_record(const std::string& key, const EmbeddingVector& vec);

    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> entries_;
};

/// Embed a list of texts through the cache: hits short-circuit the
/// provider, misses go out in one deduplicated batch, output order
/// matches input order.
std::vector<EmbeddingVector> cached_embed(const std::vector<std::string>& texts,
                                          EmbeddingProvider& provider, EmbeddingCache& cache);

/// Per-element triple embedding: embed subject, relation and object
/// separately, then combine. sum -> element-wise addition (dim d),
/// concat -> [s; r; o] (dim 3d, for when relation direction matters).
EmbeddingVector triple_embedding(const Triple& t, TripleEmbeddingMode mode,
                                 EmbeddingProvider& provider, EmbeddingCache& cache);

/// Batch variant: one provider round-trip for all field texts.
std::vector<EmbeddingVector> triple_embeddings(const std::vector<Triple>& triples,
                                               TripleEmbeddingMode mode,
                                               EmbeddingProvider& provider,
                                               EmbeddingCache& cache);

/// Relation-only embeddings, used by the closed-GRE completeness check.
std::vector<EmbeddingVector> relation_embeddings(const std::vector<Triple>& triples,
                                                 EmbeddingProvider& provider,
                                                 EmbeddingCache& cache);

} // namespace genres::embed
