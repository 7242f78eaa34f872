#include "genres/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace genres::embed {

MockHashProvider::MockHashProvider(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed),
      id_("mock-hash-v1-d" + std::to_string(dim) + "-s" + std::to_string(seed)) {
    if (dim < 1) throw ValidationError("mock provider: dim must be positive");
}

std::vector<EmbeddingVector> MockHashProvider::embed_batch(
    const std::vector<std::string>& texts) {
    ++calls_;
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        std::mt19937_64 rng(fnv1a64(text) ^ seed_);
        EmbeddingVector v;
        v.provider_id = id_;
        v.values.resize(dim_);
        double norm_sq = 0.0;
        for (int i = 0; i < dim_; ++i) {
            v.values[i] = 2.0 * u64_to_unit_double(rng()) - 1.0;
            norm_sq += v.values[i] * v.values[i];
        }
        if (norm_sq == 0.0) {
            v.values[0] = 1.0;
            norm_sq = 1.0;
        }
        const double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (double& x : v.values) x *= inv_norm;
        out.push_back(std::move(v));
    }
    return out;
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim())
        throw ValidationError("cosine_similarity: dimension mismatch (" +
                              std::to_string(u.dim()) + " vs " + std::to_string(v.dim()) + ")");
    if (u.values.empty()) throw ValidationError("cosine_similarity: empty vectors");
    if (u.values == v.values) {
        double norm_sq = 0.0;
        for (double x : u.values) norm_sq += x * x;
        if (norm_sq == 0.0) throw ValidationError("cosine_similarity: zero-norm vector");
        return 1.0;
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        nu += u.values[i] * u.values[i];
        nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine_similarity: zero-norm vector");
    const double sim = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::min(1.0, std::max(-1.0, sim));
}

namespace {

std::string cache_key(const std::string& provider_id, const std::string& text) {
    return provider_id + '\n' + text;
}

std::uint64_t record_checksum(const std::string& key, const std::vector<double>& values) {
    std::uint64_t h = fnv1a64(key);
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        h ^= bits;
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <typename T>
bool read_pod(std::istream& in, T& out) {
    in.read(reinterpret_cast<char*>(&out), sizeof(T));
    return static_cast<bool>(in);
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

constexpr char kCacheMagic[8] = {'G', 'R', 'E', 'C', 'A', 'C', 'H', '1'};

} // namespace

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
    if (!path_.empty()) load_file();
}

void EmbeddingCache::load_file() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return; // no file yet

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) return;

    // Later records for the same key win, matching the append-only
    // overwrite rule. A record failing any check ends the scan (the
    // remainder of the file is unreachable without record framing).
    while (true) {
        std::uint32_t key_len = 0, dim = 0;
        if (!read_pod(in, key_len)) break;
        if (key_len > (1u << 24)) break;
        std::string key(key_len, '\0');
        in.read(key.data(), key_len);
        if (!in || !read_pod(in, dim) || dim == 0 || dim > (1u << 20)) break;
        std::vector<double> values(dim);
        in.read(reinterpret_cast<char*>(values.data()), dim * sizeof(double));
        std::uint64_t checksum = 0;
        if (!in || !read_pod(in, checksum)) break;
        if (checksum != record_checksum(key, values)) continue; // corrupted record: skip as a miss

        const std::size_t sep = key.find('\n');
        if (sep == std::string::npos) continue;
        EmbeddingVector vec;
        vec.provider_id = key.substr(0, sep);
        vec.values = std::move(values);
        entries_[key] = std::move(vec);
    }
}

void EmbeddingCache::append_record(const std::string& key, const EmbeddingVector& vec) {
    const bool fresh = !std::ifstream(path_, std::ios::binary).good();
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot open embedding cache for writing: " + path_);
    if (fresh) out.write(kCacheMagic, sizeof(kCacheMagic));

    write_pod(out, static_cast<std::uint32_t>(key.size()));
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    write_pod(out, static_cast<std::uint32_t>(vec.values.size()));
    out.write(reinterpret_cast<const char*>(vec.values.data()),
              static_cast<std::streamsize>(vec.values.size() * sizeof(double)));
    write_pod(out, record_checksum(key, vec.values));
}

std::optional<EmbeddingVector> EmbeddingCache::lookup(const std::string& provider_id,
                                                      const std::string& text) const {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = entries_.find(cache_key(provider_id, text));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::store(const std::string& provider_id, const std::string& text,
                           const EmbeddingVector& vec) {
    if (vec.values.empty()) throw ValidationError("cache: refusing to store empty vector");
    std::lock_guard<std::mutex> lock(mutex_);
    const std::string key = cache_key(provider_id, text);
    if (!path_.empty()) append_record(key, vec);
    entries_[key] = vec;
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

std::vector<EmbeddingVector> cached_embed(const std::vector<std::string>& texts,
                                          EmbeddingProvider& provider, EmbeddingCache& cache) {
    const std::string pid = provider.provider_id();

    std::vector<std::optional<EmbeddingVector>> out(texts.size());
    std::vector<std::string> misses;
    std::unordered_map<std::string, std::size_t> miss_index;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out[i] = cache.lookup(pid, texts[i]);
        if (!out[i] && !miss_index.count(texts[i])) {
            miss_index.emplace(texts[i], misses.size());
            misses.push_back(texts[i]);
        }
    }
    if (!misses.empty()) {
        const std::vector<EmbeddingVector> fetched = provider.embed_batch(misses);
        if (fetched.size() != misses.size())
            throw TransportError("embedding provider returned " +
                                 std::to_string(fetched.size()) + " vectors for " +
                                 std::to_string(misses.size()) + " texts");
        for (std::size_t i = 0; i < misses.size(); ++i) {
            bool all_zero = true;
            for (double v : fetched[i].values)
                if (v != 0.0) all_zero = false;
            if (fetched[i].values.empty() || all_zero)
                throw TransportError("embedding provider returned an all-zero vector for: " +
                                     misses[i]);
            cache.store(pid, misses[i], fetched[i]);
        }
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (!out[i]) out[i] = fetched[miss_index.at(texts[i])];
        }
    }

    std::vector<EmbeddingVector> result;
    result.reserve(texts.size());
    for (auto& v : out) result.push_back(std::move(*v));
    return result;
}

namespace {

EmbeddingVector combine(const EmbeddingVector& s, const EmbeddingVector& r,
                        const EmbeddingVector& o, TripleEmbeddingMode mode,
                        const std::string& provider_id) {
    EmbeddingVector out;
    out.provider_id = provider_id;
    if (mode == TripleEmbeddingMode::sum) {
        out.values.resize(s.values.size());
        for (std::size_t i = 0; i < s.values.size(); ++i)
            out.values[i] = s.values[i] + r.values[i] + o.values[i];
    } else {
        out.values.reserve(s.values.size() * 3);
        out.values.insert(out.values.end(), s.values.begin(), s.values.end());
        out.values.insert(out.values.end(), r.values.begin(), r.values.end());
        out.values.insert(out.values.end(), o.values.begin(), o.values.end());
    }
    return out;
}

} // namespace

EmbeddingVector triple_embedding(const Triple& t, TripleEmbeddingMode mode,
                                 EmbeddingProvider& provider, EmbeddingCache& cache) {
    const auto vecs = cached_embed({t.subject, t.relation, t.object}, provider, cache);
    return combine(vecs[0], vecs[1], vecs[2], mode, provider.provider_id());
}

std::vector<EmbeddingVector> triple_embeddings(const std::vector<Triple>& triples,
                                               TripleEmbeddingMode mode,
                                               EmbeddingProvider& provider,
                                               EmbeddingCache& cache) {
    std::vector<std::string> texts;
    texts.reserve(triples.size() * 3);
    for (const Triple& t : triples) {
        texts.push_back(t.subject);
        texts.push_back(t.relation);
        texts.push_back(t.object);
    }
    const auto vecs = cached_embed(texts, provider, cache);

    std::vector<EmbeddingVector> out;
    out.reserve(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i)
        out.push_back(
            combine(vecs[3 * i], vecs[3 * i + 1], vecs[3 * i + 2], mode, provider.provider_id()));
    return out;
}

std::vector<EmbeddingVector> relation_embeddings(const std::vector<Triple>& triples,
                                                 EmbeddingProvider& provider,
                                                 EmbeddingCache& cache) {
    std::vector<std::string> texts;
    texts.reserve(triples.size());
    for (const Triple& t : triples) texts.push_back(t.relation);
    return cached_embed(texts, provider, cache);
}

} // namespace genres::embed
