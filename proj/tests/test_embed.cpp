#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "genres/embed.hpp"

using namespace genres;
using namespace genres::embed;

namespace {

EmbeddingVector vec(std::vector<double> values) {
    EmbeddingVector v;
    v.values = std::move(values);
    v.provider_id = "test";
    return v;
}

std::string tmp_path(const std::string& name) {
    return std::string(GENRES_TEST_TMP_DIR) + "/" + name;
}

} // namespace

TEST_CASE("cosine similarity identities") {
    const auto u = vec({1.0, 2.0, 3.0});
    CHECK(cosine_similarity(u, u) == 1.0);

    CHECK(cosine_similarity(vec({1.0, 0.0}), vec({0.0, 1.0})) == 0.0);

    // 32 / (sqrt(14) * sqrt(77)) hand-computed.
    CHECK(cosine_similarity(vec({1, 2, 3}), vec({4, 5, 6})) ==
          doctest::Approx(0.974632).epsilon(1e-5));

    CHECK_THROWS_AS(cosine_similarity(vec({1, 2}), vec({1, 2, 3})), ValidationError);
    CHECK_THROWS_AS(cosine_similarity(vec({0, 0}), vec({1, 2})), ValidationError);
}

TEST_CASE("cosine similarity is symmetric and scale-invariant (property)") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 500; ++round) {
        const int dim = 2 + static_cast<int>(bounded_rand(rng, 6));
        EmbeddingVector u, v;
        for (int i = 0; i < dim; ++i) {
            u.values.push_back(2.0 * u64_to_unit_double(rng()) - 1.0);
            v.values.push_back(2.0 * u64_to_unit_double(rng()) - 1.0);
        }
        const double alpha = 0.5 + u64_to_unit_double(rng()) * 4.0;
        const double beta = 0.5 + u64_to_unit_double(rng()) * 4.0;
        EmbeddingVector us = u, vs = v;
        for (double& x : us.values) x *= alpha;
        for (double& x : vs.values) x *= beta;

        const double sim = cosine_similarity(u, v);
        CHECK(sim == doctest::Approx(cosine_similarity(v, u)).epsilon(1e-12));
        CHECK(sim == doctest::Approx(cosine_similarity(us, vs)).epsilon(1e-9));
        CHECK(sim >= -1.0);
        CHECK(sim <= 1.0);
    }
}

TEST_CASE("mock provider is deterministic, unit-norm and text-keyed") {
    MockHashProvider provider(32, 7);
    const auto batch1 = provider.embed_batch({"alpha", "beta", "alpha"});
    const auto batch2 = provider.embed_batch({"alpha"});

    CHECK(batch1[0].values == batch1[2].values);
    CHECK(batch1[0].values == batch2[0].values);
    CHECK(batch1[0].values != batch1[1].values);
    CHECK(batch1[0].dim() == 32);

    double norm = 0.0;
    for (double x : batch1[0].values) norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));

    // Distinct texts never reach cosine 1 with this provider.
    CHECK(cosine_similarity(batch1[0], batch1[1]) < 1.0);
}

TEST_CASE("sum-mode triple embedding is the component-wise sum") {
    MockHashProvider provider(16, 0);
    EmbeddingCache cache;
    const Triple t{"a", "r", "b"};
    const EmbeddingVector sum = triple_embedding(t, TripleEmbeddingMode::sum, provider, cache);
    const auto parts = provider.embed_batch({"a", "r", "b"});
    for (int i = 0; i < 16; ++i)
        CHECK(sum.values[i] ==
              parts[0].values[i] + parts[1].values[i] + parts[2].values[i]);
}

TEST_CASE("concat mode triples the dimension") {
    MockHashProvider provider(16, 0);
    EmbeddingCache cache;
    const EmbeddingVector cat =
        triple_embedding({"a", "r", "b"}, TripleEmbeddingMode::concat, provider, cache);
    CHECK(cat.dim() == 48);
}

TEST_CASE("sum mode is blind to subject/object swap; concat is not") {
    MockHashProvider provider(16, 0);
    EmbeddingCache cache;
    const EmbeddingVector ab =
        triple_embedding({"a", "r", "b"}, TripleEmbeddingMode::sum, provider, cache);
    const EmbeddingVector ba =
        triple_embedding({"b", "r", "a"}, TripleEmbeddingMode::sum, provider, cache);
    CHECK(ab.values == ba.values);

    const EmbeddingVector cab =
        triple_embedding({"a", "r", "b"}, TripleEmbeddingMode::concat, provider, cache);
    const EmbeddingVector cba =
        triple_embedding({"b", "r", "a"}, TripleEmbeddingMode::concat, provider, cache);
    CHECK(cab.values != cba.values);
}

TEST_CASE("cache short-circuits the provider") {
    MockHashProvider provider(8, 0);
    EmbeddingCache cache;
    const std::vector<std::string> texts = {"x", "y", "x", "z"};

    const auto first = cached_embed(texts, provider, cache);
    CHECK(provider.call_count() == 1);
    const auto second = cached_embed(texts, provider, cache);
    CHECK(provider.call_count() == 1); // zero new provider requests

    for (std::size_t i = 0; i < texts.size(); ++i)
        CHECK(first[i].values == second[i].values);
}

TEST_CASE("mixed hit/miss preserves input order") {
    MockHashProvider provider(8, 0);
    EmbeddingCache cache;
    (void)cached_embed({"b"}, provider, cache);
    const auto out = cached_embed({"a", "b", "c"}, provider, cache);
    const auto direct = provider.embed_batch({"a", "b", "c"});
    for (int i = 0; i < 3; ++i) CHECK(out[i].values == direct[i].values);
}

TEST_CASE("cache file round-trips bit-identical vectors") {
    const std::string path = tmp_path("cache_roundtrip.bin");
    std::remove(path.c_str());

    MockHashProvider provider(8, 1);
    {
        EmbeddingCache cache(path);
        (void)cached_embed({"alpha", "beta"}, provider, cache);
    }
    {
        MockHashProvider counter(8, 1);
        EmbeddingCache cache(path);
        const auto out = cached_embed({"alpha", "beta"}, counter, cache);
        CHECK(counter.call_count() == 0);
        const auto direct = provider.embed_batch({"alpha", "beta"});
        CHECK(out[0].values == direct[0].values);
        CHECK(out[1].values == direct[1].values);
    }
}

TEST_CASE("corrupted cache record becomes a miss and heals") {
    const std::string path = tmp_path("cache_corrupt.bin");
    std::remove(path.c_str());

    MockHashProvider provider(8, 2);
    {
        EmbeddingCache cache(path);
        (void)cached_embed({"victim"}, provider, cache);
    }

    // Flip one payload byte (past the 8-byte magic + 4-byte key length).
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(20);
        char c;
        f.seekg(20);
        f.get(c);
        f.seekp(20);
        f.put(static_cast<char>(c ^ 0x5a));
    }

    MockHashProvider fresh(8, 2);
    EmbeddingCache cache(path);
    const auto out = cached_embed({"victim"}, fresh, cache);
    CHECK(fresh.call_count() == 1); // re-fetched
    const auto direct = provider.embed_batch({"victim"});
    CHECK(out[0].values == direct[0].values);

    // The overwrite wins on the next load.
    MockHashProvider untouched(8, 2);
    EmbeddingCache cache2(path);
    (void)cached_embed({"victim"}, untouched, cache2);
    CHECK(untouched.call_count() == 0);
}
