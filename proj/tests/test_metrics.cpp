#include <doctest.h>

#include <random>

#include "genres/metrics.hpp"

using namespace genres;
using namespace genres::metrics;
using embed::EmbeddingVector;

namespace {

EmbeddingVector vec(std::vector<double> values) {
    EmbeddingVector v;
    v.values = std::move(values);
    v.provider_id = "test";
    return v;
}

std::vector<EmbeddingVector> random_vectors(std::mt19937_64& rng, std::size_t n, int dim) {
    std::vector<EmbeddingVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        EmbeddingVector v;
        v.provider_id = "test";
        for (int d = 0; d < dim; ++d)
            v.values.push_back(2.0 * u64_to_unit_double(rng()) - 1.0);
        if (v.values[0] == 0.0) v.values[0] = 0.5;
        out.push_back(std::move(v));
    }
    return out;
}

// Independent Eq.-2 oracle: the literal double sum over ordered pairs.
double uniqueness_oracle(const std::vector<EmbeddingVector>& embeddings, double phi) {
    const std::size_t n = embeddings.size();
    if (n == 1) return 1.0;
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (embed::cosine_similarity(embeddings[i], embeddings[j]) < phi) count += 1.0;
        }
    return count / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Independent Eq.-5 oracle: existence check per gold triple.
double completeness_oracle(const std::vector<EmbeddingVector>& gold,
                           const std::vector<EmbeddingVector>& extracted, double phi) {
    int matched = 0;
    for (const auto& g : gold) {
        bool found = false;
        for (const auto& e : extracted)
            if (embed::cosine_similarity(e, g) >= phi) found = true;
        if (found) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(gold.size());
}

} // namespace

TEST_CASE("uniqueness boundary cases") {
    // Two byte-identical triples: similarity 1 >= phi, fully redundant.
    const auto dup = std::vector<EmbeddingVector>{vec({1, 2}), vec({1, 2})};
    CHECK(uniqueness(dup, 0.95) == 0.0);

    // Mutually dissimilar triples (orthogonal): fully diverse.
    const auto ortho =
        std::vector<EmbeddingVector>{vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})};
    CHECK(uniqueness(ortho, 0.95) == 1.0);

    // Exactly one similar pair among three: 4 of 6 ordered pairs below phi.
    const auto one_pair =
        std::vector<EmbeddingVector>{vec({1, 0, 0}), vec({1, 0.001, 0}), vec({0, 1, 0})};
    CHECK(uniqueness(one_pair, 0.95) == doctest::Approx(4.0 / 6.0).epsilon(1e-9));

    CHECK(uniqueness({vec({3, 4})}, 0.95) == 1.0); // singleton convention

    CHECK_THROWS_WITH_AS(uniqueness({}, 0.95), "uniqueness undefined for empty extraction",
                         ValidationError);
}

TEST_CASE("uniqueness agrees with the brute-force oracle (property)") {
    std::mt19937_64 rng(101);
    for (int round = 0; round < 1000; ++round) {
        const std::size_t n = 1 + bounded_rand(rng, 8);
        const auto vectors = random_vectors(rng, n, 4);
        const double phi = 0.05 + 0.9 * u64_to_unit_double(rng());
        const double fast = uniqueness(vectors, phi);
        const double slow = uniqueness_oracle(vectors, phi);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
    }
}

TEST_CASE("uniqueness is permutation-invariant and duplicates lower it") {
    std::mt19937_64 rng(55);
    auto vectors = random_vectors(rng, 5, 4);
    const double base = uniqueness(vectors, 0.95);

    std::vector<EmbeddingVector> rotated(vectors.begin() + 2, vectors.end());
    rotated.insert(rotated.end(), vectors.begin(), vectors.begin() + 2);
    CHECK(uniqueness(rotated, 0.95) == doctest::Approx(base).epsilon(1e-12));

    auto with_dup = vectors;
    with_dup.push_back(vectors[0]);
    CHECK(uniqueness(with_dup, 0.95) < base);
}

TEST_CASE("completeness boundary cases") {
    const auto gold = std::vector<EmbeddingVector>{vec({1, 0}), vec({0, 1})};

    // Extraction identical to gold: self-similarity is 1, CS = 1.
    const auto full = completeness(gold, gold, 0.95);
    CHECK(full.cs == 1.0);
    CHECK(full.records[0].matched);
    CHECK(full.records[1].matched);

    // Empty extraction: nothing can match.
    const auto none = completeness(gold, {}, 0.95);
    CHECK(none.cs == 0.0);
    CHECK_FALSE(none.records[0].best_extracted_index.has_value());

    // One of two gold triples matched.
    const auto half = completeness(gold, {vec({1, 0.001})}, 0.95);
    CHECK(half.cs == 0.5);

    CHECK_THROWS_WITH_AS(completeness({}, gold, 0.95), "completeness requires gold triples",
                         ValidationError);
}

TEST_CASE("completeness agrees with the brute-force oracle (property)") {
    std::mt19937_64 rng(202);
    for (int round = 0; round < 1000; ++round) {
        const std::size_t n_gold = 1 + bounded_rand(rng, 8);
        const std::size_t n_ext = bounded_rand(rng, 9);
        const auto gold = random_vectors(rng, n_gold, 4);
        const auto extracted = random_vectors(rng, n_ext, 4);
        const double phi = 0.05 + 0.9 * u64_to_unit_double(rng());
        const double fast = completeness(gold, extracted, phi).cs;
        const double slow = completeness_oracle(gold, extracted, phi);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
    }
}

TEST_CASE("completeness is monotone in the extracted set") {
    std::mt19937_64 rng(303);
    for (int round = 0; round < 200; ++round) {
        const auto gold = random_vectors(rng, 3, 4);
        auto extracted = random_vectors(rng, 2, 4);
        const double before = completeness(gold, extracted, 0.8).cs;
        extracted.push_back(random_vectors(rng, 1, 4)[0]);
        const double after = completeness(gold, extracted, 0.8).cs;
        CHECK(after >= before);
    }
}

TEST_CASE("argmax ties break toward the lowest extracted index") {
    const auto gold = std::vector<EmbeddingVector>{vec({1, 0})};
    // Identical candidates: both reach similarity 1; index 0 must win.
    const auto result = completeness(gold, {vec({2, 0}), vec({2, 0})}, 0.95);
    CHECK(result.records[0].best_extracted_index == 0);
}

TEST_CASE("closed mode adds the relation-similarity requirement") {
    const auto gold = std::vector<EmbeddingVector>{vec({1, 0})};
    const auto extracted = std::vector<EmbeddingVector>{vec({1, 0})};

    // Triple embeddings match; relation embeddings do not.
    const auto gold_rel = std::vector<EmbeddingVector>{vec({1, 0})};
    const auto ext_rel_far = std::vector<EmbeddingVector>{vec({0, 1})};
    const auto blocked = completeness(gold, extracted, 0.95, true, gold_rel, ext_rel_far);
    CHECK(blocked.cs == 0.0);
    CHECK_FALSE(blocked.records[0].matched);

    const auto ext_rel_near = std::vector<EmbeddingVector>{vec({2, 0})};
    const auto allowed = completeness(gold, extracted, 0.95, true, gold_rel, ext_rel_near);
    CHECK(allowed.cs == 1.0);

    // Open mode ignores relation embeddings entirely.
    CHECK(completeness(gold, extracted, 0.95, false).cs == 1.0);

    CHECK_THROWS_AS(completeness(gold, extracted, 0.95, true, {}, {}), ValidationError);
}

TEST_CASE("with phi = 1.0 duplicate-free extraction scores US = 1") {
    // The mock provider guarantees distinct texts embed below cosine 1.
    embed::MockHashProvider provider(16, 3);
    const auto vectors = provider.embed_batch({"t1", "t2", "t3", "t4"});
    CHECK(uniqueness(vectors, 1.0) == 1.0);
}
