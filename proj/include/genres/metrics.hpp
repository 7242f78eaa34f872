#pragma once

#include <optional>
#include <vector>

#include "genres/core.hpp"
#include "genres/embed.hpp"

namespace genres::metrics {

/// Fraction of ordered triple pairs (i, j), i != j, whose embedding
/// cosine similarity stays below phi, normalized by n(n-1). Cosine is
/// symmetric so each unordered pair counts twice; the ordered-pair
/// normalization is kept as defined. A single triple scores 1 by
/// convention; an empty list is an error (the caller records US as
/// absent).
double uniqueness(const std::vector<embed::EmbeddingVector>& embeddings, double phi);

/// Soft-match audit record for one gold triple.
struct MatchRecord {
    int gold_index = 0;
    std::optional<int> best_extracted_index;
    double best_similarity = 0.0;
    double best_relation_similarity = 0.0; ///< only meaningful in closed mode
    bool matched = false;
};

struct CompletenessResult {
    double cs = 0.0;
    std::vector<MatchRecord> records;
};

/// Eq.-5 completeness: each gold triple soft-matches its best extracted
/// triple by embedding cosine; matched iff the best similarity reaches
/// phi. One extracted triple may satisfy several gold triples. Argmax
/// ties break toward the lowest extracted index.
///
/// Closed mode additionally requires relation-only embedding similarity
/// >= phi for the best-matching pair (closed GRE reuses the given entity
/// pairs, so whole-triple similarity alone is nearly saturated there);
/// pass the relation embeddings aligned with each list.
CompletenessResult completeness(const std::vector<embed::EmbeddingVector>& gold_embeddings,
                                const std::vector<embed::EmbeddingVector>& extracted_embeddings,
                                double phi, bool closed_mode = false,
                                const std::vector<embed::EmbeddingVector>& gold_relation_embeddings = {},
                                const std::vector<embed::EmbeddingVector>& extracted_relation_embeddings = {});

} // namespace genres::metrics
