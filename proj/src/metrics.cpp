#include "genres/metrics.hpp"

namespace genres::metrics {

double uniqueness(const std::vector<embed::EmbeddingVector>& embeddings, double phi) {
    const std::size_t n = embeddings.size();
    if (n == 0) throw ValidationError("uniqueness undefined for empty extraction");
    if (n == 1) return 1.0;

    long long below = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (embed::cosine_similarity(embeddings[i], embeddings[j]) < phi) below += 2;
        }
    }
    return static_cast<double>(below) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

CompletenessResult completeness(
    const std::vector<embed::EmbeddingVector>& gold_embeddings,
    const std::vector<embed::EmbeddingVector>& extracted_embeddings, double phi,
    bool closed_mode, const std::vector<embed::EmbeddingVector>& gold_relation_embeddings,
    const std::vector<embed::EmbeddingVector>& extracted_relation_embeddings) {
    if (gold_embeddings.empty())
        throw ValidationError("completeness requires gold triples");
    if (closed_mode && (gold_relation_embeddings.size() != gold_embeddings.size() ||
                        extracted_relation_embeddings.size() != extracted_embeddings.size()))
        throw ValidationError("closed-mode completeness requires relation embeddings "
                              "aligned with both triple lists");

    CompletenessResult result;
    result.records.reserve(gold_embeddings.size());

    int matched_count = 0;
    for (std::size_t g = 0; g < gold_embeddings.size(); ++g) {
        MatchRecord record;
        record.gold_index = static_cast<int>(g);

        if (!extracted_embeddings.empty()) {
            int best = 0;
            double best_sim = embed::cosine_similarity(extracted_embeddings[0],
                                                       gold_embeddings[g]);
            for (std::size_t e = 1; e < extracted_embeddings.size(); ++e) {
                const double sim =
                    embed::cosine_similarity(extracted_embeddings[e], gold_embeddings[g]);
                if (sim > best_sim) {
                    best_sim = sim;
                    best = static_cast<int>(e);
                }
            }
            record.best_extracted_index = best;
            record.best_similarity = best_sim;
            record.matched = best_sim >= phi;
            if (closed_mode && record.matched) {
                record.best_relation_similarity = embed::cosine_similarity(
                    extracted_relation_embeddings[best], gold_relation_embeddings[g]);
                record.matched = record.best_relation_similarity >= phi;
            }
        }

        if (record.matched) ++matched_count;
        result.records.push_back(record);
    }

    result.cs = static_cast<double>(matched_count) / static_cast<double>(gold_embeddings.size());
    return result;
}

} // namespace genres::metrics
