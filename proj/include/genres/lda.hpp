#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "genres/core.hpp"

namespace genres::lda {

/// Tokenization shared by training and inference: lowercase, split on
/// non-alphanumeric, drop single-character tokens and stopwords.
class Preprocessor {
public:
    Preprocessor() = default;
    explicit Preprocessor(std::unordered_set<std::string> stopwords)
        : stopwords_(std::move(stopwords)) {}

    static Preprocessor from_stopword_file(const std::string& path);

    std::vector<std::string> tokenize(const std::string& text) const;

private:
    std::unordered_set<std::string> stopwords_;
};

/// Trained LDA state: vocabulary plus frozen topic-word counts. Immutable
/// after training; safe to share across threads.
struct TopicModel {
    std::vector<std::string> vocabulary; ///< index -> token
    std::unordered_map<std::string, int> token_index;
    std::vector<std::vector<int>> topic_word_counts; ///< K x V
    std::vector<long long> topic_totals;             ///< per-topic sums over V
    double alpha = 0.0;
    double beta = 0.0;
    int K = 0;
    std::uint64_t training_seed = 0;

    int vocab_size() const { return static_cast<int>(vocabulary.size()); }
    void validate() const;
};

struct TopicDistribution {
    std::vector<double> probs;
};

struct InferResult {
    TopicDistribution dist;
    int in_vocab_tokens = 0;
    bool oov_only = false; ///< true when the uniform fallback was used
};

struct TrainOptions {
    int topic_count = 2;
    int iterations = 100;
    std::uint64_t seed = 0;
    double alpha = 0.0; ///< 0 means the 50/K default
    double beta = 0.01;
};

/// Collapsed Gibbs sampling over token-topic assignments. Deterministic
/// given (corpus order, K, iterations, seed).
TopicModel train(const std::vector<std::string>& corpus, const TrainOptions& options,
                 const Preprocessor& pre);

/// Fold-in Gibbs with the model's counts frozen, followed by the
/// posterior mean theta_k = (n_k + alpha) / (N + K*alpha). The chain seed
/// derives from the model seed and the text, so identical texts always
/// infer identical distributions. Out-of-vocabulary tokens are skipped;
/// a text with no in-vocabulary tokens yields the uniform distribution.
InferResult infer(const TopicModel& model, const std::string& text, const Preprocessor& pre,
                  int sweeps = 50);

/// KL(p || q) with natural log. Entries of q are floored at epsilon and
/// renormalized first. Throws ValidationError on mismatched lengths.
double kl_divergence(const TopicDistribution& p, const TopicDistribution& q,
                     double epsilon = 1e-12);

/// Concatenation "s1 r1 o1 s2 r2 o2 ..." of a triple list; empty iff the
/// list is empty.
std::string flatten_triples(const TripleList& triples);

struct TopicalSimilarityResult {
    double ts = 0.0;
    std::vector<std::string> warnings;
};

/// exp(-KL(infer(D) || infer(flattened triples))). An empty extraction
/// scores 0 by convention (it conveys no topical content).
TopicalSimilarityResult topical_similarity(const TopicModel& model, const EvaluationUnit& unit,
                                           const Preprocessor& pre, double kl_epsilon = 1e-12,
                                           int sweeps = 50);

/// Model file round-trip (JSON with a format-version tag; loading rejects
/// version mismatches).
void save_model(const TopicModel& model, const std::string& path);
TopicModel load_model(const std::string& path);

} // namespace genres::lda
