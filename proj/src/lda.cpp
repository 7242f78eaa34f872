#include "genres/lda.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace genres::lda {

using nlohmann::json;

namespace {

constexpr const char* kModelFormatVersion = "genres-lda-1";

/// Sample a topic index proportionally to `weights` using one uniform
/// draw. Weights are strictly positive by construction.
template <typename Rng>
int sample_discrete(Rng& rng, const std::vector<double>& weights, double total) {
    const double r = u64_to_unit_double(rng()) * total;
    double acc = 0.0;
    const int k_max = static_cast<int>(weights.size()) - 1;
    for (int k = 0; k < k_max; ++k) {
        acc += weights[k];
        if (r < acc) return k;
    }
    return k_max;
}

} // namespace

Preprocessor Preprocessor::from_stopword_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open stopword file: " + path);
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const std::string w = trim(line);
        if (!w.empty()) words.insert(w);
    }
    return Preprocessor(std::move(words));
}

std::vector<std::string> Preprocessor::tokenize(const std::string& text) const {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() > 1 && !stopwords_.count(current)) tokens.push_back(current);
        current.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

void TopicModel::validate() const {
    if (K < 2) throw ValidationError("topic model: K must be at least 2");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw ValidationError("topic model: alpha and beta must be positive");
    if (static_cast<int>(topic_word_counts.size()) != K ||
        static_cast<int>(topic_totals.size()) != K)
        throw FormatError("topic model: count matrix shape does not match K");
    for (int k = 0; k < K; ++k) {
        if (static_cast<int>(topic_word_counts[k].size()) != vocab_size())
            throw FormatError("topic model: count row shape does not match vocabulary");
        long long total = 0;
        for (int c : topic_word_counts[k]) {
            if (c < 0) throw FormatError("topic model: negative count");
            total += c;
        }
        if (total != topic_totals[k])
            throw FormatError("topic model: topic_totals inconsistent with counts");
    }
}

TopicModel train(const std::vector<std::string>& corpus, const TrainOptions& options,
                 const Preprocessor& pre) {
    if (corpus.empty()) throw ValidationError("lda train: empty corpus");
    if (options.iterations < 1) throw ValidationError("lda train: iterations must be >= 1");
    if (options.topic_count < 2) throw ValidationError("lda train: K must be at least 2");

    const int K = options.topic_count;

    TopicModel model;
    model.K = K;
    model.alpha = options.alpha > 0.0 ? options.alpha : 50.0 / K;
    model.beta = options.beta;
    model.training_seed = options.seed;

    // Tokenize and build the vocabulary in first-occurrence order.
    std::vector<std::vector<int>> docs;
    docs.reserve(corpus.size());
    for (const std::string& text : corpus) {
        std::vector<int> doc;
        for (const std::string& tok : pre.tokenize(text)) {
            auto [it, inserted] = model.token_index.try_emplace(tok, model.vocab_size());
            if (inserted) model.vocabulary.push_back(tok);
            doc.push_back(it->second);
        }
        docs.push_back(std::move(doc));
    }
    const int V = model.vocab_size();
    if (V == 0) throw ValidationError("lda train: empty vocabulary after preprocessing");

    model.topic_word_counts.assign(K, std::vector<int>(V, 0));
    model.topic_totals.assign(K, 0);
    std::vector<std::vector<int>> doc_topic_counts(docs.size(), std::vector<int>(K, 0));
    std::vector<std::vector<int>> assignments(docs.size());

    std::mt19937_64 rng(options.seed);

    for (std::size_t d = 0; d < docs.size(); ++d) {
        assignments[d].resize(docs[d].size());
        for (std::size_t i = 0; i < docs[d].size(); ++i) {
            const int w = docs[d][i];
            const int k = static_cast<int>(bounded_rand(rng, K));
            assignments[d][i] = k;
            ++model.topic_word_counts[k][w];
            ++model.topic_totals[k];
            ++doc_topic_counts[d][k];
        }
    }

    const double v_beta = V * model.beta;
    std::vector<double> weights(K);
    for (int iter = 0; iter < options.iterations; ++iter) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            for (std::size_t i = 0; i < docs[d].size(); ++i) {
                const int w = docs[d][i];
                const int old_k = assignments[d][i];
                --model.topic_word_counts[old_k][w];
                --model.topic_totals[old_k];
                --doc_topic_counts[d][old_k];

                double total = 0.0;
                for (int k = 0; k < K; ++k) {
                    weights[k] = (doc_topic_counts[d][k] + model.alpha) *
                                 (model.topic_word_counts[k][w] + model.beta) /
                                 (model.topic_totals[k] + v_beta);
                    total += weights[k];
                }
                const int new_k = sample_discrete(rng, weights, total);

                assignments[d][i] = new_k;
                ++model.topic_word_counts[new_k][w];
                ++model.topic_totals[new_k];
                ++doc_topic_counts[d][new_k];
            }
        }
    }

    return model;
}

InferResult infer(const TopicModel& model, const std::string& text, const Preprocessor& pre,
                  int sweeps) {
    const int K = model.K;
    InferResult result;
    result.dist.probs.assign(K, 0.0);

    std::vector<int> doc;
    for (const std::string& tok : pre.tokenize(text)) {
        const auto it = model.token_index.find(tok);
        if (it != model.token_index.end()) doc.push_back(it->second);
    }
    result.in_vocab_tokens = static_cast<int>(doc.size());

    if (doc.empty()) {
        for (double& p : result.dist.probs) p = 1.0 / K;
        result.oov_only = true;
        return result;
    }

    // Chain seed from (model seed, text hash): identical texts always
    // infer identical distributions, which makes TS(D, D) exactly 1.
    std::mt19937_64 rng(model.training_seed ^ fnv1a64(text));

    std::vector<int> topic_counts(K, 0);
    std::vector<int> assignments(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const int k = static_cast<int>(bounded_rand(rng, K));
        assignments[i] = k;
        ++topic_counts[k];
    }

    const double v_beta = model.vocab_size() * model.beta;
    std::vector<double> weights(K);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            const int w = doc[i];
            const int old_k = assignments[i];
            --topic_counts[old_k];

            double total = 0.0;
            for (int k = 0; k < K; ++k) {
                // Model counts stay frozen during fold-in.
                weights[k] = (topic_counts[k] + model.alpha) *
                             (model.topic_word_counts[k][w] + model.beta) /
                             (model.topic_totals[k] + v_beta);
                total += weights[k];
            }
            const int new_k = sample_discrete(rng, weights, total);
            assignments[i] = new_k;
            ++topic_counts[new_k];
        }
    }

    const double denom = static_cast<double>(doc.size()) + K * model.alpha;
    for (int k = 0; k < K; ++k)
        result.dist.probs[k] = (topic_counts[k] + model.alpha) / denom;
    return result;
}

double kl_divergence(const TopicDistribution& p, const TopicDistribution& q, double epsilon) {
    if (p.probs.size() != q.probs.size())
        throw ValidationError("kl_divergence: distributions have different lengths");
    if (p.probs.empty()) throw ValidationError("kl_divergence: empty distributions");
    if (!(epsilon > 0.0)) throw ValidationError("kl_divergence: epsilon must be positive");

    std::vector<double> q_floored(q.probs.size());
    double q_total = 0.0;
    for (std::size_t i = 0; i < q.probs.size(); ++i) {
        q_floored[i] = std::max(q.probs[i], epsilon);
        q_total += q_floored[i];
    }

    double kl = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        const double pi = p.probs[i];
        if (pi <= 0.0) continue;
        kl += pi * std::log(pi / (q_floored[i] / q_total));
    }
    return kl;
}

std::string flatten_triples(const TripleList& triples) {
    std::string out;
    for (const Triple& t : triples.triples) {
        if (!out.empty()) out += ' ';
        out += t.subject;
        out += ' ';
        out += t.relation;
        out += ' ';
        out += t.object;
    }
    return out;
}

TopicalSimilarityResult topical_similarity(const TopicModel& model, const EvaluationUnit& unit,
                                           const Preprocessor& pre, double kl_epsilon,
                                           int sweeps) {
    TopicalSimilarityResult result;
    if (unit.extracted.empty()) {
        result.ts = 0.0;
        result.warnings.push_back("unit " + unit.id +
                                  ": empty extraction, TS = 0 by convention");
        return result;
    }

    const InferResult doc = infer(model, unit.text, pre, sweeps);
    if (doc.oov_only)
        result.warnings.push_back("unit " + unit.id +
                                  ": source text has no in-vocabulary tokens");

    const InferResult tri = infer(model, flatten_triples(unit.extracted), pre, sweeps);
    if (tri.oov_only)
        result.warnings.push_back("unit " + unit.id +
                                  ": flattened triples have no in-vocabulary tokens");

    result.ts = std::exp(-kl_divergence(doc.dist, tri.dist, kl_epsilon));
    return result;
}

void save_model(const TopicModel& model, const std::string& path) {
    model.validate();
    json j;
    j["format"] = kModelFormatVersion;
    j["K"] = model.K;
    j["alpha"] = model.alpha;
    j["beta"] = model.beta;
    j["seed"] = model.training_seed;
    j["vocabulary"] = model.vocabulary;
    j["topic_word_counts"] = model.topic_word_counts;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open model file for writing: " + path);
    out << j.dump() << "\n";
}

TopicModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();

    json j = json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw FormatError("model file: malformed JSON: " + path);
    if (j.value("format", "") != kModelFormatVersion)
        throw FormatError("model file: unsupported format version '" +
                          j.value("format", std::string("<missing>")) + "' in " + path);

    TopicModel model;
    model.K = j.at("K").get<int>();
    model.alpha = j.at("alpha").get<double>();
    model.beta = j.at("beta").get<double>();
    model.training_seed = j.at("seed").get<std::uint64_t>();
    model.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    model.topic_word_counts = j.at("topic_word_counts").get<std::vector<std::vector<int>>>();

    for (int i = 0; i < model.vocab_size(); ++i) model.token_index[model.vocabulary[i]] = i;
    model.topic_totals.assign(model.K, 0);
    for (int k = 0; k < model.K && k < static_cast<int>(model.topic_word_counts.size()); ++k) {
        long long total = 0;
        for (int c : model.topic_word_counts[k]) total += c;
        model.topic_totals[k] = total;
    }
    model.validate();
    return model;
}

} // namespace genres::lda
