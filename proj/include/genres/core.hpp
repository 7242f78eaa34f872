#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genres {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or configuration (maps to CLI exit code 1).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents (corpus lines, model files, scripts).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Backend/transport failure that survived all retries (CLI exit code 2).
class TransportError : public Error {
public:
    using Error::Error;
};

/// A subject/relation/object statement, the atomic unit of every score.
/// Fields are compared with case-sensitive exact string equality.
struct Triple {
    std::string subject;
    std::string relation;
    std::string object;

    bool operator==(const Triple&) const = default;
};

enum class Origin { extracted, gold };

/// Ordered list of triples. Duplicates are legal data, not errors;
/// the uniqueness score is what penalizes redundancy.
struct TripleList {
    std::vector<Triple> triples;
    Origin origin = Origin::extracted;

    bool empty() const { return triples.empty(); }
    std::size_t size() const { return triples.size(); }
};

enum class UnitLevel { document, bag, sentence };

std::string to_string(UnitLevel level);
UnitLevel unit_level_from_string(std::string_view s);

/// One source text with its extracted triples and (optionally) gold triples.
struct EvaluationUnit {
    std::string id;
    std::string text;
    TripleList extracted;
    std::optional<TripleList> gold;
    UnitLevel level = UnitLevel::document;
    /// Optional entity pairs shipped with the dataset; required by closed GRE.
    std::vector<std::pair<std::string, std::string>> entity_pairs;
};

enum class TripleEmbeddingMode { sum, concat };

std::string to_string(TripleEmbeddingMode mode);
TripleEmbeddingMode triple_embedding_mode_from_string(std::string_view s);

/// Knobs shared by the scoring pipeline.
struct ScoringConfig {
    double similarity_threshold = 0.95; ///< phi, the soft-match threshold
    int topic_count = 2;                ///< K for the LDA model
    double kl_epsilon = 1e-12;          ///< floor applied to q before KL
    TripleEmbeddingMode triple_embedding_mode = TripleEmbeddingMode::sum;
    int judge_retries = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Whitespace-delimited token count across subject, relation and object.
/// Fields are trimmed first; an all-whitespace field contributes zero.
int tokens_per_triple(const Triple& t);

/// Trim ASCII whitespace from both ends.
std::string trim(std::string_view s);

/// FNV-1a 64-bit hash. Used wherever a portable, stable text hash is
/// needed (mock embeddings, prompt fingerprints, fold-in chain seeds).
std::uint64_t fnv1a64(std::string_view s);

/// Draw a uniform value in [0, bound) from a 64-bit generator using
/// rejection sampling. Fully specified, unlike std::uniform_int_distribution,
/// so seeded runs reproduce across standard libraries.
template <typename Rng>
std::uint64_t bounded_rand(Rng& rng, std::uint64_t bound) {
    if (bound == 0) throw ValidationError("bounded_rand: bound must be positive");
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t u;
    do {
        u = rng();
    } while (u >= limit);
    return u % bound;
}

/// Map a raw 64-bit draw to a double in [0, 1).
inline double u64_to_unit_double(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

} // namespace genres
