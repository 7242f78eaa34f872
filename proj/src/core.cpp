#include "genres/core.hpp"

#include <cctype>

namespace genres {

std::string to_string(UnitLevel level) {
    switch (level) {
        case UnitLevel::document: return "document";
        case UnitLevel::bag: return "bag";
        case UnitLevel::sentence: return "sentence";
    }
    throw ValidationError("unknown unit level");
}

UnitLevel unit_level_from_string(std::string_view s) {
    if (s == "document") return UnitLevel::document;
    if (s == "bag") return UnitLevel::bag;
    if (s == "sentence") return UnitLevel::sentence;
    throw ValidationError("unknown unit level: " + std::string(s));
}

std::string to_string(TripleEmbeddingMode mode) {
    return mode == TripleEmbeddingMode::sum ? "sum" : "concat";
}

TripleEmbeddingMode triple_embedding_mode_from_string(std::string_view s) {
    if (s == "sum") return TripleEmbeddingMode::sum;
    if (s == "concat") return TripleEmbeddingMode::concat;
    throw ValidationError("unknown triple embedding mode: " + std::string(s));
}

void ScoringConfig::validate() const {
    if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0))
        throw ValidationError("similarity_threshold must lie in (0, 1]");
    if (topic_count < 2)
        throw ValidationError("topic_count must be at least 2");
    if (!(kl_epsilon > 0.0))
        throw ValidationError("kl_epsilon must be positive");
    if (judge_retries < 0)
        throw ValidationError("judge_retries must be non-negative");
}

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

namespace {

int count_tokens(std::string_view s) {
    int count = 0;
    bool in_token = false;
    for (char c : s) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++count;
        in_token = !space;
    }
    return count;
}

} // namespace

int tokens_per_triple(const Triple& t) {
    return count_tokens(t.subject) + count_tokens(t.relation) + count_tokens(t.object);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace genres
