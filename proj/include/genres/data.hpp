#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genres/core.hpp"

namespace genres::data {

/// A loaded corpus: one level, unique unit ids, immutable after loading.
struct CorpusManifest {
    std::string name;
    UnitLevel level = UnitLevel::document;
    std::vector<EvaluationUnit> units;
    std::string source_note;
    std::vector<std::string> warnings;

    std::size_t size() const { return units.size(); }
};

/// Parse a JSON Lines corpus file: one unit per line,
/// {"id": str, "text": str, "gold": [[s,r,o],...] | null,
///  "level": "document"|"bag"|"sentence"}.
/// Optional keys: "split", "entity_pairs" (for closed GRE). An empty gold
/// array loads as absent (CS is skipped for that unit). Validation
/// failures name the offending line number.
CorpusManifest load_corpus(const std::string& path);

/// Inverse of load_corpus; UTF-8, LF line endings.
void save_corpus(const CorpusManifest& corpus, const std::string& path);

/// Uniform sample of n units without replacement, preserving original
/// relative order. Deterministic per seed: mt19937_64 drives a partial
/// Fisher-Yates selection (rejection-sampled bounded draws), and the
/// selected indices are restored to ascending order. Reimplementations
/// from this description reproduce sample sets bit-exactly.
CorpusManifest sample(const CorpusManifest& corpus, std::size_t n, std::uint64_t seed);

/// Keep units whose gold list holds at least min_triples triples (absent
/// gold counts as zero, so min_triples = 0 is the identity).
CorpusManifest filter_min_gold(const CorpusManifest& corpus, std::size_t min_triples);

} // namespace genres::data
