#pragma once

#include <string>
#include <vector>

#include "genres/core.hpp"

namespace genres::parser {

/// Raw LLM output for one evaluation unit. An empty `raw` is a legal
/// failure mode and parses to zero triples.
struct RawGeneration {
    std::string unit_id;
    std::string raw;
    std::string model_id;
};

struct ParseResult {
    TripleList triples;
    std::vector<std::string> warnings;
};

/// Extract triples from free-form model output. Scans for balanced
/// square-bracket expressions (string-aware, so brackets inside quoted
/// fields do not confuse it) and decodes each as JSON:
///   - an array of three scalars is one triple (numbers/booleans are kept
///     as their literal text),
///   - an array of arrays is flattened one level, each inner array being
///     a triple candidate; deeper nesting is dropped with a warning,
///   - anything else (wrong arity, empty field after trimming, malformed
///     JSON) is dropped with a warning.
/// Never throws; output order follows appearance order in the text.
ParseResult parse_triples(const RawGeneration& gen);

/// Render a TripleList as a double-bracket JSON array: [["s","r","o"], ...].
/// parse_triples on this output reproduces the list exactly.
std::string to_bracket_json(const TripleList& triples);

/// Count bracket groups that look like triples (exactly three non-empty
/// comma-separated segments) without requiring valid JSON. Used to read
/// sub-triple lists out of judge explanations.
int count_subtriple_mentions(const std::string& text);

} // namespace genres::parser
