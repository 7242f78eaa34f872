#include "genres/parser.hpp"

#include <algorithm>

#include <json.hpp>

namespace genres::parser {

using nlohmann::json;

namespace {

/// Find the end of a balanced bracket expression starting at `start`
/// (text[start] must be '['). Tracks double-quoted strings and escapes so
/// brackets inside string literals do not count. Returns the index one
/// past the closing bracket, or npos if the expression never closes.
std::size_t balanced_end(const std::string& text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            --depth;
            if (depth == 0) return i + 1;
        }
    }
    return std::string::npos;
}

std::string snippet(const std::string& s, std::size_t max_len = 60) {
    if (s.size() <= max_len) return s;
    return s.substr(0, max_len) + "...";
}

/// A scalar JSON value rendered as triple-field text. Strings are taken
/// verbatim, numbers and booleans as their JSON literal.
bool scalar_text(const json& v, std::string& out) {
    if (v.is_string()) {
        out = v.get<std::string>();
        return true;
    }
    if (v.is_number() || v.is_boolean()) {
        out = v.dump();
        return true;
    }
    return false;
}

/// Decode one candidate array as a triple. Returns true on success,
/// otherwise pushes a warning describing the drop.
bool decode_triple(const json& arr, const std::string& raw_text,
                   std::vector<Triple>& out, std::vector<std::string>& warnings) {
    if (arr.size() != 3) {
        warnings.push_back("dropped candidate with arity " + std::to_string(arr.size()) +
                           ": " + snippet(raw_text));
        return false;
    }
    Triple t;
    std::string* fields[3] = {&t.subject, &t.relation, &t.object};
    for (std::size_t i = 0; i < 3; ++i) {
        std::string text;
        if (!scalar_text(arr[i], text)) {
            warnings.push_back("dropped candidate with non-scalar field: " + snippet(raw_text));
            return false;
        }
        *fields[i] = trim(text);
        if (fields[i]->empty()) {
            warnings.push_back("dropped candidate with empty field: " + snippet(raw_text));
            return false;
        }
    }
    out.push_back(std::move(t));
    return true;
}

} // namespace

ParseResult parse_triples(const RawGeneration& gen) {
    ParseResult result;
    const std::string& text = gen.raw;

    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find('[', pos);
        if (open == std::string::npos) break;

        const std::size_t end = balanced_end(text, open);
        if (end == std::string::npos) {
            // Unclosed bracket; plain prose, not a candidate.
            pos = open + 1;
            continue;
        }

        const std::string candidate = text.substr(open, end - open);
        json parsed = json::parse(candidate, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded() || !parsed.is_array()) {
            // Let inner brackets (if any) get their own chance.
            result.warnings.push_back("undecodable bracket expression: " + snippet(candidate));
            pos = open + 1;
            continue;
        }

        if (parsed.empty()) {
            // A bare [] is a legal "nothing found" answer.
            pos = end;
            continue;
        }

        const bool all_arrays = std::all_of(parsed.begin(), parsed.end(),
                                            [](const json& e) { return e.is_array(); });
        if (all_arrays) {
            for (const json& inner : parsed) {
                if (!inner.empty() &&
                    std::any_of(inner.begin(), inner.end(),
                                [](const json& e) { return e.is_array(); })) {
                    result.warnings.push_back("dropped nested list deeper than two levels: " +
                                              snippet(inner.dump()));
                    continue;
                }
                decode_triple(inner, inner.dump(), result.triples.triples, result.warnings);
            }
        } else {
            decode_triple(parsed, candidate, result.triples.triples, result.warnings);
        }
        pos = end;
    }

    result.triples.origin = Origin::extracted;
    return result;
}

std::string to_bracket_json(const TripleList& triples) {
    json arr = json::array();
    for (const Triple& t : triples.triples)
        arr.push_back(json::array({t.subject, t.relation, t.object}));
    return arr.dump();
}

int count_subtriple_mentions(const std::string& text) {
    int count = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find('[', pos);
        if (open == std::string::npos) break;
        const std::size_t end = balanced_end(text, open);
        if (end == std::string::npos) {
            pos = open + 1;
            continue;
        }

        // Split the group body on top-level commas; three non-empty
        // segments count as one triple mention. No JSON required, so
        // judge phrasing like [a, r1, b] still counts.
        const std::string body = text.substr(open + 1, end - open - 2);
        std::vector<std::string> segments;
        int depth = 0;
        std::size_t seg_start = 0;
        for (std::size_t i = 0; i <= body.size(); ++i) {
            if (i == body.size() || (body[i] == ',' && depth == 0)) {
                segments.push_back(trim(body.substr(seg_start, i - seg_start)));
                seg_start = i + 1;
            } else if (body[i] == '[') {
                ++depth;
            } else if (body[i] == ']') {
                --depth;
            }
        }
        const bool inner_lists = body.find('[') != std::string::npos;
        if (inner_lists) {
            // Outer wrapper around nested groups; recurse into the body.
            pos = open + 1;
            continue;
        }
        if (segments.size() == 3 &&
            std::none_of(segments.begin(), segments.end(),
                         [](const std::string& s) { return s.empty(); }))
            ++count;
        pos = end;
    }
    return count;
}

} // namespace genres::parser
