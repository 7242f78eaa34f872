#include "genres/judge.hpp"

#include <cctype>
#include <cmath>

#include "genres/parser.hpp"

namespace genres::judge {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

/// Find `word` in `text` at word boundaries (both already lowercased).
bool contains_word(const std::string& text, const std::string& word, std::size_t* pos_out) {
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right_ok = end == text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) {
            if (pos_out) *pos_out = pos;
            return true;
        }
        ++pos;
    }
    return false;
}

} // namespace

std::optional<bool> parse_fact_response(const std::string& response) {
    const std::string text = lower(response);
    std::size_t true_pos = 0, false_pos = 0;
    const bool has_true = contains_word(text, "true", &true_pos);
    const bool has_false = contains_word(text, "false", &false_pos);
    if (has_true && has_false) return true_pos < false_pos ? true : false;
    if (has_true) return true;
    if (has_false) return false;
    return std::nullopt;
}

std::optional<int> parse_split_response(const std::string& response) {
    // Rule 1: first standalone integer.
    for (std::size_t i = 0; i < response.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(response[i]))) continue;
        const bool left_ok = i == 0 || !is_word_char(response[i - 1]);
        if (!left_ok) {
            while (i < response.size() && is_word_char(response[i])) ++i;
            continue;
        }
        std::size_t end = i;
        while (end < response.size() && std::isdigit(static_cast<unsigned char>(response[end])))
            ++end;
        if (end < response.size() && is_word_char(response[end])) {
            i = end;
            continue;
        }
        return std::stoi(response.substr(i, end - i));
    }

    // Rule 2: an explicit cannot-split statement means atomic.
    const std::string text = lower(response);
    if (text.find("cannot be split") != std::string::npos ||
        text.find("can not be split") != std::string::npos ||
        text.find("can't be split") != std::string::npos ||
        contains_word(text, "atomic", nullptr))
        return 0;

    // Rule 3: count listed sub-triples.
    const int mentions = parser::count_subtriple_mentions(response);
    if (mentions > 0) return mentions;

    return std::nullopt;
}

FactVerdict check_fact(const std::string& source_text, const Triple& t, JudgeClient& client,
                       const JudgeOptions& options) {
    if (trim(source_text).empty())
        throw ValidationError("check_fact: source text must be non-empty");

    const std::string prompt =
        prompt::render_factualness_prompt(source_text, t, options.resource_dir);

    FactVerdict verdict;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
        verdict.raw_response =
            client.complete(prompt, options.max_new_tokens, options.temperature);
        verdict.attempts = attempt + 1;
        if (const auto parsed = parse_fact_response(verdict.raw_response)) {
            verdict.supported = *parsed;
            return verdict;
        }
    }
    // Unverifiable counts against the extractor: FS guards hallucination.
    verdict.supported = false;
    verdict.warning = "unparseable fact verdict after " + std::to_string(verdict.attempts) +
                      " attempts; treating as unsupported";
    return verdict;
}

SplitVerdict check_granularity(const Triple& t, JudgeClient& client,
                               const JudgeOptions& options) {
    const std::string prompt = prompt::render_granularity_prompt(t, options.resource_dir);

    SplitVerdict verdict;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
        verdict.raw_response =
            client.complete(prompt, options.max_new_tokens, options.temperature);
        verdict.attempts = attempt + 1;
        if (const auto parsed = parse_split_response(verdict.raw_response)) {
            verdict.split_count = *parsed;
            return verdict;
        }
    }
    // No evidence of splittability: no penalty.
    verdict.split_count = 0;
    verdict.warning = "unparseable split verdict after " + std::to_string(verdict.attempts) +
                      " attempts; treating as atomic";
    return verdict;
}

double factualness(const EvaluationUnit& unit, JudgeClient& client, const JudgeOptions& options,
                   std::vector<FactVerdict>* verdicts_out) {
    if (unit.extracted.empty())
        throw ValidationError("factualness undefined for empty extraction");

    int supported = 0;
    for (std::size_t i = 0; i < unit.extracted.size(); ++i) {
        FactVerdict v = check_fact(unit.text, unit.extracted.triples[i], client, options);
        v.triple_index = static_cast<int>(i);
        if (v.supported) ++supported;
        if (verdicts_out) verdicts_out->push_back(std::move(v));
    }
    return static_cast<double>(supported) / static_cast<double>(unit.extracted.size());
}

double granularity(const EvaluationUnit& unit, JudgeClient& client, const JudgeOptions& options,
                   std::vector<SplitVerdict>* verdicts_out) {
    if (unit.extracted.empty())
        throw ValidationError("granularity undefined for empty extraction");

    double total = 0.0;
    for (std::size_t i = 0; i < unit.extracted.size(); ++i) {
        SplitVerdict v = check_granularity(unit.extracted.triples[i], client, options);
        v.triple_index = static_cast<int>(i);
        total += std::exp(-static_cast<double>(v.split_count));
        if (verdicts_out) verdicts_out->push_back(std::move(v));
    }
    return total / static_cast<double>(unit.extracted.size());
}

} // namespace genres::judge
