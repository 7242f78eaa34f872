#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genres/core.hpp"
#include "genres/llm.hpp"
#include "genres/prompt.hpp"

namespace genres::judge {

using JudgeClient = llm::CompletionClient;

/// Judge request knobs. Defaults follow the tuned values: temperature
/// 0.3, max_new_tokens 800, two retries on unparseable output.
struct JudgeOptions {
    double temperature = 0.3;
    int max_new_tokens = 800;
    int retries = 2;
    std::string resource_dir = prompt::default_resource_dir();
};

struct FactVerdict {
    int triple_index = 0;
    bool supported = false;
    std::string raw_response;
    int attempts = 0;
    std::optional<std::string> warning;
};

struct SplitVerdict {
    int triple_index = 0;
    int split_count = 0;
    std::string raw_response;
    int attempts = 0;
    std::optional<std::string> warning;
};

/// Parse the first standalone, case-insensitive "true"/"false" token.
/// Empty optional when the response contains neither.
std::optional<bool> parse_fact_response(const std::string& response);

/// Parse a split count: the first standalone integer wins; otherwise a
/// "cannot be split"/"atomic" phrase means 0; otherwise listed
/// sub-triples are counted. Empty optional when nothing applies.
std::optional<int> parse_split_response(const std::string& response);

/// One factualness query. Unparseable responses are retried; after the
/// last retry the triple counts as unsupported (a warning says so).
/// Transport failures after the client's own retries propagate.
FactVerdict check_fact(const std::string& source_text, const Triple& t, JudgeClient& client,
                       const JudgeOptions& options = {});

/// One granularity query. Unparseable responses are retried; after the
/// last retry the split count defaults to 0 with a warning, so judge
/// noise never penalizes the extractor.
SplitVerdict check_granularity(const Triple& t, JudgeClient& client,
                               const JudgeOptions& options = {});

/// Mean supported-indicator over all extracted triples (Eq.-3 style
/// triple-wise verification). Throws ValidationError on an empty
/// extraction; the caller records FS as absent.
double factualness(const EvaluationUnit& unit, JudgeClient& client,
                   const JudgeOptions& options = {},
                   std::vector<FactVerdict>* verdicts_out = nullptr);

/// Mean of exp(-split_count) over all extracted triples.
double granularity(const EvaluationUnit& unit, JudgeClient& client,
                   const JudgeOptions& options = {},
                   std::vector<SplitVerdict>* verdicts_out = nullptr);

} // namespace genres::judge
