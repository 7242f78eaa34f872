#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genres/core.hpp"

namespace genres {

/// Per-unit score record. Absent optionals mean "not computed for this
/// unit" (e.g. CS without gold triples, FS after a transport failure) and
/// are skipped by aggregation rather than counted as zero.
struct UnitScores {
    std::optional<double> ts;
    std::optional<double> us;
    std::optional<double> fs;
    std::optional<double> gs;
    std::optional<double> cs;
    int triple_count = 0;
    double mean_tokens_per_triple = 0.0;
    std::vector<std::string> warnings;
};

struct AggregateScores {
    std::optional<double> ts;
    std::optional<double> us;
    std::optional<double> fs;
    std::optional<double> gs;
    std::optional<double> cs;
    double triple_count = 0.0;
    double mean_tokens_per_triple = 0.0;
};

/// Scores live in [0, 1] in memory; the JSON file renders them as
/// percentages in [0, 100], matching how results are reported.
struct ScoreReport {
    std::map<std::string, UnitScores> per_unit;
    AggregateScores aggregate;
    std::map<std::string, std::string> metadata;
};

/// Arithmetic means over the units where each field is present; CS in
/// particular only averages units that carry gold triples.
/// Throws ValidationError on an empty corpus.
AggregateScores aggregate_scores(const std::map<std::string, UnitScores>& per_unit);

/// Convenience: builds the full report (aggregate + metadata) in one step.
ScoreReport aggregate_report(const std::map<std::string, UnitScores>& per_unit,
                             std::map<std::string, std::string> metadata);

/// Report file I/O. Scores are stored as percentages with full double
/// precision; `load_report` converts back to [0, 1].
std::string report_to_json(const ScoreReport& report);
ScoreReport report_from_json(const std::string& json_text);
void save_report(const ScoreReport& report, const std::string& path);
ScoreReport load_report(const std::string& path);

/// Console rendering with one-decimal percentages, one row per unit plus
/// the aggregate row.
std::string render_report_table(const ScoreReport& report);

} // namespace genres
