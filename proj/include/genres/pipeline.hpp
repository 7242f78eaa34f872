#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "genres/core.hpp"
#include "genres/data.hpp"
#include "genres/embed.hpp"
#include "genres/http_util.hpp"
#include "genres/llm.hpp"
#include "genres/prompt.hpp"
#include "genres/report.hpp"

namespace genres::pipeline {

enum class BackendKind { mock_hash, mock_scripted, http };

struct EmbeddingConfig {
    BackendKind backend = BackendKind::mock_hash;
    int mock_dim = 64;
    std::uint64_t mock_seed = 0;
    http::BackendConfig http;
    std::string cache_path; ///< empty: in-memory only
};

struct JudgeConfig {
    BackendKind backend = BackendKind::mock_scripted;
    std::string script_path;
    http::BackendConfig http;
    double temperature = 0.3;
    int max_new_tokens = 800;
    int retries = 2;
};

struct ExtractionConfig {
    BackendKind backend = BackendKind::mock_scripted;
    std::string script_path;
    http::BackendConfig http;
    prompt::Strategy strategy = prompt::Strategy::open;
    prompt::Domain domain = prompt::Domain::general;
    std::vector<std::string> relation_types;
    std::vector<std::string> entity_types;
    double temperature = 0.3;
    int max_new_tokens = 800;
    std::string output_path;
};

struct LdaConfig {
    std::string model_path;
    int iterations = 200;
    double alpha = 0.0; ///< 0 = 50/K default
    double beta = 0.01;
    int infer_sweeps = 50;
    bool train_if_missing = false;
};

struct PipelineConfig {
    std::string corpus_path;
    std::string output_dir = ".";
    std::optional<std::size_t> sample_n;
    std::uint64_t sample_seed = 0;
    std::optional<std::size_t> filter_min_gold;

    ScoringConfig scoring;
    /// Metrics requested explicitly; empty means "all available".
    std::set<std::string> metrics;
    int workers = 1;

    LdaConfig lda;
    EmbeddingConfig embedding;
    JudgeConfig judge;
    ExtractionConfig extraction;

    std::string resource_dir = prompt::default_resource_dir();
    std::string fixed_timestamp; ///< empty: SOURCE_DATE_EPOCH, then now

    void validate() const;
};

PipelineConfig load_config(const std::string& path);
PipelineConfig config_from_json_text(const std::string& json_text);

/// Timestamp recorded in report metadata: the configured fixed value,
/// SOURCE_DATE_EPOCH when set, else the current UTC time (ISO 8601).
std::string resolve_timestamp(const PipelineConfig& config);

/// Corpus after the configured filter/sample steps (filter first, the
/// order the sampling protocol used).
data::CorpusManifest load_input_corpus(const PipelineConfig& config);

struct TrainSummary {
    std::size_t corpus_size = 0;
    int vocab_size = 0;
    int topic_count = 0;
    std::uint64_t seed = 0;
    std::string model_path;
};

TrainSummary run_train_lda(const PipelineConfig& config);

/// One extraction output line.
struct ExtractionRecord {
    std::string id;
    std::string model;
    std::string raw;
    TripleList triples;
    std::vector<std::string> warnings;
    std::string error; ///< non-empty when the backend failed for this unit
};

struct ExtractSummary {
    std::size_t completed = 0;
    std::size_t skipped = 0; ///< already present from an earlier run
    std::size_t failed = 0;
    std::string output_path;
};

/// Renders prompts, queries the backend, parses triples, appends JSONL.
/// Resumable: units with a successful record in the output file are
/// skipped; units whose only record carries an error are retried.
ExtractSummary run_extract(const PipelineConfig& config);

/// Read an extraction JSONL file; duplicate ids keep the last record.
std::vector<ExtractionRecord> load_extractions(const std::string& path);

struct ScoreOutcome {
    ScoreReport report;
    std::string report_path;
    bool partial = false; ///< some unit lost a metric to a transport failure
};

/// Score the corpus: attach extractions, compute the requested metrics
/// per unit (fanning out across `workers` threads), aggregate, write the
/// report file. `extraction_path` overrides the configured one; pass
/// "gold" to score each unit's gold triples as its extraction.
ScoreOutcome run_score(const PipelineConfig& config, const std::string& extraction_path = "");

std::unique_ptr<embed::EmbeddingProvider> make_embedding_provider(const EmbeddingConfig& config);
std::unique_ptr<llm::CompletionClient> make_completion_client(BackendKind kind,
                                                              const std::string& script_path,
                                                              const http::BackendConfig& http);

} // namespace genres::pipeline
