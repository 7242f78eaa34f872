#include "genres/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "genres/embed_http.hpp"
#include "genres/judge.hpp"
#include "genres/lda.hpp"
#include "genres/metrics.hpp"
#include "genres/parser.hpp"

namespace genres::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "mock_hash") return BackendKind::mock_hash;
    if (s == "mock_scripted") return BackendKind::mock_scripted;
    if (s == "http" || s == "http_completion") return BackendKind::http;
    throw ValidationError("unknown backend kind: " + s);
}

http::BackendConfig parse_http_backend(const json& j) {
    http::BackendConfig config;
    config.base_url = j.value("base_url", "");
    config.model = j.value("model", "");
    config.api_key_env = j.value("api_key_env", "");
    config.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
    config.retry.max_retries = j.value("max_retries", 3);
    config.max_parallel = j.value("max_parallel", 4);
    return config;
}

std::string basename_of(const std::string& path) {
    return fs::path(path).filename().string();
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

} // namespace

void PipelineConfig::validate() const {
    scoring.validate();
    if (corpus_path.empty()) throw ValidationError("config: corpus path required");
    if (workers < 1) throw ValidationError("config: workers must be >= 1");
    if (extraction.strategy == prompt::Strategy::closed && extraction.relation_types.empty())
        throw ValidationError("config: closed GRE requires relation_types");
    if (extraction.strategy == prompt::Strategy::semi_open &&
        (extraction.relation_types.empty() || extraction.entity_types.empty()))
        throw ValidationError("config: semi_open GRE requires relation_types and entity_types");
    for (const std::string& m : metrics) {
        if (m != "ts" && m != "us" && m != "fs" && m != "gs" && m != "cs")
            throw ValidationError("config: unknown metric '" + m + "'");
    }
}

PipelineConfig config_from_json_text(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw FormatError("config: malformed JSON");

    PipelineConfig config;
    config.corpus_path = j.value("corpus", "");
    config.output_dir = j.value("output_dir", ".");
    config.resource_dir = j.value("resources", prompt::default_resource_dir());
    config.fixed_timestamp = j.value("fixed_timestamp", "");

    if (j.contains("sample")) {
        const json& s = j.at("sample");
        config.sample_n = s.at("n").get<std::size_t>();
        if (!s.contains("seed"))
            throw ValidationError("config: sample requires a seed");
        config.sample_seed = s.at("seed").get<std::uint64_t>();
    }
    if (j.contains("filter_min_gold"))
        config.filter_min_gold = j.at("filter_min_gold").get<std::size_t>();

    if (j.contains("scoring")) {
        const json& s = j.at("scoring");
        config.scoring.similarity_threshold = s.value("similarity_threshold", 0.95);
        config.scoring.topic_count = s.value("topic_count", 2);
        config.scoring.kl_epsilon = s.value("kl_epsilon", 1e-12);
        config.scoring.triple_embedding_mode =
            triple_embedding_mode_from_string(s.value("triple_embedding_mode", "sum"));
        config.scoring.judge_retries = s.value("judge_retries", 2);
        config.scoring.seed = s.value("seed", std::uint64_t{0});
        if (s.contains("metrics"))
            for (const json& m : s.at("metrics")) config.metrics.insert(m.get<std::string>());
        config.workers = s.value("workers", 1);
    }

    if (j.contains("lda")) {
        const json& l = j.at("lda");
        config.lda.model_path = l.value("model_path", "");
        config.lda.iterations = l.value("iterations", 200);
        config.lda.alpha = l.value("alpha", 0.0);
        config.lda.beta = l.value("beta", 0.01);
        config.lda.infer_sweeps = l.value("infer_sweeps", 50);
        config.lda.train_if_missing = l.value("train_if_missing", false);
    }

    if (j.contains("embedding")) {
        const json& e = j.at("embedding");
        config.embedding.backend = backend_kind_from_string(e.value("backend", "mock_hash"));
        config.embedding.mock_dim = e.value("dim", 64);
        config.embedding.mock_seed = e.value("seed", std::uint64_t{0});
        config.embedding.http = parse_http_backend(e);
        config.embedding.cache_path = e.value("cache_path", "");
    }

    if (j.contains("judge")) {
        const json& g = j.at("judge");
        config.judge.backend = backend_kind_from_string(g.value("backend", "mock_scripted"));
        config.judge.script_path = g.value("script_path", "");
        config.judge.http = parse_http_backend(g);
        config.judge.temperature = g.value("temperature", 0.3);
        config.judge.max_new_tokens = g.value("max_new_tokens", 800);
        config.judge.retries = g.value("retries", config.scoring.judge_retries);
    }

    if (j.contains("extraction")) {
        const json& x = j.at("extraction");
        config.extraction.backend =
            backend_kind_from_string(x.value("backend", "mock_scripted"));
        config.extraction.script_path = x.value("script_path", "");
        config.extraction.http = parse_http_backend(x);
        config.extraction.strategy = prompt::strategy_from_string(x.value("strategy", "open"));
        config.extraction.domain = prompt::domain_from_string(x.value("domain", "general"));
        if (x.contains("relation_types"))
            config.extraction.relation_types =
                x.at("relation_types").get<std::vector<std::string>>();
        if (x.contains("entity_types"))
            config.extraction.entity_types =
                x.at("entity_types").get<std::vector<std::string>>();
        config.extraction.temperature = x.value("temperature", 0.3);
        config.extraction.max_new_tokens = x.value("max_new_tokens", 800);
        config.extraction.output_path = x.value("output_path", "");
    }

    config.validate();
    return config;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return config_from_json_text(buf.str());
    } catch (const FormatError& e) {
        throw FormatError(std::string(e.what()) + " (" + path + ")");
    }
}

std::string resolve_timestamp(const PipelineConfig& config) {
    if (!config.fixed_timestamp.empty()) return config.fixed_timestamp;

    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

data::CorpusManifest load_input_corpus(const PipelineConfig& config) {
    data::CorpusManifest corpus = data::load_corpus(config.corpus_path);
    if (config.filter_min_gold)
        corpus = data::filter_min_gold(corpus, *config.filter_min_gold);
    if (config.sample_n) corpus = data::sample(corpus, *config.sample_n, config.sample_seed);
    return corpus;
}

std::unique_ptr<embed::EmbeddingProvider> make_embedding_provider(
    const EmbeddingConfig& config) {
    switch (config.backend) {
        case BackendKind::mock_hash:
            return std::make_unique<embed::MockHashProvider>(config.mock_dim,
                                                             config.mock_seed);
        case BackendKind::http:
            return std::make_unique<embed::HttpEmbeddingProvider>(config.http);
        case BackendKind::mock_scripted:
            throw ValidationError("embedding backend cannot be mock_scripted");
    }
    throw ValidationError("unknown embedding backend");
}

std::unique_ptr<llm::CompletionClient> make_completion_client(
    BackendKind kind, const std::string& script_path, const http::BackendConfig& http) {
    switch (kind) {
        case BackendKind::mock_scripted:
            if (script_path.empty())
                throw ValidationError("mock_scripted backend requires script_path");
            return std::make_unique<llm::MockScriptedClient>(script_path);
        case BackendKind::http:
            return std::make_unique<llm::HttpCompletionClient>(http);
        case BackendKind::mock_hash:
            throw ValidationError("completion backend cannot be mock_hash");
    }
    throw ValidationError("unknown completion backend");
}

TrainSummary run_train_lda(const PipelineConfig& config) {
    if (config.lda.model_path.empty())
        throw ValidationError("train-lda: lda.model_path required");

    const data::CorpusManifest corpus = load_input_corpus(config);
    if (corpus.units.empty()) throw ValidationError("train-lda: corpus is empty");

    std::vector<std::string> texts;
    texts.reserve(corpus.units.size());
    for (const EvaluationUnit& unit : corpus.units) texts.push_back(unit.text);

    const lda::Preprocessor pre =
        lda::Preprocessor::from_stopword_file(config.resource_dir + "/stopwords_en.txt");

    lda::TrainOptions options;
    options.topic_count = config.scoring.topic_count;
    options.iterations = config.lda.iterations;
    options.seed = config.scoring.seed;
    options.alpha = config.lda.alpha;
    options.beta = config.lda.beta;

    const lda::TopicModel model = lda::train(texts, options, pre);
    ensure_parent_dir(config.lda.model_path);
    lda::save_model(model, config.lda.model_path);

    TrainSummary summary;
    summary.corpus_size = texts.size();
    summary.vocab_size = model.vocab_size();
    summary.topic_count = model.K;
    summary.seed = model.training_seed;
    summary.model_path = config.lda.model_path;
    return summary;
}

namespace {

json extraction_record_to_json(const ExtractionRecord& record) {
    json j;
    j["id"] = record.id;
    j["model"] = record.model;
    j["raw"] = record.raw;
    json triples = json::array();
    for (const Triple& t : record.triples.triples)
        triples.push_back(json::array({t.subject, t.relation, t.object}));
    j["triples"] = std::move(triples);
    if (!record.warnings.empty()) j["warnings"] = record.warnings;
    if (!record.error.empty()) j["error"] = record.error;
    return j;
}

ExtractionRecord extraction_record_from_json(const json& j, int line_number) {
    ExtractionRecord record;
    record.id = j.value("id", "");
    if (record.id.empty())
        throw FormatError("extraction file: missing id at line " + std::to_string(line_number));
    record.model = j.value("model", "");
    record.raw = j.value("raw", "");
    record.error = j.value("error", "");
    if (j.contains("triples")) {
        for (const json& item : j.at("triples")) {
            if (!item.is_array() || item.size() != 3)
                throw FormatError("extraction file: bad triple at line " +
                                  std::to_string(line_number));
            record.triples.triples.push_back(Triple{item[0].get<std::string>(),
                                                    item[1].get<std::string>(),
                                                    item[2].get<std::string>()});
        }
    } else if (!record.raw.empty()) {
        parser::RawGeneration gen{record.id, record.raw, record.model};
        parser::ParseResult parsed = parser::parse_triples(gen);
        record.triples = std::move(parsed.triples);
        record.warnings = std::move(parsed.warnings);
    }
    if (j.contains("warnings"))
        record.warnings = j.at("warnings").get<std::vector<std::string>>();
    return record;
}

} // namespace

std::vector<ExtractionRecord> load_extractions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open extraction file: " + path);

    std::unordered_map<std::string, std::size_t> index;
    std::vector<ExtractionRecord> records;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded())
            throw FormatError("extraction file: malformed JSON at line " +
                              std::to_string(line_number));
        ExtractionRecord record = extraction_record_from_json(j, line_number);
        const auto it = index.find(record.id);
        if (it == index.end()) {
            index.emplace(record.id, records.size());
            records.push_back(std::move(record));
        } else {
            records[it->second] = std::move(record); // later record wins
        }
    }
    return records;
}

ExtractSummary run_extract(const PipelineConfig& config) {
    if (config.extraction.output_path.empty())
        throw ValidationError("extract: extraction.output_path required");

    const data::CorpusManifest corpus = load_input_corpus(config);

    // Validate strategy requirements against the corpus before touching
    // the backend.
    if (config.extraction.strategy == prompt::Strategy::closed) {
        std::vector<std::string> missing;
        for (const EvaluationUnit& unit : corpus.units)
            if (unit.entity_pairs.empty()) missing.push_back(unit.id);
        if (!missing.empty()) {
            std::string ids;
            for (std::size_t i = 0; i < missing.size() && i < 5; ++i)
                ids += (i ? ", " : "") + missing[i];
            throw ValidationError("closed GRE requires entity_pairs; missing for units: " +
                                  ids + (missing.size() > 5 ? ", ..." : ""));
        }
    }

    // Resume support: successful records survive, errored ones retry.
    std::set<std::string> done;
    if (fs::exists(config.extraction.output_path)) {
        for (const ExtractionRecord& record : load_extractions(config.extraction.output_path))
            if (record.error.empty()) done.insert(record.id);
    }

    auto client = make_completion_client(config.extraction.backend,
                                         config.extraction.script_path, config.extraction.http);

    ensure_parent_dir(config.extraction.output_path);
    std::ofstream out(config.extraction.output_path, std::ios::binary | std::ios::app);
    if (!out)
        throw Error("cannot open extraction output: " + config.extraction.output_path);

    ExtractSummary summary;
    summary.output_path = config.extraction.output_path;

    for (const EvaluationUnit& unit : corpus.units) {
        if (done.count(unit.id)) {
            ++summary.skipped;
            continue;
        }

        prompt::GreInputs inputs;
        inputs.source_text = unit.text;
        inputs.relation_types = config.extraction.relation_types;
        inputs.entity_types = config.extraction.entity_types;
        inputs.entity_pairs = unit.entity_pairs;
        const prompt::GrePrompt rendered = prompt::render_prompt(
            config.extraction.strategy, inputs, config.extraction.domain, config.resource_dir);

        ExtractionRecord record;
        record.id = unit.id;
        record.model = client->model_id();
        try {
            record.raw = client->complete(rendered.rendered, config.extraction.max_new_tokens,
                                          config.extraction.temperature);
            parser::RawGeneration gen{unit.id, record.raw, record.model};
            parser::ParseResult parsed = parser::parse_triples(gen);
            record.triples = std::move(parsed.triples);
            record.warnings = std::move(parsed.warnings);
            ++summary.completed;
        } catch (const TransportError& e) {
            record.error = e.what();
            ++summary.failed;
        }
        out << extraction_record_to_json(record).dump() << "\n";
        out.flush();
    }
    return summary;
}

namespace {

struct ScoringContext {
    const PipelineConfig* config = nullptr;
    const lda::TopicModel* model = nullptr;
    const lda::Preprocessor* pre = nullptr;
    embed::EmbeddingProvider* provider = nullptr;
    embed::EmbeddingCache* cache = nullptr;
    llm::CompletionClient* judge_client = nullptr;
    bool want_ts = false, want_us = false, want_fs = false, want_gs = false, want_cs = false;
    bool closed_mode = false;
};

UnitScores score_unit(const ScoringContext& ctx, const EvaluationUnit& unit,
                      bool* transport_failure) {
    const PipelineConfig& config = *ctx.config;
    UnitScores scores;

    scores.triple_count = static_cast<int>(unit.extracted.size());
    if (!unit.extracted.empty()) {
        long long tokens = 0;
        for (const Triple& t : unit.extracted.triples) tokens += tokens_per_triple(t);
        scores.mean_tokens_per_triple =
            static_cast<double>(tokens) / static_cast<double>(unit.extracted.size());
    }

    if (ctx.want_ts) {
        const lda::TopicalSimilarityResult ts = lda::topical_similarity(
            *ctx.model, unit, *ctx.pre, config.scoring.kl_epsilon, config.lda.infer_sweeps);
        scores.ts = ts.ts;
        for (const std::string& w : ts.warnings) scores.warnings.push_back(w);
    }

    std::vector<embed::EmbeddingVector> extracted_embs;
    const bool need_extracted_embs =
        (ctx.want_us || ctx.want_cs) && !unit.extracted.empty();
    if (need_extracted_embs)
        extracted_embs =
            embed::triple_embeddings(unit.extracted.triples, config.scoring.triple_embedding_mode,
                                     *ctx.provider, *ctx.cache);

    if (ctx.want_us) {
        if (unit.extracted.empty()) {
            scores.warnings.push_back("unit " + unit.id +
                                      ": uniqueness undefined for empty extraction");
        } else {
            scores.us = metrics::uniqueness(extracted_embs, config.scoring.similarity_threshold);
        }
    }

    if (ctx.want_fs) {
        if (unit.extracted.empty()) {
            scores.warnings.push_back("unit " + unit.id +
                                      ": factualness undefined for empty extraction");
        } else {
            judge::JudgeOptions options;
            options.temperature = config.judge.temperature;
            options.max_new_tokens = config.judge.max_new_tokens;
            options.retries = config.judge.retries;
            options.resource_dir = config.resource_dir;
            try {
                std::vector<judge::FactVerdict> verdicts;
                scores.fs = judge::factualness(unit, *ctx.judge_client, options, &verdicts);
                for (const judge::FactVerdict& v : verdicts)
                    if (v.warning) scores.warnings.push_back("unit " + unit.id + ": " + *v.warning);
            } catch (const TransportError& e) {
                scores.warnings.push_back("unit " + unit.id + ": FS absent: " + e.what());
                *transport_failure = true;
            }
        }
    }

    if (ctx.want_gs) {
        if (unit.extracted.empty()) {
            scores.warnings.push_back("unit " + unit.id +
                                      ": granularity undefined for empty extraction");
        } else {
            judge::JudgeOptions options;
            options.temperature = config.judge.temperature;
            options.max_new_tokens = config.judge.max_new_tokens;
            options.retries = config.judge.retries;
            options.resource_dir = config.resource_dir;
            try {
                std::vector<judge::SplitVerdict> verdicts;
                scores.gs = judge::granularity(unit, *ctx.judge_client, options, &verdicts);
                for (const judge::SplitVerdict& v : verdicts)
                    if (v.warning) scores.warnings.push_back("unit " + unit.id + ": " + *v.warning);
            } catch (const TransportError& e) {
                scores.warnings.push_back("unit " + unit.id + ": GS absent: " + e.what());
                *transport_failure = true;
            }
        }
    }

    if (ctx.want_cs && unit.gold && !unit.gold->empty()) {
        const std::vector<embed::EmbeddingVector> gold_embs =
            embed::triple_embeddings(unit.gold->triples, config.scoring.triple_embedding_mode,
                                     *ctx.provider, *ctx.cache);
        std::vector<embed::EmbeddingVector> gold_rel, extracted_rel;
        if (ctx.closed_mode) {
            gold_rel = embed::relation_embeddings(unit.gold->triples, *ctx.provider, *ctx.cache);
            extracted_rel =
                embed::relation_embeddings(unit.extracted.triples, *ctx.provider, *ctx.cache);
        }
        const metrics::CompletenessResult cs = metrics::completeness(
            gold_embs, extracted_embs, config.scoring.similarity_threshold, ctx.closed_mode,
            gold_rel, extracted_rel);
        scores.cs = cs.cs;
    }

    return scores;
}

} // namespace

ScoreOutcome run_score(const PipelineConfig& config, const std::string& extraction_path) {
    data::CorpusManifest corpus = load_input_corpus(config);
    if (corpus.units.empty()) throw ValidationError("score: corpus is empty");

    const std::string source =
        !extraction_path.empty() ? extraction_path : config.extraction.output_path;

    std::string extraction_note;
    if (source == "gold") {
        // Score each unit's gold list as its extraction (ground-truth row).
        for (EvaluationUnit& unit : corpus.units) {
            if (!unit.gold)
                throw ValidationError("score --extraction gold: unit " + unit.id +
                                      " has no gold triples");
            unit.extracted = *unit.gold;
            unit.extracted.origin = Origin::extracted;
        }
        extraction_note = "gold";
    } else {
        if (source.empty())
            throw ValidationError("score: no extraction file configured or given");
        std::unordered_map<std::string, ExtractionRecord> by_id;
        for (ExtractionRecord& record : load_extractions(source))
            by_id[record.id] = std::move(record);
        for (EvaluationUnit& unit : corpus.units) {
            const auto it = by_id.find(unit.id);
            if (it != by_id.end()) unit.extracted = it->second.triples;
        }
        extraction_note = basename_of(source);
    }

    // Which metrics run: explicit selection wins; otherwise everything
    // the configuration makes available.
    const bool explicit_selection = !config.metrics.empty();
    auto selected = [&](const char* name) {
        return !explicit_selection || config.metrics.count(name) > 0;
    };

    const bool lda_available =
        !config.lda.model_path.empty() &&
        (fs::exists(config.lda.model_path) || config.lda.train_if_missing);
    const bool judge_available =
        config.judge.backend == BackendKind::http ? !config.judge.http.base_url.empty()
                                                  : !config.judge.script_path.empty();

    ScoringContext ctx;
    ctx.config = &config;
    ctx.want_ts = selected("ts") && (explicit_selection || lda_available);
    ctx.want_us = selected("us");
    ctx.want_fs = selected("fs") && (explicit_selection || judge_available);
    ctx.want_gs = selected("gs") && (explicit_selection || judge_available);
    ctx.want_cs = selected("cs");
    ctx.closed_mode = config.extraction.strategy == prompt::Strategy::closed;

    if (explicit_selection && config.metrics.count("ts") && !lda_available)
        throw ValidationError("score: ts requested but no LDA model is configured");
    if (explicit_selection && (config.metrics.count("fs") || config.metrics.count("gs")) &&
        !judge_available)
        throw ValidationError("score: fs/gs requested but no judge backend is configured");
    if (explicit_selection && config.metrics.count("cs")) {
        std::string missing;
        int missing_count = 0;
        for (const EvaluationUnit& unit : corpus.units) {
            if (!unit.gold || unit.gold->empty()) {
                if (missing_count < 10) missing += (missing_count ? ", " : "") + unit.id;
                ++missing_count;
            }
        }
        if (missing_count > 0)
            throw ValidationError("score: cs requested but these units have no gold triples: " +
                                  missing + (missing_count > 10 ? ", ..." : ""));
    }
    if (!explicit_selection && ctx.want_cs) {
        // Default selection: skip CS entirely when nothing has gold.
        bool any_gold = false;
        for (const EvaluationUnit& unit : corpus.units)
            if (unit.gold && !unit.gold->empty()) any_gold = true;
        ctx.want_cs = any_gold;
    }

    // Wire up the backends.
    lda::TopicModel model;
    lda::Preprocessor pre;
    if (ctx.want_ts) {
        pre = lda::Preprocessor::from_stopword_file(config.resource_dir + "/stopwords_en.txt");
        if (fs::exists(config.lda.model_path)) {
            model = lda::load_model(config.lda.model_path);
        } else if (config.lda.train_if_missing) {
            run_train_lda(config);
            model = lda::load_model(config.lda.model_path);
        } else {
            throw ValidationError("score: LDA model file not found: " + config.lda.model_path);
        }
        ctx.model = &model;
        ctx.pre = &pre;
    }

    std::unique_ptr<embed::EmbeddingProvider> provider;
    embed::EmbeddingCache cache(config.embedding.cache_path);
    if (ctx.want_us || ctx.want_cs) {
        provider = make_embedding_provider(config.embedding);
        ctx.provider = provider.get();
        ctx.cache = &cache;
    }

    std::unique_ptr<llm::CompletionClient> judge_client;
    if (ctx.want_fs || ctx.want_gs) {
        judge_client = make_completion_client(config.judge.backend, config.judge.script_path,
                                              config.judge.http);
        ctx.judge_client = judge_client.get();
    }

    // Unit-level fan-out; results land in a pre-sized vector so the
    // aggregation order never depends on scheduling.
    std::vector<UnitScores> unit_scores(corpus.units.size());
    std::atomic_bool partial{false};
    std::atomic_size_t next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < corpus.units.size();
             i = next.fetch_add(1)) {
            try {
                bool transport_failure = false;
                unit_scores[i] = score_unit(ctx, corpus.units[i], &transport_failure);
                if (transport_failure) partial = true;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int worker_count =
        std::max(1, std::min<int>(config.workers, static_cast<int>(corpus.units.size())));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(worker_count);
        for (int w = 0; w < worker_count; ++w) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::map<std::string, UnitScores> per_unit;
    for (std::size_t i = 0; i < corpus.units.size(); ++i)
        per_unit[corpus.units[i].id] = std::move(unit_scores[i]);

    std::map<std::string, std::string> metadata;
    metadata["tool"] = "genres";
    metadata["tool_version"] = kToolVersion;
    metadata["timestamp"] = resolve_timestamp(config);
    metadata["corpus"] = basename_of(config.corpus_path);
    metadata["extraction"] = extraction_note;
    metadata["template_version"] = prompt::template_version();
    metadata["similarity_threshold"] = std::to_string(config.scoring.similarity_threshold);
    metadata["triple_embedding_mode"] = to_string(config.scoring.triple_embedding_mode);
    metadata["seed"] = std::to_string(config.scoring.seed);
    metadata["strategy"] = prompt::to_string(config.extraction.strategy);
    if (ctx.want_ts) {
        metadata["lda_topic_count"] = std::to_string(model.K);
        metadata["lda_seed"] = std::to_string(model.training_seed);
        metadata["lda_iterations"] = std::to_string(config.lda.iterations);
    }
    if (ctx.provider) metadata["embedding_provider"] = ctx.provider->provider_id();
    if (ctx.judge_client) {
        metadata["judge_model"] = ctx.judge_client->model_id();
        metadata["judge_temperature"] = std::to_string(config.judge.temperature);
        metadata["judge_max_new_tokens"] = std::to_string(config.judge.max_new_tokens);
    }
    metadata["conventions"] =
        "scores in [0,1] internally, percent in this file; US(n=1)=1; TS(empty extraction)=0";

    ScoreOutcome outcome;
    outcome.report = aggregate_report(per_unit, std::move(metadata));
    outcome.partial = partial.load();

    fs::create_directories(config.output_dir);
    outcome.report_path = (fs::path(config.output_dir) / "report.json").string();
    save_report(outcome.report, outcome.report_path);
    return outcome;
}

} // namespace genres::pipeline
