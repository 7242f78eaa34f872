#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "genres/humaneval.hpp"
#include "genres/pipeline.hpp"
#include "genres/report.hpp"

namespace {

using namespace genres;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTransport = 2;
constexpr int kExitPartial = 3;

struct CommonFlags {
    std::string config_path;
    std::string corpus;
    std::string output_dir;
    std::string resources;
    std::string metrics;
    std::string extraction;
    std::string lda_model;
    std::string fixed_timestamp;
    std::int64_t sample_n = -1;
    std::int64_t sample_seed = -1;
    std::int64_t seed = -1;
    std::int64_t topic_count = -1;
    std::int64_t iterations = -1;
    std::int64_t workers = -1;
    double threshold = -1.0;
    bool train_if_missing = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("-c,--config", flags.config_path, "Pipeline config file (JSON)");
    cmd->add_option("--corpus", flags.corpus, "Corpus JSONL path (overrides config)");
    cmd->add_option("--output-dir", flags.output_dir, "Output directory (overrides config)");
    cmd->add_option("--resources", flags.resources, "Resource directory (overrides config)");
    cmd->add_option("--sample-n", flags.sample_n, "Sample size (overrides config)");
    cmd->add_option("--sample-seed", flags.sample_seed, "Sample seed (overrides config)");
    cmd->add_option("--seed", flags.seed, "Scoring/training seed (overrides config)");
    cmd->add_option("--topic-count", flags.topic_count, "LDA topic count (overrides config)");
    cmd->add_option("--iterations", flags.iterations, "LDA Gibbs iterations (overrides config)");
    cmd->add_option("--workers", flags.workers, "Scoring worker threads (overrides config)");
    cmd->add_option("--threshold", flags.threshold,
                    "Similarity threshold phi (overrides config)");
    cmd->add_option("--lda-model", flags.lda_model, "LDA model path (overrides config)");
    cmd->add_option("--fixed-timestamp", flags.fixed_timestamp,
                    "Record this timestamp instead of the current time");
}

pipeline::PipelineConfig resolve_config(const CommonFlags& flags) {
    pipeline::PipelineConfig config;
    if (!flags.config_path.empty()) config = pipeline::load_config(flags.config_path);

    // Command-line flags win over config-file values.
    if (!flags.corpus.empty()) config.corpus_path = flags.corpus;
    if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
    if (!flags.resources.empty()) config.resource_dir = flags.resources;
    if (flags.sample_n >= 0) config.sample_n = static_cast<std::size_t>(flags.sample_n);
    if (flags.sample_seed >= 0)
        config.sample_seed = static_cast<std::uint64_t>(flags.sample_seed);
    if (flags.seed >= 0) config.scoring.seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.topic_count >= 0) config.scoring.topic_count = static_cast<int>(flags.topic_count);
    if (flags.iterations >= 0) config.lda.iterations = static_cast<int>(flags.iterations);
    if (flags.workers >= 0) config.workers = static_cast<int>(flags.workers);
    if (flags.threshold >= 0.0) config.scoring.similarity_threshold = flags.threshold;
    if (!flags.lda_model.empty()) config.lda.model_path = flags.lda_model;
    if (!flags.fixed_timestamp.empty()) config.fixed_timestamp = flags.fixed_timestamp;
    if (flags.train_if_missing) config.lda.train_if_missing = true;
    if (!flags.metrics.empty()) {
        config.metrics.clear();
        std::stringstream ss(flags.metrics);
        std::string m;
        while (std::getline(ss, m, ',')) config.metrics.insert(trim(m));
    }

    config.validate();
    return config;
}

int cmd_train_lda(const CommonFlags& flags) {
    const pipeline::PipelineConfig config = resolve_config(flags);
    const pipeline::TrainSummary summary = pipeline::run_train_lda(config);
    std::cout << "trained LDA model: " << summary.model_path << "\n"
              << "  corpus size: " << summary.corpus_size << "\n"
              << "  vocabulary:  " << summary.vocab_size << "\n"
              << "  topics (K):  " << summary.topic_count << "\n"
              << "  seed:        " << summary.seed << "\n";
    return kExitOk;
}

int cmd_extract(const CommonFlags& flags) {
    const pipeline::PipelineConfig config = resolve_config(flags);
    const pipeline::ExtractSummary summary = pipeline::run_extract(config);
    std::cout << "extraction written to " << summary.output_path << "\n"
              << "  completed: " << summary.completed << "\n"
              << "  skipped:   " << summary.skipped << " (already present)\n"
              << "  failed:    " << summary.failed << "\n";
    return summary.failed > 0 ? kExitPartial : kExitOk;
}

int cmd_score(const CommonFlags& flags) {
    const pipeline::PipelineConfig config = resolve_config(flags);
    const pipeline::ScoreOutcome outcome = pipeline::run_score(config, flags.extraction);
    std::cout << render_report_table(outcome.report);
    std::cout << "report written to " << outcome.report_path << "\n";
    if (outcome.partial) {
        std::cerr << "warning: some units lost a metric to backend failures\n";
        return kExitPartial;
    }
    return kExitOk;
}

int cmd_report(const std::string& report_path) {
    const ScoreReport report = load_report(report_path);
    std::cout << render_report_table(report);
    return kExitOk;
}

int cmd_elo(const std::vector<std::string>& annotation_files, double k_factor,
            double initial_rating, const std::string& out_path,
            const std::string& merged_out) {
    std::vector<humaneval::PairwiseAnnotation> annotations =
        humaneval::load_annotations(annotation_files[0]);
    if (annotation_files.size() == 2) {
        const auto second = humaneval::load_annotations(annotation_files[1]);
        annotations = humaneval::merge_annotation_lists(annotations, second);
        if (!merged_out.empty()) humaneval::save_annotations(annotations, merged_out);
    } else if (annotation_files.size() > 2) {
        throw ValidationError("elo: pass one annotation file, or two to merge first");
    }

    const humaneval::EloState state = humaneval::replay_elo(annotations, k_factor,
                                                            initial_rating);

    nlohmann::json j;
    j["ratings"] = state.ratings();
    j["k_factor"] = state.k_factor();
    j["initial_rating"] = state.initial_rating();
    j["comparisons"] = state.history().size();
    j["note"] = "ratings are order-dependent; comparisons are replayed sorted by "
                "(sample_id, metric, model_a, model_b)";
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw Error("cannot open output file: " + out_path);
        out << text;
        std::cout << "elo ratings written to " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_agreement(const std::string& file1, const std::string& file2,
                  const std::string& out_path) {
    const auto list1 = humaneval::load_annotations(file1);
    const auto list2 = humaneval::load_annotations(file2);

    nlohmann::json per_metric = nlohmann::json::object();
    for (const char* name : {"ts", "us", "fs", "gs", "cs"}) {
        const humaneval::Metric metric = humaneval::metric_from_string(name);
        std::vector<humaneval::PairwiseAnnotation> sub1, sub2;
        for (std::size_t i = 0; i < list1.size(); ++i) {
            if (list1[i].metric == metric) {
                sub1.push_back(list1[i]);
                sub2.push_back(list2.at(i));
            }
        }
        if (!sub1.empty())
            per_metric[name] = humaneval::tie_discounted_agreement(sub1, sub2) * 100.0;
    }

    nlohmann::json j;
    j["overall"] = humaneval::tie_discounted_agreement(list1, list2) * 100.0;
    j["per_metric"] = per_metric;
    j["pairs"] = list1.size();
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw Error("cannot open output file: " + out_path);
        out << text;
        std::cout << "agreement written to " << out_path << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"genres: multi-dimensional scoring for generative relation extraction"};
    app.require_subcommand(1);

    CommonFlags flags;

    CLI::App* train = app.add_subcommand("train-lda", "Train an LDA topic model from a corpus");
    add_common_flags(train, flags);

    CLI::App* extract =
        app.add_subcommand("extract", "Run GRE prompting against the configured backend");
    add_common_flags(extract, flags);

    CLI::App* score = app.add_subcommand("score", "Score an extraction file against a corpus");
    add_common_flags(score, flags);
    score->add_option("--metrics", flags.metrics,
                      "Comma-separated subset of ts,us,fs,gs,cs (default: all available)");
    score->add_option("--extraction", flags.extraction,
                      "Extraction JSONL (or 'gold' to score gold triples as extractions)");
    score->add_flag("--train-if-missing", flags.train_if_missing,
                    "Train the LDA model in-process when the model file is absent");

    std::string report_path;
    CLI::App* report = app.add_subcommand("report", "Render a saved report as a console table");
    report->add_option("report_file", report_path, "Report JSON file")->required();

    std::vector<std::string> annotation_files;
    double k_factor = 32.0;
    double initial_rating = 1500.0;
    std::string elo_out, merged_out;
    CLI::App* elo = app.add_subcommand("elo", "Elo ratings from pairwise annotations");
    elo->add_option("annotations", annotation_files,
                    "Annotation CSV (one file, or two to merge first)")
        ->required()
        ->expected(1, 2);
    elo->add_option("--k-factor", k_factor, "Elo K-factor (default 32)");
    elo->add_option("--initial", initial_rating, "Initial rating (default 1500)");
    elo->add_option("--out", elo_out, "Write ratings JSON here instead of stdout");
    elo->add_option("--merged-out", merged_out, "Also write the merged annotation CSV");

    std::string agree_file1, agree_file2, agree_out;
    CLI::App* agreement =
        app.add_subcommand("agreement", "Tie-discounted inter-annotator agreement");
    agreement->add_option("annotator1", agree_file1, "First annotator CSV")->required();
    agreement->add_option("annotator2", agree_file2, "Second annotator CSV")->required();
    agreement->add_option("--out", agree_out, "Write agreement JSON here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train_lda(flags);
        if (extract->parsed()) return cmd_extract(flags);
        if (score->parsed()) return cmd_score(flags);
        if (report->parsed()) return cmd_report(report_path);
        if (elo->parsed()) return cmd_elo(annotation_files, k_factor, initial_rating, elo_out,
                                          merged_out);
        if (agreement->parsed()) return cmd_agreement(agree_file1, agree_file2, agree_out);
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
