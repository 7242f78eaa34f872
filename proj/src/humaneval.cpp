#include "genres/humaneval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace genres::humaneval {

std::string to_string(Metric m) {
    switch (m) {
        case Metric::ts: return "ts";
        case Metric::us: return "us";
        case Metric::fs: return "fs";
        case Metric::gs: return "gs";
        case Metric::cs: return "cs";
    }
    throw ValidationError("unknown metric");
}

Metric metric_from_string(std::string_view s) {
    if (s == "ts") return Metric::ts;
    if (s == "us") return Metric::us;
    if (s == "fs") return Metric::fs;
    if (s == "gs") return Metric::gs;
    if (s == "cs") return Metric::cs;
    throw ValidationError("unknown metric: " + std::string(s));
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::a_wins: return "a";
        case Verdict::b_wins: return "b";
        case Verdict::tie: return "tie";
    }
    throw ValidationError("unknown verdict");
}

Verdict verdict_from_string(std::string_view s) {
    if (s == "a" || s == "a_wins") return Verdict::a_wins;
    if (s == "b" || s == "b_wins") return Verdict::b_wins;
    if (s == "tie") return Verdict::tie;
    throw ValidationError("unknown verdict: " + std::string(s));
}

bool PairwiseAnnotation::same_pair(const PairwiseAnnotation& other) const {
    return sample_id == other.sample_id && metric == other.metric &&
           model_a == other.model_a && model_b == other.model_b;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

constexpr const char* kCsvHeader = "sample_id,metric,model_a,model_b,verdict,annotator_id";

} // namespace

std::vector<PairwiseAnnotation> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open annotation file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError("annotation file is empty: " + path);
    if (trim(line) != kCsvHeader)
        throw FormatError("annotation file must start with header '" +
                          std::string(kCsvHeader) + "': " + path);

    std::vector<PairwiseAnnotation> annotations;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6)
            throw FormatError("expected 6 CSV fields at line " + std::to_string(line_number) +
                              " of " + path);
        PairwiseAnnotation a;
        a.sample_id = fields[0];
        a.metric = metric_from_string(fields[1]);
        a.model_a = fields[2];
        a.model_b = fields[3];
        a.verdict = verdict_from_string(fields[4]);
        a.annotator_id = fields[5];
        if (a.model_a == a.model_b)
            throw FormatError("model_a equals model_b at line " + std::to_string(line_number) +
                              " of " + path);
        annotations.push_back(std::move(a));
    }
    return annotations;
}

void save_annotations(const std::vector<PairwiseAnnotation>& annotations,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open annotation file for writing: " + path);
    out << kCsvHeader << "\n";
    for (const PairwiseAnnotation& a : annotations) {
        out << a.sample_id << "," << to_string(a.metric) << "," << a.model_a << ","
            << a.model_b << "," << to_string(a.verdict) << "," << a.annotator_id << "\n";
    }
}

PairwiseAnnotation merge_annotations(const PairwiseAnnotation& a1,
                                     const PairwiseAnnotation& a2) {
    if (!a1.same_pair(a2))
        throw ValidationError("merge_annotations: annotations refer to different pairs (" +
                              a1.sample_id + "/" + to_string(a1.metric) + " vs " +
                              a2.sample_id + "/" + to_string(a2.metric) + ")");

    PairwiseAnnotation merged = a1;
    merged.annotator_id = a1.annotator_id + "+" + a2.annotator_id;

    if (a1.verdict == a2.verdict) {
        merged.verdict = a1.verdict;
    } else if (a1.verdict == Verdict::tie) {
        merged.verdict = a2.verdict;
    } else if (a2.verdict == Verdict::tie) {
        merged.verdict = a1.verdict;
    } else {
        // a_wins against b_wins: the models are considered tied.
        merged.verdict = Verdict::tie;
    }
    return merged;
}

std::vector<PairwiseAnnotation> merge_annotation_lists(
    const std::vector<PairwiseAnnotation>& list1,
    const std::vector<PairwiseAnnotation>& list2) {
    if (list1.size() != list2.size())
        throw ValidationError("merge: annotation lists have different lengths (" +
                              std::to_string(list1.size()) + " vs " +
                              std::to_string(list2.size()) + ")");
    std::vector<PairwiseAnnotation> merged;
    merged.reserve(list1.size());
    for (std::size_t i = 0; i < list1.size(); ++i)
        merged.push_back(merge_annotations(list1[i], list2[i]));
    return merged;
}

EloState::EloState(double k_factor, double initial_rating)
    : k_(k_factor), initial_(initial_rating) {
    if (!(k_factor > 0.0)) throw ValidationError("elo: k_factor must be positive");
}

double EloState::expected_score(double rating_a, double rating_b) {
    return 1.0 / (1.0 + std::pow(10.0, (rating_b - rating_a) / 400.0));
}

void EloState::update(const Comparison& comparison) {
    if (comparison.model_a == comparison.model_b)
        throw ValidationError("elo: a model cannot play itself");

    double& rating_a = ratings_.try_emplace(comparison.model_a, initial_).first->second;
    double& rating_b = ratings_.try_emplace(comparison.model_b, initial_).first->second;

    const double expected_a = expected_score(rating_a, rating_b);
    double actual_a = 0.5;
    if (comparison.verdict == Verdict::a_wins) actual_a = 1.0;
    if (comparison.verdict == Verdict::b_wins) actual_a = 0.0;

    // One delta applied with both signs keeps the rating mass conserved
    // exactly, not just up to rounding.
    const double delta = k_ * (actual_a - expected_a);
    rating_a += delta;
    rating_b -= delta;

    history_.push_back(comparison);
}

double EloState::rating(const std::string& model) const {
    const auto it = ratings_.find(model);
    return it == ratings_.end() ? initial_ : it->second;
}

EloState replay_elo(std::vector<PairwiseAnnotation> annotations, double k_factor,
                    double initial_rating) {
    std::sort(annotations.begin(), annotations.end(),
              [](const PairwiseAnnotation& x, const PairwiseAnnotation& y) {
                  if (x.sample_id != y.sample_id) return x.sample_id < y.sample_id;
                  if (x.metric != y.metric) return x.metric < y.metric;
                  if (x.model_a != y.model_a) return x.model_a < y.model_a;
                  return x.model_b < y.model_b;
              });

    EloState state(k_factor, initial_rating);
    for (const PairwiseAnnotation& a : annotations)
        state.update({a.model_a, a.model_b, a.verdict});
    return state;
}

double tie_discounted_agreement(const std::vector<PairwiseAnnotation>& list1,
                                const std::vector<PairwiseAnnotation>& list2) {
    if (list1.size() != list2.size())
        throw ValidationError("agreement: annotation lists have different lengths (" +
                              std::to_string(list1.size()) + " vs " +
                              std::to_string(list2.size()) + ")");
    if (list1.empty()) throw ValidationError("agreement: empty annotation lists");

    double credit = 0.0;
    for (std::size_t i = 0; i < list1.size(); ++i) {
        if (!list1[i].same_pair(list2[i]))
            throw ValidationError("agreement: lists misaligned at row " + std::to_string(i));
        if (list1[i].verdict == list2[i].verdict) {
            credit += 1.0;
        } else if (list1[i].verdict == Verdict::tie || list2[i].verdict == Verdict::tie) {
            credit += 0.5;
        }
    }
    return credit / static_cast<double>(list1.size());
}

} // namespace genres::humaneval
