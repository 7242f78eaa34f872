#pragma once

#include <map>
#include <string>
#include <vector>

#include "genres/core.hpp"

namespace genres::humaneval {

enum class Metric { ts, us, fs, gs, cs };
enum class Verdict { a_wins, b_wins, tie };

std::string to_string(Metric m);
Metric metric_from_string(std::string_view s);
std::string to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

/// One pairwise comparison by one annotator.
struct PairwiseAnnotation {
    std::string sample_id;
    Metric metric = Metric::ts;
    std::string model_a;
    std::string model_b;
    Verdict verdict = Verdict::tie;
    std::string annotator_id;

    /// Alignment key: (sample_id, metric, model_a, model_b).
    bool same_pair(const PairwiseAnnotation& other) const;
};

/// CSV with header sample_id,metric,model_a,model_b,verdict,annotator_id;
/// verdict is one of a, b, tie. Fields must not contain commas.
std::vector<PairwiseAnnotation> load_annotations(const std::string& path);
void save_annotations(const std::vector<PairwiseAnnotation>& annotations,
                      const std::string& path);

/// Merge two annotators' verdicts for the same pair: agreement stands,
/// a lone tie defers to the decided annotator, and head-on disagreement
/// becomes a tie. Commutative in its inputs. Throws ValidationError when
/// the pair keys differ.
PairwiseAnnotation merge_annotations(const PairwiseAnnotation& a1,
                                     const PairwiseAnnotation& a2);

/// Merge two aligned annotation lists element-wise.
std::vector<PairwiseAnnotation> merge_annotation_lists(
    const std::vector<PairwiseAnnotation>& list1, const std::vector<PairwiseAnnotation>& list2);

struct Comparison {
    std::string model_a;
    std::string model_b;
    Verdict verdict = Verdict::tie;
};

/// Incremental Elo ratings. Models register at `initial_rating` on first
/// sight; each comparison moves rating mass from loser to winner, so the
/// total is conserved exactly. Ratings are order-dependent; replaying the
/// history from a fresh state reproduces them bit for bit.
class EloState {
public:
    explicit EloState(double k_factor = 32.0, double initial_rating = 1500.0);

    void update(const Comparison& comparison);

    double rating(const std::string& model) const;
    const std::map<std::string, double>& ratings() const { return ratings_; }
    const std::vector<Comparison>& history() const { return history_; }
    double k_factor() const { return k_; }
    double initial_rating() const { return initial_; }

    /// Expected score of a against b: 1 / (1 + 10^((R_b - R_a)/400)).
    static double expected_score(double rating_a, double rating_b);

private:
    double k_;
    double initial_;
    std::map<std::string, double> ratings_;
    std::vector<Comparison> history_;
};

/// Replay annotations in the canonical order — sorted by (sample_id,
/// metric, model_a, model_b) — so reruns over the same file agree.
EloState replay_elo(std::vector<PairwiseAnnotation> annotations, double k_factor = 32.0,
                    double initial_rating = 1500.0);

/// Tie-discounted inter-annotator agreement: full credit for identical
/// verdicts, half credit when exactly one annotator declared a tie,
/// nothing otherwise. Lists must align pairwise on (sample_id, metric,
/// model pair).
double tie_discounted_agreement(const std::vector<PairwiseAnnotation>& list1,
                                const std::vector<PairwiseAnnotation>& list2);

} // namespace genres::humaneval
