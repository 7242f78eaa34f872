#include <doctest.h>

#include <cmath>

#include "genres/judge.hpp"

using namespace genres;
using namespace genres::judge;

namespace {

/// Minimal in-memory client: replays a fixed sequence of responses.
class SequenceClient : public llm::CompletionClient {
public:
    explicit SequenceClient(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::string model_id() const override { return "sequence"; }
    std::string complete(const std::string&, int, double) override {
        if (calls_ >= responses_.size()) return responses_.back();
        return responses_[calls_++];
    }
    std::size_t calls() const { return calls_; }

private:
    std::vector<std::string> responses_;
    std::size_t calls_ = 0;
};

class FailingClient : public llm::CompletionClient {
public:
    std::string model_id() const override { return "failing"; }
    std::string complete(const std::string&, int, double) override {
        throw TransportError("backend unreachable");
    }
};

EvaluationUnit unit_with(std::vector<Triple> triples) {
    EvaluationUnit unit;
    unit.id = "u1";
    unit.text = "Alice lives in Champaign.";
    unit.extracted.triples = std::move(triples);
    return unit;
}

} // namespace

TEST_CASE("fact verdict parsing finds the standalone token") {
    CHECK(parse_fact_response("true") == true);
    CHECK(parse_fact_response("False") == false);
    CHECK(parse_fact_response("The answer is TRUE.") == true);
    CHECK(parse_fact_response("false, because the text says otherwise") == false);
    CHECK_FALSE(parse_fact_response("truest of them all").has_value());
    CHECK_FALSE(parse_fact_response("no verdict here").has_value());
    CHECK_FALSE(parse_fact_response("").has_value());
    // First standalone token wins when both appear.
    CHECK(parse_fact_response("true (not false)") == true);
    CHECK(parse_fact_response("false... definitely not true") == false);
}

TEST_CASE("split verdict parsing: integer, phrase, sub-triple count") {
    CHECK(parse_split_response("0") == 0);
    CHECK(parse_split_response("2") == 2);
    CHECK(parse_split_response("Split count: 3. [a,r,b]; [c,r,d]; [e,r,f]") == 3);
    CHECK(parse_split_response("0. The triple is already atomic.") == 0);
    CHECK(parse_split_response("This triple cannot be split any further.") == 0);
    CHECK(parse_split_response("It is atomic.") == 0);
    CHECK(parse_split_response("can be split into: [a,r1,b]; [a,r2,c]") == 2);
    CHECK_FALSE(parse_split_response("no idea").has_value());
    // Digits glued to words are not standalone integers.
    CHECK(parse_split_response("v2-style notes, then [x, y, z]") == 1);
}

TEST_CASE("check_fact parses the mock verdict") {
    const Triple t{"Alice", "live in", "Champaign"};

    SequenceClient yes({"true"});
    const FactVerdict v1 = check_fact("Alice lives in Champaign.", t, yes);
    CHECK(v1.supported);
    CHECK(v1.attempts == 1);

    SequenceClient no({"false"});
    const FactVerdict v2 = check_fact("Alice lives in Champaign.", t, no);
    CHECK_FALSE(v2.supported);
}

TEST_CASE("check_fact retries gibberish then accepts") {
    SequenceClient flaky({"???", "still nothing", "true"});
    JudgeOptions options;
    options.retries = 2;
    const FactVerdict v = check_fact("text", {"a", "r", "b"}, flaky, options);
    CHECK(v.supported);
    CHECK(v.attempts == 3);
    CHECK_FALSE(v.warning.has_value());
}

TEST_CASE("unparseable fact verdict defaults to unsupported with warning") {
    SequenceClient hopeless({"???", "???", "???"});
    JudgeOptions options;
    options.retries = 2;
    const FactVerdict v = check_fact("text", {"a", "r", "b"}, hopeless, options);
    CHECK_FALSE(v.supported);
    CHECK(v.attempts == 3);
    CHECK(v.warning.has_value());
}

TEST_CASE("check_fact requires a source text") {
    SequenceClient yes({"true"});
    CHECK_THROWS_AS(check_fact("   ", {"a", "r", "b"}, yes), ValidationError);
}

TEST_CASE("factualness is the mean of supported indicators") {
    SequenceClient all_yes({"true", "true", "true", "true"});
    CHECK(factualness(unit_with({{"a", "r", "b"},
                                 {"c", "r", "d"},
                                 {"e", "r", "f"},
                                 {"g", "r", "h"}}),
                      all_yes) == 1.0);

    SequenceClient one_of_four({"true", "false", "false", "false"});
    CHECK(factualness(unit_with({{"a", "r", "b"},
                                 {"c", "r", "d"},
                                 {"e", "r", "f"},
                                 {"g", "r", "h"}}),
                      one_of_four) == 0.25);
}

TEST_CASE("factualness rejects empty extraction and propagates transport errors") {
    SequenceClient yes({"true"});
    CHECK_THROWS_AS(factualness(unit_with({}), yes), ValidationError);

    FailingClient failing;
    CHECK_THROWS_AS(factualness(unit_with({{"a", "r", "b"}}), failing), TransportError);
}

TEST_CASE("check_granularity parses counts and sub-triple lists") {
    SequenceClient atomic({"0. Cannot be split, one relationship."});
    const SplitVerdict v0 = check_granularity({"a", "r", "b"}, atomic);
    CHECK(v0.split_count == 0);

    SequenceClient two({"2"});
    CHECK(check_granularity({"a", "r", "b"}, two).split_count == 2);

    SequenceClient listed({"can be split into: [a,r1,b]; [a,r2,c]"});
    CHECK(check_granularity({"a", "r and r2", "b"}, listed).split_count == 2);
}

TEST_CASE("unparseable split verdict defaults to atomic with warning") {
    SequenceClient hopeless({"shrug", "shrug", "shrug"});
    JudgeOptions options;
    options.retries = 2;
    const SplitVerdict v = check_granularity({"a", "r", "b"}, hopeless, options);
    CHECK(v.split_count == 0);
    CHECK(v.warning.has_value());
    CHECK(v.attempts == 3);
}

TEST_CASE("granularity closed forms") {
    SequenceClient all_atomic({"0", "0", "0"});
    CHECK(granularity(unit_with({{"a", "r", "b"}, {"c", "r", "d"}, {"e", "r", "f"}}),
                      all_atomic) == doctest::Approx(1.0).epsilon(1e-12));

    SequenceClient two({"2"});
    CHECK(granularity(unit_with({{"a", "r", "b"}}), two) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-6));

    SequenceClient mixed({"0", "1"});
    CHECK(granularity(unit_with({{"a", "r", "b"}, {"c", "r", "d"}}), mixed) ==
          doctest::Approx((1.0 + std::exp(-1.0)) / 2.0).epsilon(1e-6));
}

TEST_CASE("granularity strictly decreases when a split count rises") {
    SequenceClient before({"0", "0"});
    SequenceClient after({"0", "1"});
    const auto unit = unit_with({{"a", "r", "b"}, {"c", "r", "d"}});
    CHECK(granularity(unit, after) < granularity(unit, before));
}
