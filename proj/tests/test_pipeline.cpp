#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "genres/pipeline.hpp"

using namespace genres;
using namespace genres::pipeline;

namespace {

const std::string kFixtures = GENRES_FIXTURE_DIR;
const std::string kTmp = GENRES_TEST_TMP_DIR;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: ", path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Full mock-backend config over the 10-unit fixture.
std::string fixture_config_json(const std::string& out_subdir) {
    const std::string out_dir = kTmp + "/" + out_subdir;
    nlohmann::json j = {
        {"corpus", kFixtures + "/corpus_10.jsonl"},
        {"output_dir", out_dir},
        {"fixed_timestamp", "2024-01-15T00:00:00Z"},
        {"scoring",
         {{"similarity_threshold", 0.95},
          {"topic_count", 2},
          {"seed", 42},
          {"workers", 2}}},
        {"lda",
         {{"model_path", out_dir + "/lda_model.json"},
          {"iterations", 120},
          {"train_if_missing", true}}},
        {"embedding", {{"backend", "mock_hash"}, {"dim", 64}, {"seed", 0}}},
        {"judge",
         {{"backend", "mock_scripted"}, {"script_path", kFixtures + "/judge_script.json"}}},
        {"extraction",
         {{"backend", "mock_scripted"},
          {"script_path", kFixtures + "/extract_script.json"},
          {"strategy", "open"},
          {"domain", "general"},
          {"output_path", out_dir + "/extraction.jsonl"}}},
    };
    return j.dump();
}

} // namespace

TEST_CASE("config parsing applies defaults and validates") {
    const PipelineConfig config = config_from_json_text(fixture_config_json("cfg"));
    CHECK(config.scoring.similarity_threshold == 0.95);
    CHECK(config.scoring.topic_count == 2);
    CHECK(config.workers == 2);
    CHECK(config.judge.temperature == 0.3);       // tuned default
    CHECK(config.judge.max_new_tokens == 800);    // tuned default
    CHECK(config.lda.train_if_missing);

    CHECK_THROWS_AS(config_from_json_text("{ bad"), FormatError);
    CHECK_THROWS_AS(config_from_json_text(R"({"corpus":"x","sample":{"n":5}})"),
                    ValidationError); // sampling without a seed
}

TEST_CASE("train-lda writes a loadable model and is seed-stable") {
    PipelineConfig config = config_from_json_text(fixture_config_json("train1"));
    const TrainSummary s1 = run_train_lda(config);
    CHECK(s1.corpus_size == 10);
    CHECK(s1.topic_count == 2);
    CHECK(std::filesystem::exists(s1.model_path));

    PipelineConfig config2 = config_from_json_text(fixture_config_json("train2"));
    const TrainSummary s2 = run_train_lda(config2);
    CHECK(read_file(s1.model_path) == read_file(s2.model_path)); // byte-identical
}

TEST_CASE("extract runs the mock backend and resumes") {
    PipelineConfig config = config_from_json_text(fixture_config_json("extract"));
    std::remove(config.extraction.output_path.c_str());

    const ExtractSummary s1 = run_extract(config);
    CHECK(s1.completed == 10);
    CHECK(s1.skipped == 0);
    CHECK(s1.failed == 0);

    const auto records = load_extractions(config.extraction.output_path);
    REQUIRE(records.size() == 10);
    for (const auto& record : records) {
        REQUIRE(record.triples.size() == 1);
        CHECK(record.triples.triples[0] == Triple{"x", "relates to", "y"});
        CHECK(record.model == "mock-scripted");
    }

    // Re-invocation completes only missing units (none).
    const ExtractSummary s2 = run_extract(config);
    CHECK(s2.completed == 0);
    CHECK(s2.skipped == 10);
}

TEST_CASE("closed extraction without entity pairs fails before any request") {
    PipelineConfig config = config_from_json_text(fixture_config_json("closed"));
    config.extraction.strategy = prompt::Strategy::closed;
    config.extraction.relation_types = {"relates to"};
    CHECK_THROWS_AS(run_extract(config), ValidationError);
}

TEST_CASE("scoring the fixture is deterministic and matches hand values") {
    PipelineConfig config = config_from_json_text(fixture_config_json("score1"));
    const ScoreOutcome outcome =
        run_score(config, kFixtures + "/extraction_10.jsonl");
    CHECK_FALSE(outcome.partial);

    const ScoreReport& report = outcome.report;
    REQUIRE(report.per_unit.size() == 10);

    // Judge-driven scores, straight from the scripted verdicts.
    CHECK(*report.per_unit.at("u01").fs == 1.0);
    CHECK(*report.per_unit.at("u02").fs == 0.5);
    CHECK(*report.per_unit.at("u05").fs == 0.5);
    CHECK(*report.per_unit.at("u02").gs ==
          doctest::Approx((1.0 + std::exp(-2.0)) / 2.0).epsilon(1e-12));
    CHECK(*report.per_unit.at("u04").gs == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(*report.per_unit.at("u07").gs ==
          doctest::Approx((2.0 + std::exp(-2.0)) / 3.0).epsilon(1e-12));

    // Embedding-driven scores.
    CHECK(*report.per_unit.at("u03").us == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(*report.per_unit.at("u09").us == 0.0);
    CHECK(*report.per_unit.at("u01").us == 1.0);
    CHECK(*report.per_unit.at("u01").cs == 1.0);
    CHECK(*report.per_unit.at("u04").cs == 0.0);
    CHECK(*report.per_unit.at("u09").cs == 0.5);

    // The failed unit: TS 0 by convention, judge/uniqueness absent, CS 0.
    const UnitScores& u10 = report.per_unit.at("u10");
    CHECK(*u10.ts == 0.0);
    CHECK_FALSE(u10.us.has_value());
    CHECK_FALSE(u10.fs.has_value());
    CHECK_FALSE(u10.gs.has_value());
    CHECK(*u10.cs == 0.0);
    CHECK(u10.triple_count == 0);

    // TS lands in (0, 1] everywhere else.
    for (const auto& [id, u] : report.per_unit) {
        if (id == "u10") continue;
        CHECK(*u.ts > 0.0);
        CHECK(*u.ts <= 1.0);
    }

    // Two runs produce byte-identical reports.
    PipelineConfig config2 = config_from_json_text(fixture_config_json("score2"));
    const ScoreOutcome outcome2 =
        run_score(config2, kFixtures + "/extraction_10.jsonl");
    CHECK(read_file(outcome.report_path) == read_file(outcome2.report_path));
}

TEST_CASE("metric selection restricts the report") {
    PipelineConfig config = config_from_json_text(fixture_config_json("select"));
    config.metrics = {"ts", "us"};
    const ScoreOutcome outcome =
        run_score(config, kFixtures + "/extraction_10.jsonl");
    for (const auto& [id, u] : outcome.report.per_unit) {
        CHECK(u.ts.has_value());
        CHECK_FALSE(u.fs.has_value());
        CHECK_FALSE(u.gs.has_value());
        CHECK_FALSE(u.cs.has_value());
    }
}

TEST_CASE("requesting cs on a gold-free corpus lists offending units") {
    const std::string gold_free = kTmp + "/gold_free.jsonl";
    {
        std::ofstream out(gold_free);
        out << R"({"id":"g1","text":"some text","gold":null,"level":"sentence"})" << "\n";
    }
    PipelineConfig config = config_from_json_text(fixture_config_json("csfail"));
    config.corpus_path = gold_free;
    config.metrics = {"cs"};
    try {
        run_score(config, kFixtures + "/extraction_10.jsonl");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("g1") != std::string::npos);
    }
}

TEST_CASE("scoring gold as the extraction yields CS = 1 everywhere") {
    PipelineConfig config = config_from_json_text(fixture_config_json("goldself"));
    config.metrics = {"us", "cs"};
    const ScoreOutcome outcome = run_score(config, "gold");
    for (const auto& [id, u] : outcome.report.per_unit) CHECK(*u.cs == 1.0);
    CHECK(*outcome.report.aggregate.cs == 1.0);
}

TEST_CASE("judge transport failure marks scores absent and the run partial") {
    PipelineConfig config = config_from_json_text(fixture_config_json("partial"));
    const std::string flaky_script = kTmp + "/flaky_judge.json";
    {
        // No keys and no default: every judge call raises TransportError.
        std::ofstream out(flaky_script);
        out << R"({"responses": {}})" << "\n";
    }
    config.judge.script_path = flaky_script;
    config.metrics = {"fs"};
    const ScoreOutcome outcome =
        run_score(config, kFixtures + "/extraction_10.jsonl");
    CHECK(outcome.partial);
    for (const auto& [id, u] : outcome.report.per_unit) CHECK_FALSE(u.fs.has_value());
}

TEST_CASE("FS/GS over the fixture match the checked-in golden byte-for-byte") {
    const std::string golden_path = kFixtures + "/golden_fsgs_report.json";
    if (!std::filesystem::exists(golden_path)) {
        MESSAGE("golden_fsgs_report.json not present; run tools/regen_goldens.sh");
        return;
    }
    PipelineConfig config = config_from_json_text(fixture_config_json("fsgs"));
    config.metrics = {"fs", "gs"};
    const ScoreOutcome outcome =
        run_score(config, kFixtures + "/extraction_10.jsonl");
    CHECK(read_file(outcome.report_path) == read_file(golden_path));
}
