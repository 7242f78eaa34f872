#include "genres/data.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_set>

#include <json.hpp>

namespace genres::data {

using nlohmann::json;

namespace {

FormatError line_error(int line, const std::string& message) {
    return FormatError(message + " at line " + std::to_string(line));
}

TripleList parse_gold(const json& arr, int line) {
    TripleList gold;
    gold.origin = Origin::gold;
    for (const json& item : arr) {
        if (!item.is_array() || item.size() != 3)
            throw line_error(line, "gold entry is not a [s, r, o] array");
        Triple t;
        t.subject = trim(item[0].get<std::string>());
        t.relation = trim(item[1].get<std::string>());
        t.object = trim(item[2].get<std::string>());
        if (t.subject.empty() || t.relation.empty() || t.object.empty())
            throw line_error(line, "gold triple has an empty field");
        gold.triples.push_back(std::move(t));
    }
    return gold;
}

} // namespace

CorpusManifest load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file: " + path);

    CorpusManifest corpus;
    corpus.name = path;

    std::unordered_set<std::string> seen_ids;
    std::string line;
    int line_number = 0;
    bool level_set = false;

    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;

        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) throw line_error(line_number, "malformed JSON");
        if (!j.is_object()) throw line_error(line_number, "unit is not a JSON object");

        for (const char* field : {"id", "text", "level"}) {
            if (!j.contains(field))
                throw line_error(line_number, std::string("missing field \"") + field + "\"");
        }

        EvaluationUnit unit;
        try {
            unit.id = j.at("id").get<std::string>();
            unit.text = j.at("text").get<std::string>();
            unit.level = unit_level_from_string(j.at("level").get<std::string>());

            if (unit.id.empty()) throw line_error(line_number, "empty id");
            if (trim(unit.text).empty()) throw line_error(line_number, "empty text");
            if (!seen_ids.insert(unit.id).second)
                throw line_error(line_number, "duplicate id");

            if (j.contains("gold") && !j.at("gold").is_null()) {
                TripleList gold = parse_gold(j.at("gold"), line_number);
                if (!gold.empty()) unit.gold = std::move(gold);
            }

            if (j.contains("entity_pairs")) {
                for (const json& pair : j.at("entity_pairs")) {
                    if (!pair.is_array() || pair.size() != 2)
                        throw line_error(line_number, "entity pair is not a [head, tail] array");
                    unit.entity_pairs.emplace_back(pair[0].get<std::string>(),
                                                   pair[1].get<std::string>());
                }
            }
        } catch (const json::exception& e) {
            throw line_error(line_number, std::string("bad field type: ") + e.what());
        }

        if (!level_set) {
            corpus.level = unit.level;
            level_set = true;
        } else if (unit.level != corpus.level) {
            throw line_error(line_number, "level differs from the rest of the corpus");
        }

        corpus.units.push_back(std::move(unit));
    }

    return corpus;
}

void save_corpus(const CorpusManifest& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open corpus file for writing: " + path);

    for (const EvaluationUnit& unit : corpus.units) {
        json j;
        j["id"] = unit.id;
        j["text"] = unit.text;
        j["level"] = to_string(unit.level);
        if (unit.gold) {
            json gold = json::array();
            for (const Triple& t : unit.gold->triples)
                gold.push_back(json::array({t.subject, t.relation, t.object}));
            j["gold"] = std::move(gold);
        } else {
            j["gold"] = nullptr;
        }
        if (!unit.entity_pairs.empty()) {
            json pairs = json::array();
            for (const auto& [head, tail] : unit.entity_pairs)
                pairs.push_back(json::array({head, tail}));
            j["entity_pairs"] = std::move(pairs);
        }
        out << j.dump() << "\n";
    }
}

CorpusManifest sample(const CorpusManifest& corpus, std::size_t n, std::uint64_t seed) {
    if (n > corpus.units.size())
        throw ValidationError("sample: requested " + std::to_string(n) + " units from " +
                              std::to_string(corpus.units.size()));

    std::vector<std::size_t> indices(corpus.units.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + bounded_rand(rng, indices.size() - i);
        std::swap(indices[i], indices[j]);
    }
    indices.resize(n);
    std::sort(indices.begin(), indices.end());

    CorpusManifest out;
    out.name = corpus.name;
    out.level = corpus.level;
    out.source_note = corpus.source_note;
    out.units.reserve(n);
    for (const std::size_t i : indices) out.units.push_back(corpus.units[i]);
    return out;
}

CorpusManifest filter_min_gold(const CorpusManifest& corpus, std::size_t min_triples) {
    CorpusManifest out;
    out.name = corpus.name;
    out.level = corpus.level;
    out.source_note = corpus.source_note;
    for (const EvaluationUnit& unit : corpus.units) {
        const std::size_t gold_size = unit.gold ? unit.gold->size() : 0;
        if (gold_size >= min_triples) out.units.push_back(unit);
    }
    if (out.units.empty() && !corpus.units.empty())
        out.warnings.push_back("filter_min_gold(min=" + std::to_string(min_triples) +
                               ") removed every unit");
    return out;
}

} // namespace genres::data
