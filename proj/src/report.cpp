#include "genres/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace genres {

using nlohmann::json;

namespace {

struct MeanAccum {
    double sum = 0.0;
    int count = 0;

    void add(const std::optional<double>& v) {
        if (v) {
            sum += *v;
            ++count;
        }
    }
    std::optional<double> mean() const {
        if (count == 0) return std::nullopt;
        return sum / count;
    }
};

void check_range(const std::optional<double>& v, const char* name) {
    if (v && !(*v >= 0.0 && *v <= 1.0))
        throw ValidationError(std::string("score ") + name + " outside [0, 1]");
}

} // namespace

AggregateScores aggregate_scores(const std::map<std::string, UnitScores>& per_unit) {
    if (per_unit.empty()) throw ValidationError("empty corpus");

    MeanAccum ts, us, fs, gs, cs, tri, tok;
    for (const auto& [id, u] : per_unit) {
        check_range(u.ts, "ts");
        check_range(u.us, "us");
        check_range(u.fs, "fs");
        check_range(u.gs, "gs");
        check_range(u.cs, "cs");
        ts.add(u.ts);
        us.add(u.us);
        fs.add(u.fs);
        gs.add(u.gs);
        cs.add(u.cs);
        tri.add(static_cast<double>(u.triple_count));
        tok.add(u.mean_tokens_per_triple);
    }

    AggregateScores agg;
    agg.ts = ts.mean();
    agg.us = us.mean();
    agg.fs = fs.mean();
    agg.gs = gs.mean();
    agg.cs = cs.mean();
    agg.triple_count = *tri.mean();
    agg.mean_tokens_per_triple = *tok.mean();
    return agg;
}

ScoreReport aggregate_report(const std::map<std::string, UnitScores>& per_unit,
                             std::map<std::string, std::string> metadata) {
    ScoreReport report;
    report.per_unit = per_unit;
    report.aggregate = aggregate_scores(per_unit);
    report.metadata = std::move(metadata);
    return report;
}

namespace {

void put_pct(json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v * 100.0;
}

std::optional<double> get_pct(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return j.at(key).get<double>() / 100.0;
}

} // namespace

std::string report_to_json(const ScoreReport& report) {
    json j;
    json units = json::object();
    for (const auto& [id, u] : report.per_unit) {
        json ju;
        put_pct(ju, "ts", u.ts);
        put_pct(ju, "us", u.us);
        put_pct(ju, "fs", u.fs);
        put_pct(ju, "gs", u.gs);
        put_pct(ju, "cs", u.cs);
        ju["triple_count"] = u.triple_count;
        ju["mean_tokens_per_triple"] = u.mean_tokens_per_triple;
        if (!u.warnings.empty()) ju["warnings"] = u.warnings;
        units[id] = std::move(ju);
    }
    j["per_unit"] = std::move(units);

    json agg;
    put_pct(agg, "ts", report.aggregate.ts);
    put_pct(agg, "us", report.aggregate.us);
    put_pct(agg, "fs", report.aggregate.fs);
    put_pct(agg, "gs", report.aggregate.gs);
    put_pct(agg, "cs", report.aggregate.cs);
    agg["triple_count"] = report.aggregate.triple_count;
    agg["mean_tokens_per_triple"] = report.aggregate.mean_tokens_per_triple;
    j["aggregate"] = std::move(agg);

    j["metadata"] = report.metadata;
    return j.dump(2) + "\n";
}

ScoreReport report_from_json(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw FormatError("report: malformed JSON");
    if (!j.contains("per_unit") || !j.contains("aggregate"))
        throw FormatError("report: missing per_unit or aggregate");

    ScoreReport report;
    for (const auto& [id, ju] : j.at("per_unit").items()) {
        UnitScores u;
        u.ts = get_pct(ju, "ts");
        u.us = get_pct(ju, "us");
        u.fs = get_pct(ju, "fs");
        u.gs = get_pct(ju, "gs");
        u.cs = get_pct(ju, "cs");
        u.triple_count = ju.value("triple_count", 0);
        u.mean_tokens_per_triple = ju.value("mean_tokens_per_triple", 0.0);
        if (ju.contains("warnings"))
            u.warnings = ju.at("warnings").get<std::vector<std::string>>();
        report.per_unit[id] = std::move(u);
    }

    const json& agg = j.at("aggregate");
    report.aggregate.ts = get_pct(agg, "ts");
    report.aggregate.us = get_pct(agg, "us");
    report.aggregate.fs = get_pct(agg, "fs");
    report.aggregate.gs = get_pct(agg, "gs");
    report.aggregate.cs = get_pct(agg, "cs");
    report.aggregate.triple_count = agg.value("triple_count", 0.0);
    report.aggregate.mean_tokens_per_triple = agg.value("mean_tokens_per_triple", 0.0);

    if (j.contains("metadata")) {
        for (const auto& [k, v] : j.at("metadata").items())
            report.metadata[k] = v.get<std::string>();
    }
    return report;
}

void save_report(const ScoreReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open report file for writing: " + path);
    out << report_to_json(report);
}

ScoreReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open report file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

namespace {

std::string fmt_pct(const std::optional<double>& v) {
    if (!v) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << (*v * 100.0);
    return os.str();
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << v;
    return os.str();
}

void put_row(std::ostringstream& os, const std::string& id, const std::string& tri,
             const std::string& tok, const std::string& ts, const std::string& us,
             const std::string& fs, const std::string& gs, const std::string& cs) {
    os << std::left << std::setw(20) << id << std::right << std::setw(8) << tri
       << std::setw(8) << tok << std::setw(8) << ts << std::setw(8) << us << std::setw(8)
       << fs << std::setw(8) << gs << std::setw(8) << cs << "\n";
}

} // namespace

std::string render_report_table(const ScoreReport& report) {
    std::ostringstream os;
    put_row(os, "unit", "#tri", "#tok", "TS", "US", "FS", "GS", "CS");
    os << std::string(76, '-') << "\n";
    for (const auto& [id, u] : report.per_unit) {
        put_row(os, id, fmt_num(u.triple_count), fmt_num(u.mean_tokens_per_triple),
                fmt_pct(u.ts), fmt_pct(u.us), fmt_pct(u.fs), fmt_pct(u.gs), fmt_pct(u.cs));
    }
    os << std::string(76, '-') << "\n";
    const auto& a = report.aggregate;
    put_row(os, "aggregate", fmt_num(a.triple_count), fmt_num(a.mean_tokens_per_triple),
            fmt_pct(a.ts), fmt_pct(a.us), fmt_pct(a.fs), fmt_pct(a.gs), fmt_pct(a.cs));
    return os.str();
}

} // namespace genres
