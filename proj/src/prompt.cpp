#include "genres/prompt.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef GENRES_DEFAULT_RESOURCE_DIR
#define GENRES_DEFAULT_RESOURCE_DIR "resources"
#endif

namespace genres::prompt {

namespace {

constexpr const char* kTemplateVersion = "v1";

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string render_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::string out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) out += ", ";
        out += "(" + pairs[i].first + ", " + pairs[i].second + ")";
    }
    return out;
}

std::string triple_json(const Triple& t) {
    // Matches the double-quoted bracket form the parser consumes.
    return "[\"" + t.subject + "\", \"" + t.relation + "\", \"" + t.object + "\"]";
}

} // namespace

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::closed: return "closed";
        case Strategy::semi_open: return "semi_open";
        case Strategy::open: return "open";
    }
    throw ValidationError("unknown strategy");
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "closed") return Strategy::closed;
    if (s == "semi_open" || s == "semi-open") return Strategy::semi_open;
    if (s == "open") return Strategy::open;
    throw ValidationError("unknown GRE strategy: " + std::string(s));
}

std::string to_string(Domain d) {
    return d == Domain::general ? "general" : "biomedical";
}

Domain domain_from_string(std::string_view s) {
    if (s == "general") return Domain::general;
    if (s == "biomedical") return Domain::biomedical;
    throw ValidationError("unknown prompt domain: " + std::string(s));
}

std::string default_resource_dir() {
    if (const char* env = std::getenv("GENRES_RESOURCES"); env && *env) return env;
    return GENRES_DEFAULT_RESOURCE_DIR;
}

std::string template_version() {
    return kTemplateVersion;
}

std::string load_template(const std::string& resource_dir, const std::string& name) {
    const std::string path =
        resource_dir + "/prompts/" + kTemplateVersion + "/" + name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open prompt template: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string substitute(const std::string& tmpl,
                       const std::vector<std::pair<std::string, std::string>>& values) {
    // Single left-to-right scan; substituted values are inserted verbatim
    // and never rescanned, so braces inside source texts are harmless.
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const std::size_t open = tmpl.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, tmpl.size() - pos);
            break;
        }
        const std::size_t close = tmpl.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(tmpl, pos, tmpl.size() - pos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        const std::string key = tmpl.substr(open + 2, close - open - 2);
        const auto it = std::find_if(values.begin(), values.end(),
                                     [&](const auto& kv) { return kv.first == key; });
        if (it == values.end())
            throw FormatError("unresolved placeholder in template: {{" + key + "}}");
        out += it->second;
        pos = close + 2;
    }
    return out;
}

GrePrompt render_prompt(Strategy strategy, const GreInputs& inputs, Domain domain,
                        const std::string& resource_dir) {
    if (trim(inputs.source_text).empty())
        throw ValidationError("source_text required for GRE prompting");
    if (strategy == Strategy::closed) {
        if (inputs.entity_pairs.empty())
            throw ValidationError("entity_pairs required for closed GRE");
        if (inputs.relation_types.empty())
            throw ValidationError("relation_types required for closed GRE");
    }
    if (strategy == Strategy::semi_open) {
        if (inputs.relation_types.empty())
            throw ValidationError("relation_types required for semi_open GRE");
        if (inputs.entity_types.empty())
            throw ValidationError("entity_types required for semi_open GRE");
    }

    const std::string demos =
        inputs.demonstrations
            ? *inputs.demonstrations
            : load_template(resource_dir, "demos_" + to_string(domain) + ".txt");

    std::string name;
    switch (strategy) {
        case Strategy::closed: name = "gre_closed.txt"; break;
        case Strategy::semi_open: name = "gre_semi_open.txt"; break;
        case Strategy::open: name = "gre_open.txt"; break;
    }
    const std::string tmpl = load_template(resource_dir, name);

    GrePrompt out;
    out.strategy = strategy;
    out.rendered = substitute(tmpl, {
                                        {"demonstrations", demos},
                                        {"source_text", inputs.source_text},
                                        {"relation_types", join(inputs.relation_types, ", ")},
                                        {"entity_types", join(inputs.entity_types, ", ")},
                                        {"entity_pairs", render_pairs(inputs.entity_pairs)},
                                    });
    return out;
}

std::string render_factualness_prompt(const std::string& source_text, const Triple& t,
                                      const std::string& resource_dir) {
    if (trim(source_text).empty())
        throw ValidationError("source text required for factualness check");
    const std::string tmpl = load_template(resource_dir, "factualness.txt");
    return substitute(tmpl, {{"source_text", source_text}, {"triple", triple_json(t)}});
}

std::string render_granularity_prompt(const Triple& t, const std::string& resource_dir) {
    const std::string tmpl = load_template(resource_dir, "granularity.txt");
    return substitute(tmpl, {{"triple", triple_json(t)}});
}

} // namespace genres::prompt
