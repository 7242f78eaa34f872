#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genres/core.hpp"

namespace genres::prompt {

enum class Strategy { closed, semi_open, open };
enum class Domain { general, biomedical };

std::string to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);
std::string to_string(Domain d);
Domain domain_from_string(std::string_view s);

/// Inputs for one rendered GRE prompt. Which fields are required depends
/// on the strategy: closed needs entity_pairs and relation_types,
/// semi-open needs relation_types and entity_types, open needs only the
/// source text. `demonstrations` overrides the domain's built-in
/// in-context examples when set.
struct GreInputs {
    std::string source_text;
    std::vector<std::string> relation_types;
    std::vector<std::string> entity_types;
    std::vector<std::pair<std::string, std::string>> entity_pairs;
    std::optional<std::string> demonstrations;
};

struct GrePrompt {
    Strategy strategy = Strategy::open;
    std::string rendered;
};

/// Directory holding the versioned prompt templates and the stopword
/// list. Resolution order: explicit argument elsewhere in the API, the
/// GENRES_RESOURCES environment variable, then the compiled-in default.
std::string default_resource_dir();

/// Version tag of the shipped templates (the subdirectory name under
/// resources/prompts). Recorded in report metadata.
std::string template_version();

/// Deterministic text assembly: instruction block (with the output
/// stability directive), domain demonstrations, then the source text.
/// Byte-identical output for identical inputs.
/// Throws ValidationError naming the first missing required field.
GrePrompt render_prompt(Strategy strategy, const GreInputs& inputs, Domain domain,
                        const std::string& resource_dir = default_resource_dir());

/// Factualness-verification prompt: three calibration examples, then the
/// source text and the candidate triple. The judge answers true/false.
std::string render_factualness_prompt(const std::string& source_text, const Triple& t,
                                      const std::string& resource_dir = default_resource_dir());

/// Granularity-checking prompt: nine examples teaching split counting.
std::string render_granularity_prompt(const Triple& t,
                                      const std::string& resource_dir = default_resource_dir());

/// `{{placeholder}}` substitution used by every template. Unknown
/// placeholders left in the template raise FormatError.
std::string substitute(const std::string& tmpl,
                       const std::vector<std::pair<std::string, std::string>>& values);

/// Load one template file from <resource_dir>/prompts/<version>/<name>.
std::string load_template(const std::string& resource_dir, const std::string& name);

} // namespace genres::prompt
