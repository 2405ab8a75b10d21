#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtb/core.hpp"

namespace mtb::prompts {

// Literal placeholder the initial prompt shows in place of a source text.
inline constexpr std::string_view kSourcePlaceholder = "<SOURCE_TEXT>";

// Substitutes {NAME} markers in a single pass; inserted values are never
// re-scanned. Throws PreconditionError if the template references a name
// that has no value.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values);

std::string render_initial(const LanguagePair& pair, int seed_length);

// translations: (translator id, text) in configuration order. A single entry
// renders "TRANSLATION |||x|||"; several render "TRANSLATION (<id>) |||x|||".
std::string render_followup(const std::vector<std::pair<std::string, std::string>>& translations,
                            std::optional<double> qe_score, bool include_qe);

std::string render_llm_qe(std::string_view source, std::string_view translation);
std::string render_source_analysis(std::string_view source);
std::string render_target_analysis(std::string_view source, std::string_view translation);
std::string render_translate(std::string_view source, const LanguagePair& pair);

// Appended as a new user turn when a reply lacks the SOURCE marker.
std::string source_reminder();
// Appended when a reply lacks the SCORE marker.
std::string score_reminder();
// Appended when a source overshoots the length budget.
std::string length_reminder(int seed_length);

// Content of the last `SOURCE |||...|||` span, trimmed. Throws ParseError.
std::string parse_source(std::string_view response);
// Last `SCORE |||<number>|||`, clamped into [0,100]. Throws ParseError.
double parse_score(std::string_view response);

// Lenient about code fences, surrounding prose and trailing commas; strict
// about the schema. Throws ParseError.
SourceAnalysis parse_source_analysis(std::string_view response);
ErrorModeReport parse_target_analysis(std::string_view response);

}  // namespace mtb::prompts
