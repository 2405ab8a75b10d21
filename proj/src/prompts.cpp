#include "mtb/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "mtb/error.hpp"
#include "mtb/prompt_resources.hpp"
#include "mtb/text.hpp"

namespace mtb::prompts {

namespace {

std::string_view resource(std::string_view raw) {
    if (!raw.empty() && raw.back() == '\n') raw.remove_suffix(1);
    return raw;
}

bool is_placeholder_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'; }

void require(std::string_view value, const char* what) {
    if (text::trim(value).empty()) throw PreconditionError(std::string(what) + " must be non-empty");
}

// Finds every `<tag>|||...|||` span (optional whitespace between tag and the
// bars) and returns the content of the last one.
std::optional<std::string> last_span(std::string_view response, std::string_view tag) {
    std::optional<std::string> last;
    std::size_t pos = 0;
    while (true) {
        auto t = response.find(tag, pos);
        if (t == std::string_view::npos) break;
        auto open = t + tag.size();
        while (open < response.size() && (response[open] == ' ' || response[open] == '\t')) ++open;
        if (response.substr(open, 3) != "|||") {
            pos = t + tag.size();
            continue;
        }
        const auto content_begin = open + 3;
        const auto close = response.find("|||", content_begin);
        if (close == std::string_view::npos) break;
        last = std::string(response.substr(content_begin, close - content_begin));
        pos = close + 3;
    }
    return last;
}

// Extracts the outermost {...} block and removes trailing commas before a
// closing bracket, outside string literals.
std::string json_candidate(std::string_view response) {
    const auto b = response.find('{');
    const auto e = response.rfind('}');
    if (b == std::string_view::npos || e == std::string_view::npos || e < b) {
        throw ParseError("no JSON object in response");
    }
    const auto body = response.substr(b, e - b + 1);
    std::string out;
    out.reserve(body.size());
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (in_string) {
            out.push_back(c);
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == ',') {
            auto j = i + 1;
            while (j < body.size() && std::isspace(static_cast<unsigned char>(body[j]))) ++j;
            if (j < body.size() && (body[j] == '}' || body[j] == ']')) continue;
        }
        out.push_back(c);
    }
    return out;
}

Json parse_json_object(std::string_view response) {
    Json j = Json::parse(json_candidate(response), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("response is not a JSON object");
    return j;
}

double required_score(const Json& j, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        auto it = j.find(k);
        if (it == j.end()) continue;
        if (!it->is_number()) throw ParseError(std::string("'") + k + "' is not a number");
        const double v = it->get<double>();
        if (!(v >= 0.0 && v <= 100.0)) throw ParseError(std::string("'") + k + "' out of [0,100]");
        return v;
    }
    throw ParseError(std::string("missing key '") + *keys.begin() + "'");
}

}  // namespace

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() + 64);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            std::size_t j = i + 1;
            while (j < tmpl.size() && is_placeholder_char(tmpl[j])) ++j;
            if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
                const std::string name(tmpl.substr(i + 1, j - i - 1));
                auto it = values.find(name);
                if (it == values.end()) throw PreconditionError("template placeholder {" + name + "} has no value");
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(tmpl[i]);
        ++i;
    }
    return out;
}

std::string render_initial(const LanguagePair& pair, int seed_length) {
    if (seed_length < 1) throw PreconditionError("seed_length must be >= 1");
    return fill(resource(resources::initial), {{"LANG1", pair.source_lang},
                                               {"LANG2", pair.target_lang},
                                               {"SEED_LENGTH", std::to_string(seed_length)}});
}

std::string render_followup(const std::vector<std::pair<std::string, std::string>>& translations,
                            std::optional<double> qe_score, bool include_qe) {
    if (translations.empty()) throw PreconditionError("render_followup: no translations");
    if (include_qe && !qe_score) throw PreconditionError("render_followup: include_qe without a score");
    std::string block;
    if (translations.size() == 1) {
        block = "TRANSLATION |||" + translations.front().second + "|||";
    } else {
        for (std::size_t i = 0; i < translations.size(); ++i) {
            if (i > 0) block += "\n";
            block += "TRANSLATION (" + translations[i].first + ") |||" + translations[i].second + "|||";
        }
    }
    if (include_qe) {
        return fill(resource(resources::followup_qe),
                    {{"TRANSLATIONS", block}, {"QE_SCORE", text::fixed(*qe_score, 1)}});
    }
    return fill(resource(resources::followup), {{"TRANSLATIONS", block}});
}

std::string render_llm_qe(std::string_view source, std::string_view translation) {
    require(source, "render_llm_qe: source");
    require(translation, "render_llm_qe: translation");
    return fill(resource(resources::llm_qe),
                {{"SOURCE_TEXT", std::string(source)}, {"TARGET_TEXT", std::string(translation)}});
}

std::string render_source_analysis(std::string_view source) {
    require(source, "render_source_analysis: source");
    return fill(resource(resources::source_analysis), {{"SOURCE_TEXT", std::string(source)}});
}

std::string render_target_analysis(std::string_view source, std::string_view translation) {
    require(source, "render_target_analysis: source");
    require(translation, "render_target_analysis: translation");
    return fill(resource(resources::target_analysis),
                {{"SOURCE_TEXT", std::string(source)}, {"TARGET_TEXT", std::string(translation)}});
}

std::string render_translate(std::string_view source, const LanguagePair& pair) {
    require(source, "render_translate: source");
    return fill(resource(resources::translate), {{"LANG1", pair.source_lang},
                                                 {"LANG2", pair.target_lang},
                                                 {"SOURCE_TEXT", std::string(source)}});
}

std::string source_reminder() {
    return "Your response did not contain the text in the required format. "
           "At the end of your response write SOURCE |||<SOURCE_TEXT>|||.";
}

std::string score_reminder() {
    return "Your response did not contain the score in the required format. "
           "End your response with a single line SCORE |||<number>|||.";
}

std::string length_reminder(int seed_length) {
    return "The text is far too long. Keep it to approximately " + std::to_string(seed_length) +
           " words. At the end of your response write SOURCE |||<SOURCE_TEXT>|||.";
}

std::string parse_source(std::string_view response) {
    auto span = last_span(response, "SOURCE");
    if (!span) throw ParseError("no SOURCE |||...||| span in response");
    auto out = text::trim(*span);
    if (out.empty()) throw ParseError("SOURCE span is empty");
    return out;
}

double parse_score(std::string_view response) {
    auto span = last_span(response, "SCORE");
    if (!span) throw ParseError("no SCORE |||...||| span in response");
    auto body = text::trim(*span);
    if (!body.empty() && body.back() == '%') body = text::trim(std::string_view(body).substr(0, body.size() - 1));
    double v = 0.0;
    const auto* first = body.data();
    const auto* last = body.data() + body.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (body.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ParseError("SCORE span is not a number: '" + body + "'");
    }
    return std::clamp(v, 0.0, 100.0);
}

SourceAnalysis parse_source_analysis(std::string_view response) {
    const Json j = parse_json_object(response);
    SourceAnalysis a;
    a.grammaticality = required_score(j, {"grammaticality"});
    a.naturalness = required_score(j, {"naturalness"});
    a.word_rarity = required_score(j, {"word rarity", "word_rarity"});
    a.syntax_complexity = required_score(j, {"syntax complexity", "syntax_complexity"});
    auto it = j.find("topics");
    if (it == j.end()) throw ParseError("missing key 'topics'");
    if (!it->is_array()) throw ParseError("'topics' is not a list");
    for (const auto& t : *it) {
        if (!t.is_string()) throw ParseError("topic is not a string");
        auto topic = text::trim(t.get<std::string>());
        if (topic.empty()) throw ParseError("empty topic");
        a.topics.push_back(std::move(topic));
    }
    if (a.topics.empty() || a.topics.size() > 5) {
        throw ParseError("expected 1 to 5 topics, found " + std::to_string(a.topics.size()));
    }
    return a;
}

ErrorModeReport parse_target_analysis(std::string_view response) {
    const Json j = parse_json_object(response);
    auto it = j.find("error_modes");
    if (it == j.end()) throw ParseError("missing key 'error_modes'");
    if (!it->is_array()) throw ParseError("'error_modes' is not a list");
    ErrorModeReport report;
    std::set<std::string> seen;
    for (const auto& m : *it) {
        if (!m.is_string()) throw ParseError("error mode is not a string");
        auto mode = text::to_lower_ascii(text::trim(m.get<std::string>()));
        if (mode.empty()) continue;
        if (seen.insert(mode).second) report.error_modes.push_back(std::move(mode));
    }
    return report;
}

}  // namespace mtb::prompts
