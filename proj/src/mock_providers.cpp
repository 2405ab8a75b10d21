#include "mtb/mock_providers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mtb/error.hpp"
#include "mtb/prompts.hpp"
#include "mtb/text.hpp"

namespace mtb::mock {

namespace {

std::atomic<std::size_t> g_calls{0};

void count_call() { g_calls.fetch_add(1, std::memory_order_relaxed); }

std::string wrap_source(std::string_view s) { return "SOURCE |||" + std::string(s) + "|||"; }

// Word target from "approximately N words" in an initial prompt.
int word_target(std::string_view prompt) {
    constexpr std::string_view key = "approximately ";
    auto pos = prompt.find(key);
    if (pos == std::string_view::npos) return 5;
    pos += key.size();
    int n = 0;
    bool any = false;
    while (pos < prompt.size() && prompt[pos] >= '0' && prompt[pos] <= '9') {
        n = n * 10 + (prompt[pos] - '0');
        ++pos;
        any = true;
    }
    return any && n > 0 ? n : 5;
}

std::optional<std::string> source_in(std::string_view content) {
    try {
        auto s = prompts::parse_source(content);
        if (s == prompts::kSourcePlaceholder) return std::nullopt;
        return s;
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

}  // namespace

std::size_t total_calls() { return g_calls.load(); }
void reset_call_count() { g_calls.store(0); }

double marker_score(std::string_view source, std::string_view marker, double penalty) {
    const auto n = static_cast<double>(text::count_occurrences(source, marker));
    return std::max(0.0, 100.0 - penalty * n);
}

ScriptedGenerator::ScriptedGenerator(ProviderConfig config, std::vector<std::string> fixtures)
    : Generator(std::move(config)), fixtures_(std::move(fixtures)) {
    if (fixtures_.empty()) throw ConfigError("scripted generator '" + id() + "' needs at least one fixture");
}

std::vector<Conversation> ScriptedGenerator::transcript() const {
    std::lock_guard lock(mutex_);
    return transcript_;
}

std::string ScriptedGenerator::do_generate(const Conversation& conversation, std::string_view) {
    count_call();
    std::lock_guard lock(mutex_);
    transcript_.push_back(conversation);
    const auto& out = fixtures_[std::min(cursor_, fixtures_.size() - 1)];
    ++cursor_;
    return out;
}

AdversarialGenerator::AdversarialGenerator(ProviderConfig config, std::optional<std::string> fresh_text)
    : Generator(std::move(config)), fresh_text_(std::move(fresh_text)) {}

std::string AdversarialGenerator::do_generate(const Conversation& conversation, std::string_view) {
    count_call();
    const bool first_turn = std::none_of(conversation.begin(), conversation.end(),
                                         [](const ChatMessage& m) { return m.role == Role::assistant; });
    if (!first_turn || source_in(conversation.back().content)) {
        for (auto it = conversation.rbegin(); it != conversation.rend(); ++it) {
            if (auto prev = source_in(it->content)) return wrap_source(*prev + " @@");
        }
    }
    if (fresh_text_) return wrap_source(*fresh_text_);
    const int n = word_target(conversation.back().content);
    std::string words;
    for (int i = 1; i <= n; ++i) {
        if (i > 1) words += ' ';
        words += "w" + std::to_string(i);
    }
    return wrap_source(words);
}

std::string AnalystGenerator::do_generate(const Conversation& conversation, std::string_view) {
    count_call();
    const auto& prompt = conversation.back().content;
    const auto quoted = [&](std::size_t from) {
        auto gt = prompt.find("> ", from);
        if (gt == std::string::npos) return std::string();
        auto end = prompt.find('\n', gt);
        return prompt.substr(gt + 2, end == std::string::npos ? std::string::npos : end - gt - 2);
    };
    if (prompt.rfind("Analyze the following text", 0) == 0) {
        const auto source = quoted(prompt.rfind("The sentence to analyze is:"));
        const auto words = text::split_whitespace(source);
        const auto markers = static_cast<double>(text::count_occurrences(source, "@@"));
        double letters = 0;
        std::vector<std::string> topics;
        for (const auto& w : words) {
            auto bare = text::to_lower_ascii(text::strip_punct(w));
            letters += static_cast<double>(bare.size());
            if (bare.size() >= 4 && topics.size() < 3 &&
                std::find(topics.begin(), topics.end(), bare) == topics.end()) {
                topics.push_back(bare);
            }
        }
        if (topics.empty()) topics.emplace_back("general");
        const double n = std::max<double>(1.0, static_cast<double>(words.size()));
        Json j = {{"grammaticality", std::max(0.0, 100.0 - 10.0 * markers)},
                  {"naturalness", std::max(0.0, 100.0 - 20.0 * markers)},
                  {"word rarity", std::min(100.0, 10.0 * letters / n)},
                  {"syntax complexity", std::min(100.0, 2.0 * static_cast<double>(words.size()))},
                  {"topics", topics}};
        return j.dump();
    }
    if (prompt.rfind("Analyze the following translation", 0) == 0) {
        const auto src_at = prompt.rfind("The sentence to analyze is:");
        const auto source = quoted(src_at);
        const auto translation = quoted(prompt.rfind("The translation is:"));
        std::vector<std::string> modes;
        if (text::word_count(translation) < text::word_count(source)) modes.emplace_back("omissions");
        if (text::count_occurrences(source, "@@") > 0) modes.emplace_back("formatting");
        return Json{{"error_modes", modes}}.dump();
    }
    return "I can only analyze texts.";
}

MockTranslator::MockTranslator(ProviderConfig config, std::string drop_marker)
    : Translator(std::move(config)), marker_(std::move(drop_marker)) {}

std::string MockTranslator::do_translate(std::string_view source, const LanguagePair&) {
    count_call();
    std::string out;
    for (const auto& tok : text::split_whitespace(source)) {
        if (!marker_.empty() && tok.find(marker_) != std::string::npos) continue;
        if (!out.empty()) out += ' ';
        out += text::to_upper_ascii(tok);
    }
    return out;
}

MarkerOracleScorer::MarkerOracleScorer(ProviderConfig config, std::string marker, double penalty)
    : QualityScorer(std::move(config)), marker_(std::move(marker)), penalty_(penalty) {}

double MarkerOracleScorer::do_score(std::string_view source, std::string_view, const LanguagePair&) {
    count_call();
    return marker_score(source, marker_, penalty_);
}

double OverlapOracleScorer::do_score(std::string_view source, std::string_view translation,
                                     const LanguagePair&) {
    count_call();
    std::set<std::string> src;
    std::set<std::string> tgt;
    for (const auto& w : text::split_whitespace(source)) src.insert(text::to_lower_ascii(w));
    for (const auto& w : text::split_whitespace(translation)) tgt.insert(text::to_lower_ascii(w));
    if (src.empty()) return 100.0;
    std::size_t shared = 0;
    for (const auto& w : src) shared += tgt.count(w);
    return 100.0 * static_cast<double>(shared) / static_cast<double>(src.size());
}

TableScorer::TableScorer(ProviderConfig config, std::map<std::string, double> table, double fallback)
    : QualityScorer(std::move(config)), table_(std::move(table)), fallback_(fallback) {}

double TableScorer::do_score(std::string_view source, std::string_view, const LanguagePair&) {
    count_call();
    auto it = table_.find(std::string(source));
    return it == table_.end() ? fallback_ : it->second;
}

MarkerSourceScorer::MarkerSourceScorer(ProviderConfig config, std::string marker, double penalty)
    : SourceScorer(std::move(config)), marker_(std::move(marker)), penalty_(penalty) {}

double MarkerSourceScorer::do_score(std::string_view source, const LanguagePair&) {
    count_call();
    return marker_score(source, marker_, penalty_);
}

std::vector<double> LetterHistogramEmbedder::do_embed(std::string_view input) {
    count_call();
    std::vector<double> v(26, 0.0);
    for (char c : input) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c >= 'a' && c <= 'z') v[static_cast<std::size_t>(c - 'a')] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0) {
        for (double& x : v) x /= norm;
    }
    return v;
}

}  // namespace mtb::mock
