#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mtb/providers.hpp"

// Deterministic offline providers. Together they give closed-form behaviour
// for the breaking loop: the adversarial generator appends one "@@" per turn,
// the marker oracle takes 20 points per "@@", so scores run 100, 80, 60, ...
namespace mtb::mock {

// Total number of calls served by any mock in this process.
std::size_t total_calls();
void reset_call_count();

// Returns fixtures in order, then keeps repeating the last one. Records
// every conversation it was asked to continue.
class ScriptedGenerator final : public Generator {
public:
    ScriptedGenerator(ProviderConfig config, std::vector<std::string> fixtures);
    std::vector<Conversation> transcript() const;

protected:
    std::string do_generate(const Conversation& conversation, std::string_view nonce) override;

private:
    std::vector<std::string> fixtures_;
    mutable std::mutex mutex_;
    std::size_t cursor_ = 0;
    std::vector<Conversation> transcript_;
};

// First turn (no assistant message yet): emits `SOURCE |||<text>|||` where
// text is the configured fresh text or, failing that, "w1 w2 ... wN" with N
// taken from the prompt's word target. Follow-up turns: re-emits the most
// recent source found in the conversation with " @@" appended.
class AdversarialGenerator final : public Generator {
public:
    AdversarialGenerator(ProviderConfig config, std::optional<std::string> fresh_text = {});

protected:
    std::string do_generate(const Conversation& conversation, std::string_view nonce) override;

private:
    std::optional<std::string> fresh_text_;
};

// Answers the source- and target-analysis prompts with JSON derived from
// simple surface statistics of the text.
class AnalystGenerator final : public Generator {
public:
    using Generator::Generator;

protected:
    std::string do_generate(const Conversation& conversation, std::string_view nonce) override;
};

// Uppercases each whitespace token and drops tokens containing the marker.
class MockTranslator final : public Translator {
public:
    MockTranslator(ProviderConfig config, std::string drop_marker = "@@");

protected:
    std::string do_translate(std::string_view source, const LanguagePair& pair) override;

private:
    std::string marker_;
};

// 100 - penalty * (occurrences of marker in the source), floored at 0.
class MarkerOracleScorer final : public QualityScorer {
public:
    MarkerOracleScorer(ProviderConfig config, std::string marker = "@@", double penalty = 20.0);

protected:
    double do_score(std::string_view source, std::string_view translation, const LanguagePair& pair) override;

private:
    std::string marker_;
    double penalty_;
};

// 100 * |shared case-folded word set| / |source word set|.
class OverlapOracleScorer final : public QualityScorer {
public:
    using QualityScorer::QualityScorer;

protected:
    double do_score(std::string_view source, std::string_view translation, const LanguagePair& pair) override;
};

// Looks the source up in a fixed table; unknown sources get the default.
class TableScorer final : public QualityScorer {
public:
    TableScorer(ProviderConfig config, std::map<std::string, double> table, double fallback = 100.0);

protected:
    double do_score(std::string_view source, std::string_view translation, const LanguagePair& pair) override;

private:
    std::map<std::string, double> table_;
    double fallback_;
};

// Marker oracle on the source alone.
class MarkerSourceScorer final : public SourceScorer {
public:
    MarkerSourceScorer(ProviderConfig config, std::string marker = "@@", double penalty = 20.0);

protected:
    double do_score(std::string_view source, const LanguagePair& pair) override;

private:
    std::string marker_;
    double penalty_;
};

// L2-normalized 26-bin letter histogram of the case-folded text.
class LetterHistogramEmbedder final : public Embedder {
public:
    using Embedder::Embedder;

protected:
    std::vector<double> do_embed(std::string_view text) override;
};

double marker_score(std::string_view source, std::string_view marker, double penalty);

}  // namespace mtb::mock
