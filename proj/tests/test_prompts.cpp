#include <gtest/gtest.h>

#include <random>

#include "mtb/error.hpp"
#include "mtb/prompts.hpp"
#include "mtb/text.hpp"
#include "support.hpp"

using namespace mtb;

namespace {

std::string golden(const std::string& name) {
    auto s = fixture::slurp(fixture::source_dir() / "tests" / "golden" / name);
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

const std::string kSrc = "The cat sat on the mat.";
const std::string kTgt = "Kočka seděla na rohožce.";

// Payloads that cannot be mistaken for a closing delimiter: no "|||" and no
// trailing '|'. Mixes ASCII, single bars, multi-byte letters and newlines.
std::string random_payload(std::mt19937_64& rng) {
    static const std::vector<std::string> atoms = {"a", "Z", "7", " ", "\n", "|", "||", ".", "\"", "{", "}", "é",
                                                   "ř", "字", "🙂", "SOURCE", "SCORE", "@@", "\\", "\t", "%"};
    std::uniform_int_distribution<std::size_t> len(1, 30), pick(0, atoms.size() - 1);
    std::string s;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        s += atoms[pick(rng)];
        while (s.find("|||") != std::string::npos) s.erase(s.find("|||"), 1);
    }
    while (!s.empty() && s.back() == '|') s.pop_back();
    if (text::trim(s).empty()) s += "x";
    return s;
}

}  // namespace

TEST(PromptGolden, Initial) {
    EXPECT_EQ(prompts::render_initial(fixture::en_cs(), 25), golden("initial_en_cs_25.txt"));
}

TEST(PromptGolden, FollowupWithQe) {
    EXPECT_EQ(prompts::render_followup({{"mt", kTgt}}, 70.84, true), golden("followup_qe_single.txt"));
}

TEST(PromptGolden, FollowupMultiTargetKeepsConfigOrder) {
    EXPECT_EQ(prompts::render_followup({{"nllb", "Kočka seděla."}, {"gpt", "Kočka si sedla."}}, std::nullopt, false),
              golden("followup_multi.txt"));
}

TEST(PromptGolden, LlmQe) { EXPECT_EQ(prompts::render_llm_qe(kSrc, kTgt), golden("llm_qe.txt")); }

TEST(PromptGolden, SourceAnalysis) {
    EXPECT_EQ(prompts::render_source_analysis(kSrc), golden("source_analysis.txt"));
}

TEST(PromptGolden, TargetAnalysis) {
    EXPECT_EQ(prompts::render_target_analysis(kSrc, kTgt), golden("target_analysis.txt"));
}

TEST(PromptGolden, Translate) {
    EXPECT_EQ(prompts::render_translate(kSrc, fixture::en_cs()), golden("translate_en_cs.txt"));
}

TEST(PromptRender, QeScoreUsesOneDecimal) {
    const auto p = prompts::render_followup({{"mt", "x"}}, 45.0, true);
    EXPECT_NE(p.find("SCORE |||45.0%|||"), std::string::npos);
    const auto plain = prompts::render_followup({{"mt", "x"}}, 45.0, false);
    EXPECT_EQ(plain.find("SCORE"), std::string::npos);
}

TEST(PromptRender, Preconditions) {
    EXPECT_THROW(prompts::render_initial(fixture::en_cs(), 0), PreconditionError);
    EXPECT_THROW(prompts::render_followup({}, 1.0, true), PreconditionError);
    EXPECT_THROW(prompts::render_followup({{"mt", "x"}}, std::nullopt, true), PreconditionError);
    EXPECT_THROW(prompts::render_llm_qe("", "x"), PreconditionError);
    EXPECT_THROW(prompts::fill("{MISSING}", {}), PreconditionError);
}

TEST(PromptRender, FillIsSinglePass) {
    EXPECT_EQ(prompts::fill("{A}-{B}", {{"A", "{B}"}, {"B", "b"}}), "{B}-b");
    EXPECT_EQ(prompts::fill("{lower} {} {", {}), "{lower} {} {");
}

TEST(PromptRender, InsertedTextIsVerbatim) {
    const std::string tricky = "{SOURCE_TEXT} |||x||| 100%";
    EXPECT_NE(prompts::render_translate(tricky, fixture::en_cs()).find(tricky), std::string::npos);
}

TEST(ParseSource, Examples) {
    EXPECT_EQ(prompts::parse_source("Here it is.\nSOURCE |||  The text.  |||"), "The text.");
    EXPECT_EQ(prompts::parse_source("SOURCE |||first||| then SOURCE|||second|||"), "second");
    EXPECT_EQ(prompts::parse_source("SOURCE |||multi\nline|||"), "multi\nline");
    EXPECT_THROW(prompts::parse_source("no marker"), ParseError);
    EXPECT_THROW(prompts::parse_source("SOURCE ||| |||"), ParseError);
    EXPECT_THROW(prompts::parse_source("SOURCE |||unterminated"), ParseError);
}

TEST(ParseScore, Examples) {
    EXPECT_DOUBLE_EQ(prompts::parse_score("errors: none\nSCORE |||70.8|||"), 70.8);
    EXPECT_DOUBLE_EQ(prompts::parse_score("SCORE ||| 45 %|||"), 45);
    EXPECT_DOUBLE_EQ(prompts::parse_score("SCORE |||120|||"), 100);
    EXPECT_DOUBLE_EQ(prompts::parse_score("SCORE |||-3|||"), 0);
    EXPECT_DOUBLE_EQ(prompts::parse_score("`SCORE |||1|||` and SCORE |||2|||"), 2);
    EXPECT_THROW(prompts::parse_score("SCORE |||seventy|||"), ParseError);
    EXPECT_THROW(prompts::parse_score("SCORE |||70.8 points|||"), ParseError);
    EXPECT_THROW(prompts::parse_score("70.8"), ParseError);
}

TEST(ParseSourceAnalysis, LenientFormatting) {
    const auto a = prompts::parse_source_analysis(
        "```json\n{\n \"grammaticality\": 90,\n \"naturalness\": 80,\n \"word rarity\": 50,\n"
        " \"syntax complexity\": 70,\n \"topics\": [\"science\", \"technology\"],\n}\n```");
    EXPECT_DOUBLE_EQ(a.grammaticality, 90);
    EXPECT_DOUBLE_EQ(a.word_rarity, 50);
    EXPECT_EQ(a.topics, (std::vector<std::string>{"science", "technology"}));
}

TEST(ParseSourceAnalysis, StrictSchema) {
    EXPECT_THROW(prompts::parse_source_analysis("not json"), ParseError);
    EXPECT_THROW(prompts::parse_source_analysis(R"({"grammaticality": 90})"), ParseError);
    EXPECT_THROW(prompts::parse_source_analysis(
                     R"({"grammaticality": 190, "naturalness": 1, "word rarity": 1, "syntax complexity": 1, "topics": ["a"]})"),
                 ParseError);
    EXPECT_THROW(prompts::parse_source_analysis(
                     R"({"grammaticality": 1, "naturalness": 1, "word rarity": 1, "syntax complexity": 1, "topics": []})"),
                 ParseError);
    EXPECT_THROW(
        prompts::parse_source_analysis(
            R"({"grammaticality": 1, "naturalness": 1, "word rarity": 1, "syntax complexity": 1, "topics": ["a","b","c","d","e","f"]})"),
        ParseError);
}

TEST(ParseTargetAnalysis, NormalizesAndDeduplicates) {
    const auto r = prompts::parse_target_analysis(R"(Sure: {"error_modes": ["Idioms", " idioms", "gender", ""],})");
    EXPECT_EQ(r.error_modes, (std::vector<std::string>{"idioms", "gender"}));
    EXPECT_TRUE(prompts::parse_target_analysis(R"({"error_modes": []})").error_modes.empty());
    EXPECT_THROW(prompts::parse_target_analysis(R"({"modes": []})"), ParseError);
}

// 10,000 random payloads survive wrapping in model-style prose.
TEST(ParseSource, PropertyRoundTrip) {
    std::mt19937_64 rng(4242);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 10000; ++i) {
        const auto payload = random_payload(rng);
        std::string reply = coin(rng) ? "Some reasoning first.\n" : "";
        if (coin(rng)) reply += "Draft: SOURCE |||draft text|||\n";
        reply += "SOURCE |||" + payload + "|||";
        if (coin(rng)) reply += "`.";
        ASSERT_EQ(prompts::parse_source(reply), text::trim(payload)) << reply;
    }
}

TEST(ParseScore, PropertyRoundTrip) {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> v(0, 100);
    for (int i = 0; i < 10000; ++i) {
        const double x = v(rng);
        const auto exact = "reasoning\nSCORE |||" + text::exact(x) + "|||";
        ASSERT_EQ(prompts::parse_score(exact), x);
        const auto one = text::fixed(x, 1);
        ASSERT_EQ(prompts::parse_score("SCORE |||" + one + "%|||"), std::stod(one));
    }
}

TEST(ParseSourceAnalysis, PropertyRoundTrip) {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> v(0, 100);
    std::uniform_int_distribution<int> topics(1, 5);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 2000; ++i) {
        SourceAnalysis a{v(rng), v(rng), v(rng), v(rng), {}};
        const int n = topics(rng);
        for (int t = 0; t < n; ++t) a.topics.push_back("topic " + std::to_string(t) + (coin(rng) ? " {x}" : ""));
        Json j = {{"grammaticality", a.grammaticality},
                  {"naturalness", a.naturalness},
                  {"word rarity", a.word_rarity},
                  {"syntax complexity", a.syntax_complexity},
                  {"topics", a.topics}};
        std::string reply = j.dump(coin(rng) ? 4 : -1);
        if (coin(rng)) reply.insert(reply.rfind('}'), ",");
        if (coin(rng)) reply = "```json\n" + reply + "\n```";
        ASSERT_EQ(prompts::parse_source_analysis(reply), a) << reply;
    }
}
