#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mtb/providers.hpp"

namespace mtb::remote {

struct HttpResult {
    int status = 0;        // 0 when the transport failed before a response
    std::string body;
    std::string error;     // transport error description
};

// POSTs a JSON body, honouring the config's timeout, credential and the
// shared in-flight limit. Retries transport failures, 408, 429 and 5xx with
// exponential backoff (backoff_ms * 2^attempt) up to max_retries times.
// 401/403 throw ConfigError immediately; other 4xx and exhausted retries
// throw ProviderUnavailable.
Json post_json(const ProviderConfig& config, CallLimiter& limiter, const Json& body);

// Resolves config.response_path (a JSON pointer) in a response document.
Json extract(const ProviderConfig& config, const Json& response);

// Generic chat shape: {"model", "messages": [{role, content}], "temperature"};
// the reply text is found at response_path.
class ChatGenerator final : public Generator {
public:
    ChatGenerator(ProviderConfig config, std::shared_ptr<CallLimiter> limiter);

protected:
    std::string do_generate(const Conversation& conversation, std::string_view nonce) override;

private:
    std::shared_ptr<CallLimiter> limiter_;
};

// Prompted LLM translation over the chat shape.
class ChatTranslator final : public Translator {
public:
    ChatTranslator(ProviderConfig config, std::shared_ptr<CallLimiter> limiter);

protected:
    std::string do_translate(std::string_view source, const LanguagePair& pair) override;

private:
    ChatGenerator chat_;
};

// LLM-as-QE: renders the rubric prompt and parses `SCORE |||x|||`, re-asking
// up to options.parse_retries (default 2) times before a ParseError.
class LlmQeScorer final : public QualityScorer {
public:
    LlmQeScorer(ProviderConfig config, std::shared_ptr<CallLimiter> limiter);

protected:
    double do_score(std::string_view source, std::string_view translation, const LanguagePair& pair) override;

private:
    ChatGenerator chat_;
};

// Regression-style scorer endpoint: {"model", "source", "translation",
// "source_lang", "target_lang"} -> number at response_path. With
// options.scale = "metricx" the raw 0..25 error is mapped onto 0..100.
class HttpQualityScorer final : public QualityScorer {
public:
    HttpQualityScorer(ProviderConfig config, std::shared_ptr<CallLimiter> limiter);

protected:
    double do_score(std::string_view source, std::string_view translation, const LanguagePair& pair) override;

private:
    std::shared_ptr<CallLimiter> limiter_;
};

// Same endpoint shape without a translation.
class HttpSourceScorer final : public SourceScorer {
public:
    HttpSourceScorer(ProviderConfig config, std::shared_ptr<CallLimiter> limiter);

protected:
    double do_score(std::string_view source, const LanguagePair& pair) override;

private:
    std::shared_ptr<CallLimiter> limiter_;
};

// {"model", "input"} -> numeric array at response_path.
class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(ProviderConfig config, std::shared_ptr<CallLimiter> limiter);

protected:
    std::vector<double> do_embed(std::string_view text) override;

private:
    std::shared_ptr<CallLimiter> limiter_;
};

}  // namespace mtb::remote
