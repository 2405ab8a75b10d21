#include "mtb/remote_provider.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "mtb/error.hpp"
#include "mtb/metrics.hpp"
#include "mtb/prompts.hpp"
#include "mtb/text.hpp"

namespace mtb::remote {

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint '" + url + "' lacks a scheme");
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

HttpResult post_once(const ProviderConfig& config, const Endpoint& ep, const httplib::Headers& headers,
                     const std::string& body) {
    httplib::Client client(ep.base);
    const auto seconds = static_cast<time_t>(config.timeout_s);
    const auto micros = static_cast<time_t>((config.timeout_s - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) return HttpResult{0, {}, httplib::to_string(res.error())};
    return HttpResult{res->status, res->body, {}};
}

bool retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

}  // namespace

Json post_json(const ProviderConfig& config, CallLimiter& limiter, const Json& body) {
    const auto ep = split_endpoint(config.endpoint);
    httplib::Headers headers;
    if (!config.credential_env.empty()) {
        const char* secret = std::getenv(config.credential_env.c_str());
        if (secret == nullptr || *secret == '\0') {
            throw ConfigError("provider '" + config.id + "': credential variable " + config.credential_env +
                              " is not set");
        }
        headers.emplace(config.auth_header, config.auth_prefix + secret);
    }
    const auto payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(static_cast<long long>(config.backoff_ms) << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        HttpResult r;
        {
            CallLimiter::Slot slot(limiter);
            r = post_once(config, ep, headers, payload);
        }
        if (r.status == 401 || r.status == 403) {
            throw ConfigError("provider '" + config.id + "': authentication rejected (HTTP " +
                              std::to_string(r.status) + ")");
        }
        if (r.status >= 200 && r.status < 300) {
            Json doc = Json::parse(r.body, nullptr, false);
            if (doc.is_discarded()) {
                last_error = "response is not JSON";
                continue;
            }
            return doc;
        }
        last_error = r.status == 0 ? r.error : "HTTP " + std::to_string(r.status);
        if (!retryable(r.status)) break;
    }
    throw ProviderUnavailable(config.id, last_error);
}

Json extract(const ProviderConfig& config, const Json& response) {
    try {
        return response.at(Json::json_pointer(config.response_path));
    } catch (const Json::exception& e) {
        throw ParseError("provider '" + config.id + "': response has nothing at " + config.response_path);
    }
}

ChatGenerator::ChatGenerator(ProviderConfig config, std::shared_ptr<CallLimiter> limiter)
    : Generator(std::move(config)), limiter_(std::move(limiter)) {}

std::string ChatGenerator::do_generate(const Conversation& conversation, std::string_view) {
    Json body = {{"model", config().model}, {"messages", conversation}, {"temperature", config().temperature}};
    const auto value = extract(config(), post_json(config(), *limiter_, body));
    if (!value.is_string()) throw ParseError("provider '" + id() + "': reply is not text");
    return value.get<std::string>();
}

ChatTranslator::ChatTranslator(ProviderConfig config, std::shared_ptr<CallLimiter> limiter)
    : Translator(config), chat_(config, std::move(limiter)) {}

std::string ChatTranslator::do_translate(std::string_view source, const LanguagePair& pair) {
    Conversation conv{{Role::user, prompts::render_translate(source, pair)}};
    return text::trim(chat_.generate(conv));
}

LlmQeScorer::LlmQeScorer(ProviderConfig config, std::shared_ptr<CallLimiter> limiter)
    : QualityScorer(config), chat_(config, std::move(limiter)) {}

double LlmQeScorer::do_score(std::string_view source, std::string_view translation, const LanguagePair&) {
    const int retries = config().options.value("parse_retries", 2);
    Conversation conv{{Role::user, prompts::render_llm_qe(source, translation)}};
    std::string last;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        last = chat_.generate(conv);
        try {
            return prompts::parse_score(last);
        } catch (const ParseError&) {
            conv.push_back({Role::assistant, last.empty() ? std::string("(empty)") : last});
            conv.push_back({Role::user, prompts::score_reminder()});
        }
    }
    throw ParseError("scorer '" + id() + "' produced no parseable SCORE after " + std::to_string(retries + 1) +
                     " attempts");
}

namespace {

double number_from(const ProviderConfig& config, const Json& response) {
    const auto value = extract(config, response);
    if (!value.is_number()) throw ParseError("provider '" + config.id + "': score is not a number");
    double v = value.get<double>();
    if (config.options.value("scale", std::string()) == "metricx") v = metrics::scale_metricx(v);
    return v;
}

}  // namespace

HttpQualityScorer::HttpQualityScorer(ProviderConfig config, std::shared_ptr<CallLimiter> limiter)
    : QualityScorer(std::move(config)), limiter_(std::move(limiter)) {}

double HttpQualityScorer::do_score(std::string_view source, std::string_view translation,
                                   const LanguagePair& pair) {
    Json body = {{"model", config().model},
                 {"source", source},
                 {"translation", translation},
                 {"source_lang", pair.source_lang},
                 {"target_lang", pair.target_lang}};
    return number_from(config(), post_json(config(), *limiter_, body));
}

HttpSourceScorer::HttpSourceScorer(ProviderConfig config, std::shared_ptr<CallLimiter> limiter)
    : SourceScorer(std::move(config)), limiter_(std::move(limiter)) {}

double HttpSourceScorer::do_score(std::string_view source, const LanguagePair& pair) {
    Json body = {{"model", config().model},
                 {"source", source},
                 {"source_lang", pair.source_lang},
                 {"target_lang", pair.target_lang}};
    return number_from(config(), post_json(config(), *limiter_, body));
}

HttpEmbedder::HttpEmbedder(ProviderConfig config, std::shared_ptr<CallLimiter> limiter)
    : Embedder(std::move(config)), limiter_(std::move(limiter)) {}

std::vector<double> HttpEmbedder::do_embed(std::string_view input) {
    Json body = {{"model", config().model}, {"input", input}};
    const auto value = extract(config(), post_json(config(), *limiter_, body));
    if (!value.is_array() || value.empty()) throw ParseError("provider '" + id() + "': embedding is not a list");
    std::vector<double> out;
    out.reserve(value.size());
    for (const auto& x : value) {
        if (!x.is_number()) throw ParseError("provider '" + id() + "': embedding has a non-number");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace mtb::remote
