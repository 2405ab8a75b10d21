#include "mtb/providers.hpp"

#include <cmath>

#include "mtb/error.hpp"
#include "mtb/text.hpp"

namespace mtb {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw ValidationError("unknown chat role '" + std::string(s) + "'");
}

void to_json(Json& j, const ChatMessage& m) {
    j = Json{{"role", std::string(to_string(m.role))}, {"content", m.content}};
}

void from_json(const Json& j, ChatMessage& m) {
    m.role = parse_role(j.at("role").get<std::string>());
    j.at("content").get_to(m.content);
}

void ProviderConfig::validate() const {
    std::vector<std::string> defects;
    const std::string who = "provider '" + id + "': ";
    if (id.empty()) defects.emplace_back("provider with empty id");
    if (adapter.empty()) defects.push_back(who + "adapter is not set");
    if (max_retries < 0 || max_retries > 10) defects.push_back(who + "max_retries must be in [0,10]");
    if (!(timeout_s > 0)) defects.push_back(who + "timeout must be > 0");
    if (backoff_ms < 0) defects.push_back(who + "backoff must be >= 0");
    const bool remote = adapter.rfind("mock:", 0) != 0;
    if (remote && endpoint.empty()) defects.push_back(who + "remote adapter needs an endpoint");
    if (!defects.empty()) throw ValidationError(std::move(defects));
}

void to_json(Json& j, const ProviderConfig& c) {
    j = Json{{"id", c.id},
             {"kind", std::string(to_string(c.kind))},
             {"adapter", c.adapter},
             {"endpoint", c.endpoint},
             {"credential_env", c.credential_env},
             {"model", c.model},
             {"temperature", c.temperature},
             {"timeout_s", c.timeout_s},
             {"max_retries", c.max_retries},
             {"backoff_ms", c.backoff_ms},
             {"response_path", c.response_path},
             {"auth_header", c.auth_header},
             {"auth_prefix", c.auth_prefix},
             {"options", c.options}};
}

void from_json(const Json& j, ProviderConfig& c) {
    ProviderConfig d;
    c.id = j.at("id").get<std::string>();
    c.kind = parse_model_kind(j.at("kind").get<std::string>());
    c.adapter = j.at("adapter").get<std::string>();
    c.endpoint = j.value("endpoint", d.endpoint);
    c.credential_env = j.value("credential_env", d.credential_env);
    c.model = j.value("model", d.model);
    c.temperature = j.value("temperature", c.kind == ModelKind::generator ? 1.0 : 0.0);
    c.timeout_s = j.value("timeout_s", d.timeout_s);
    c.max_retries = j.value("max_retries", d.max_retries);
    c.backoff_ms = j.value("backoff_ms", d.backoff_ms);
    std::string default_path = d.response_path;
    if (c.adapter == "http_score") default_path = "/score";
    if (c.adapter == "http_embed") default_path = "/embedding";
    c.response_path = j.value("response_path", default_path);
    c.auth_header = j.value("auth_header", d.auth_header);
    c.auth_prefix = j.value("auth_prefix", d.auth_prefix);
    c.options = j.value("options", Json::object());
}

CallLimiter::CallLimiter(std::size_t limit) : limit_(limit == 0 ? 1 : limit) {}

void CallLimiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < limit_; });
    ++in_flight_;
}

void CallLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_one();
}

namespace {

void require_text(std::string_view value, const char* what, const std::string& provider) {
    if (text::trim(value).empty()) {
        throw PreconditionError(std::string(what) + " must be non-empty (provider '" + provider + "')");
    }
}

double check_score(double v, const std::string& provider) {
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) {
        throw ValidationError("provider '" + provider + "' returned score outside [0,100]: " + text::exact(v));
    }
    return v;
}

}  // namespace

std::string Generator::generate(const Conversation& conversation, std::string_view nonce) {
    if (conversation.empty()) throw PreconditionError("generate: empty conversation");
    if (conversation.back().role != Role::user) {
        throw PreconditionError("generate: conversation must end with a user message");
    }
    for (const auto& m : conversation) {
        if (m.content.empty()) throw PreconditionError("generate: empty message content");
    }
    return do_generate(conversation, nonce);
}

std::string Translator::translate(std::string_view source, const LanguagePair& pair) {
    require_text(source, "translate: source", id());
    return do_translate(source, pair);
}

double QualityScorer::score(std::string_view source, std::string_view translation, const LanguagePair& pair) {
    require_text(source, "score_quality: source", id());
    require_text(translation, "score_quality: translation", id());
    return check_score(do_score(source, translation, pair), id());
}

double SourceScorer::score(std::string_view source, const LanguagePair& pair) {
    require_text(source, "score_source: source", id());
    return check_score(do_score(source, pair), id());
}

std::vector<double> Embedder::embed(std::string_view text) {
    require_text(text, "embed: text", id());
    return do_embed(text);
}

}  // namespace mtb
