#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "mtb/core.hpp"

namespace mtb {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using Conversation = std::vector<ChatMessage>;

void to_json(Json& j, const ChatMessage& m);
void from_json(const Json& j, ChatMessage& m);

// One entry of the provider configuration file. Credentials are never stored
// here, only the name of the environment variable that holds them.
struct ProviderConfig {
    std::string id;
    ModelKind kind = ModelKind::generator;
    // "mock:<name>" for the offline mocks, or one of the remote adapters
    // "chat", "http_score", "http_embed".
    std::string adapter;
    std::string endpoint;
    std::string credential_env;
    std::string model;
    double temperature = 1.0;
    double timeout_s = 60.0;
    int max_retries = 3;
    int backoff_ms = 500;
    // Field mapping for the generic request/response shapes.
    std::string response_path = "/choices/0/message/content";
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    // Adapter-specific parameters (mock fixtures, markers, score scaling...).
    Json options = Json::object();

    void validate() const;
    ModelRef ref() const { return ModelRef{id, kind, adapter}; }
};

void to_json(Json& j, const ProviderConfig& c);
// Applies the kind-dependent temperature default (1.0 generators, 0.0 scorers).
void from_json(const Json& j, ProviderConfig& c);

// Bounds the number of in-flight remote calls across the whole run.
class CallLimiter {
public:
    explicit CallLimiter(std::size_t limit = 8);

    void acquire();
    void release();
    std::size_t limit() const { return limit_; }

    class Slot {
    public:
        explicit Slot(CallLimiter& l) : limiter_(l) { limiter_.acquire(); }
        ~Slot() { limiter_.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        CallLimiter& limiter_;
    };

private:
    std::size_t limit_;
    std::size_t in_flight_ = 0;
    std::mutex mutex_;
    std::condition_variable cv_;
};

class Provider {
public:
    explicit Provider(ProviderConfig config) : config_(std::move(config)) {}
    virtual ~Provider() = default;

    const ProviderConfig& config() const { return config_; }
    const std::string& id() const { return config_.id; }

private:
    ProviderConfig config_;
};

// Role contracts. The public entry points check preconditions and then
// dispatch to the implementation hook.

class Generator : public Provider {
public:
    using Provider::Provider;
    // `nonce` distinguishes otherwise identical requests (item, sample) so
    // that caching does not collapse independent samples.
    std::string generate(const Conversation& conversation, std::string_view nonce = {});

protected:
    virtual std::string do_generate(const Conversation& conversation, std::string_view nonce) = 0;
};

class Translator : public Provider {
public:
    using Provider::Provider;
    std::string translate(std::string_view source, const LanguagePair& pair);

protected:
    virtual std::string do_translate(std::string_view source, const LanguagePair& pair) = 0;
};

class QualityScorer : public Provider {
public:
    using Provider::Provider;
    // 0..100, 100 = perfect translation.
    double score(std::string_view source, std::string_view translation, const LanguagePair& pair);

protected:
    virtual double do_score(std::string_view source, std::string_view translation, const LanguagePair& pair) = 0;
};

class SourceScorer : public Provider {
public:
    using Provider::Provider;
    double score(std::string_view source, const LanguagePair& pair);

protected:
    virtual double do_score(std::string_view source, const LanguagePair& pair) = 0;
};

class Embedder : public Provider {
public:
    using Provider::Provider;
    std::vector<double> embed(std::string_view text);

protected:
    virtual std::vector<double> do_embed(std::string_view text) = 0;
};

}  // namespace mtb
