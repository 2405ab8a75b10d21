#include "mtb/registry.hpp"

#include <set>

#include "mtb/error.hpp"
#include "mtb/mock_providers.hpp"
#include "mtb/remote_provider.hpp"

namespace mtb {

void ProviderRegistry::claim(const std::string& id) {
    if (kinds_.count(id)) throw ConfigError("duplicate provider id '" + id + "'");
}

void ProviderRegistry::add(std::shared_ptr<Generator> p) {
    claim(p->id());
    kinds_[p->id()] = ModelKind::generator;
    generators_[p->id()] = std::move(p);
}

void ProviderRegistry::add(std::shared_ptr<Translator> p) {
    claim(p->id());
    kinds_[p->id()] = ModelKind::translator;
    translators_[p->id()] = std::move(p);
}

void ProviderRegistry::add(std::shared_ptr<QualityScorer> p) {
    claim(p->id());
    kinds_[p->id()] = ModelKind::quality_scorer;
    quality_scorers_[p->id()] = std::move(p);
}

void ProviderRegistry::add(std::shared_ptr<SourceScorer> p) {
    claim(p->id());
    kinds_[p->id()] = ModelKind::source_scorer;
    source_scorers_[p->id()] = std::move(p);
}

void ProviderRegistry::add(std::shared_ptr<Embedder> p) {
    claim(p->id());
    kinds_[p->id()] = ModelKind::embedder;
    embedders_[p->id()] = std::move(p);
}

namespace {

template <typename Map>
auto& lookup(const Map& m, const std::string& id, ModelKind kind) {
    auto it = m.find(id);
    if (it == m.end()) {
        throw ConfigError("no " + std::string(to_string(kind)) + " provider with id '" + id + "'");
    }
    return *it->second;
}

}  // namespace

Generator& ProviderRegistry::generator(const std::string& id) const {
    return lookup(generators_, id, ModelKind::generator);
}
Translator& ProviderRegistry::translator(const std::string& id) const {
    return lookup(translators_, id, ModelKind::translator);
}
QualityScorer& ProviderRegistry::quality_scorer(const std::string& id) const {
    return lookup(quality_scorers_, id, ModelKind::quality_scorer);
}
SourceScorer& ProviderRegistry::source_scorer(const std::string& id) const {
    return lookup(source_scorers_, id, ModelKind::source_scorer);
}
Embedder& ProviderRegistry::embedder(const std::string& id) const {
    return lookup(embedders_, id, ModelKind::embedder);
}

bool ProviderRegistry::has(const std::string& id, ModelKind kind) const {
    auto it = kinds_.find(id);
    return it != kinds_.end() && it->second == kind;
}

std::vector<ModelRef> ProviderRegistry::refs() const {
    std::vector<ModelRef> out;
    const auto add_all = [&](const auto& m, ModelKind kind) {
        for (const auto& [id, p] : m) out.push_back(ModelRef{id, kind, p->config().adapter});
    };
    add_all(generators_, ModelKind::generator);
    add_all(translators_, ModelKind::translator);
    add_all(quality_scorers_, ModelKind::quality_scorer);
    add_all(source_scorers_, ModelKind::source_scorer);
    add_all(embedders_, ModelKind::embedder);
    return out;
}

std::vector<ProviderConfig> parse_provider_configs(const Json& list) {
    if (!list.is_array()) throw ConfigError("'providers' must be a list");
    std::vector<ProviderConfig> out;
    std::vector<std::string> defects;
    std::set<std::string> ids;
    for (const auto& entry : list) {
        ProviderConfig c;
        try {
            c = entry.get<ProviderConfig>();
        } catch (const std::exception& e) {
            defects.push_back(std::string("bad provider entry: ") + e.what());
            continue;
        }
        if (!ids.insert(c.id).second) defects.push_back("duplicate provider id '" + c.id + "'");
        try {
            c.validate();
        } catch (const ValidationError& e) {
            defects.insert(defects.end(), e.defects().begin(), e.defects().end());
            continue;
        }
        out.push_back(std::move(c));
    }
    if (!defects.empty()) throw ValidationError(std::move(defects));
    return out;
}

namespace {

[[noreturn]] void unknown_adapter(const ProviderConfig& c) {
    throw ConfigError("provider '" + c.id + "': adapter '" + c.adapter + "' is not available for kind " +
                      std::string(to_string(c.kind)));
}

}  // namespace

ProviderRegistry build_registry(const std::vector<ProviderConfig>& configs, const RegistryOptions& options) {
    ProviderRegistry reg;
    auto limiter = std::make_shared<CallLimiter>(options.remote_concurrency);
    auto stats = std::make_shared<CacheStats>();
    reg.set_cache_stats(stats);
    const auto& cache = options.cache;

    for (const auto& c : configs) {
        const auto& o = c.options;
        switch (c.kind) {
            case ModelKind::generator: {
                std::shared_ptr<Generator> p;
                if (c.adapter == "mock:adversarial") {
                    p = std::make_shared<mock::AdversarialGenerator>(
                        c, o.contains("fresh_text") ? std::optional<std::string>(o["fresh_text"].get<std::string>())
                                                    : std::nullopt);
                } else if (c.adapter == "mock:scripted") {
                    p = std::make_shared<mock::ScriptedGenerator>(
                        c, o.value("fixtures", std::vector<std::string>{}));
                } else if (c.adapter == "mock:analyst") {
                    p = std::make_shared<mock::AnalystGenerator>(c);
                } else if (c.adapter == "chat") {
                    p = std::make_shared<remote::ChatGenerator>(c, limiter);
                } else {
                    unknown_adapter(c);
                }
                if (cache) p = std::make_shared<CachedGenerator>(p, cache, stats);
                reg.add(p);
                break;
            }
            case ModelKind::translator: {
                std::shared_ptr<Translator> p;
                if (c.adapter == "mock:uppercase") {
                    p = std::make_shared<mock::MockTranslator>(c, o.value("drop_marker", std::string("@@")));
                } else if (c.adapter == "chat") {
                    p = std::make_shared<remote::ChatTranslator>(c, limiter);
                } else {
                    unknown_adapter(c);
                }
                if (cache) p = std::make_shared<CachedTranslator>(p, cache, stats);
                reg.add(p);
                break;
            }
            case ModelKind::quality_scorer: {
                std::shared_ptr<QualityScorer> p;
                if (c.adapter == "mock:marker") {
                    p = std::make_shared<mock::MarkerOracleScorer>(c, o.value("marker", std::string("@@")),
                                                                   o.value("penalty", 20.0));
                } else if (c.adapter == "mock:overlap") {
                    p = std::make_shared<mock::OverlapOracleScorer>(c);
                } else if (c.adapter == "mock:table") {
                    p = std::make_shared<mock::TableScorer>(c, o.value("scores", std::map<std::string, double>{}),
                                                            o.value("default", 100.0));
                } else if (c.adapter == "chat") {
                    p = std::make_shared<remote::LlmQeScorer>(c, limiter);
                } else if (c.adapter == "http_score") {
                    p = std::make_shared<remote::HttpQualityScorer>(c, limiter);
                } else {
                    unknown_adapter(c);
                }
                if (cache) p = std::make_shared<CachedQualityScorer>(p, cache, stats);
                reg.add(p);
                break;
            }
            case ModelKind::source_scorer: {
                std::shared_ptr<SourceScorer> p;
                if (c.adapter == "mock:marker") {
                    p = std::make_shared<mock::MarkerSourceScorer>(c, o.value("marker", std::string("@@")),
                                                                   o.value("penalty", 20.0));
                } else if (c.adapter == "http_score") {
                    p = std::make_shared<remote::HttpSourceScorer>(c, limiter);
                } else {
                    unknown_adapter(c);
                }
                if (cache) p = std::make_shared<CachedSourceScorer>(p, cache, stats);
                reg.add(p);
                break;
            }
            case ModelKind::embedder: {
                std::shared_ptr<Embedder> p;
                if (c.adapter == "mock:letters") {
                    p = std::make_shared<mock::LetterHistogramEmbedder>(c);
                } else if (c.adapter == "http_embed") {
                    p = std::make_shared<remote::HttpEmbedder>(c, limiter);
                } else {
                    unknown_adapter(c);
                }
                if (cache) p = std::make_shared<CachedEmbedder>(p, cache, stats);
                reg.add(p);
                break;
            }
        }
    }
    return reg;
}

}  // namespace mtb
