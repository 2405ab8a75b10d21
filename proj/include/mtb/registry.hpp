#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mtb/cached_provider.hpp"
#include "mtb/providers.hpp"
#include "mtb/store.hpp"

namespace mtb {

// All providers of a run, looked up by ModelRef id.
class ProviderRegistry {
public:
    void add(std::shared_ptr<Generator> p);
    void add(std::shared_ptr<Translator> p);
    void add(std::shared_ptr<QualityScorer> p);
    void add(std::shared_ptr<SourceScorer> p);
    void add(std::shared_ptr<Embedder> p);

    // Throw ConfigError for unknown ids.
    Generator& generator(const std::string& id) const;
    Translator& translator(const std::string& id) const;
    QualityScorer& quality_scorer(const std::string& id) const;
    SourceScorer& source_scorer(const std::string& id) const;
    Embedder& embedder(const std::string& id) const;

    bool has(const std::string& id, ModelKind kind) const;
    std::vector<ModelRef> refs() const;

    std::shared_ptr<CacheStats> cache_stats() const { return stats_; }
    void set_cache_stats(std::shared_ptr<CacheStats> s) { stats_ = std::move(s); }

private:
    void claim(const std::string& id);

    std::map<std::string, std::shared_ptr<Generator>> generators_;
    std::map<std::string, std::shared_ptr<Translator>> translators_;
    std::map<std::string, std::shared_ptr<QualityScorer>> quality_scorers_;
    std::map<std::string, std::shared_ptr<SourceScorer>> source_scorers_;
    std::map<std::string, std::shared_ptr<Embedder>> embedders_;
    std::map<std::string, ModelKind> kinds_;
    std::shared_ptr<CacheStats> stats_;
};

struct RegistryOptions {
    std::shared_ptr<ResponseCache> cache;  // null disables caching
    std::size_t remote_concurrency = 8;
};

// Parses and validates a provider list; ids must be unique.
std::vector<ProviderConfig> parse_provider_configs(const Json& list);

// Instantiates every configured provider, wrapping each in the cache when one
// is given.
ProviderRegistry build_registry(const std::vector<ProviderConfig>& configs, const RegistryOptions& options);

}  // namespace mtb
