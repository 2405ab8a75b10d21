#pragma once

#include <atomic>
#include <memory>

#include "mtb/providers.hpp"
#include "mtb/store.hpp"

// Decorators that record every reply in a ResponseCache keyed by the
// canonical request. With a warm cache the wrapped provider is never called.
namespace mtb {

struct CacheStats {
    std::atomic<std::size_t> hits{0};
    std::atomic<std::size_t> misses{0};
};

class CachedGenerator final : public Generator {
public:
    CachedGenerator(std::shared_ptr<Generator> inner, std::shared_ptr<ResponseCache> cache,
                    std::shared_ptr<CacheStats> stats = nullptr);

protected:
    std::string do_generate(const Conversation& conversation, std::string_view nonce) override;

private:
    std::shared_ptr<Generator> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<CacheStats> stats_;
};

class CachedTranslator final : public Translator {
public:
    CachedTranslator(std::shared_ptr<Translator> inner, std::shared_ptr<ResponseCache> cache,
                     std::shared_ptr<CacheStats> stats = nullptr);

protected:
    std::string do_translate(std::string_view source, const LanguagePair& pair) override;

private:
    std::shared_ptr<Translator> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<CacheStats> stats_;
};

class CachedQualityScorer final : public QualityScorer {
public:
    CachedQualityScorer(std::shared_ptr<QualityScorer> inner, std::shared_ptr<ResponseCache> cache,
                        std::shared_ptr<CacheStats> stats = nullptr);

protected:
    double do_score(std::string_view source, std::string_view translation, const LanguagePair& pair) override;

private:
    std::shared_ptr<QualityScorer> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<CacheStats> stats_;
};

class CachedSourceScorer final : public SourceScorer {
public:
    CachedSourceScorer(std::shared_ptr<SourceScorer> inner, std::shared_ptr<ResponseCache> cache,
                       std::shared_ptr<CacheStats> stats = nullptr);

protected:
    double do_score(std::string_view source, const LanguagePair& pair) override;

private:
    std::shared_ptr<SourceScorer> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<CacheStats> stats_;
};

class CachedEmbedder final : public Embedder {
public:
    CachedEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<ResponseCache> cache,
                   std::shared_ptr<CacheStats> stats = nullptr);

protected:
    std::vector<double> do_embed(std::string_view text) override;

private:
    std::shared_ptr<Embedder> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<CacheStats> stats_;
};

}  // namespace mtb
