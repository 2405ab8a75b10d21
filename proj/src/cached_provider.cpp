#include "mtb/cached_provider.hpp"

#include <charconv>

#include "mtb/error.hpp"
#include "mtb/text.hpp"

namespace mtb {

namespace {

Json base_request(const ProviderConfig& c, std::string_view op) {
    return Json{{"op", op}, {"model", c.model}, {"temperature", c.temperature}, {"adapter", c.adapter}};
}

template <typename Compute>
std::string through_cache(ResponseCache& cache, CacheStats* stats, const CacheKey& key, Compute&& compute) {
    if (auto hit = cache.get(key)) {
        if (stats) ++stats->hits;
        return *hit;
    }
    if (stats) ++stats->misses;
    std::string value = compute();
    cache.put(key, value);
    return value;
}

double to_double(const CacheKey& key, const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IntegrityError("cache entry " + key.str() + " is not a number");
    }
    return v;
}

}  // namespace

CachedGenerator::CachedGenerator(std::shared_ptr<Generator> inner, std::shared_ptr<ResponseCache> cache,
                                 std::shared_ptr<CacheStats> stats)
    : Generator(inner->config()), inner_(std::move(inner)), cache_(std::move(cache)), stats_(std::move(stats)) {}

std::string CachedGenerator::do_generate(const Conversation& conversation, std::string_view nonce) {
    auto req = base_request(config(), "generate");
    req["messages"] = conversation;
    req["nonce"] = nonce;
    const auto key = CacheKey::for_request(id(), req);
    return through_cache(*cache_, stats_.get(), key, [&] { return inner_->generate(conversation, nonce); });
}

CachedTranslator::CachedTranslator(std::shared_ptr<Translator> inner, std::shared_ptr<ResponseCache> cache,
                                   std::shared_ptr<CacheStats> stats)
    : Translator(inner->config()), inner_(std::move(inner)), cache_(std::move(cache)), stats_(std::move(stats)) {}

std::string CachedTranslator::do_translate(std::string_view source, const LanguagePair& pair) {
    auto req = base_request(config(), "translate");
    req["source"] = source;
    req["pair"] = pair;
    const auto key = CacheKey::for_request(id(), req);
    return through_cache(*cache_, stats_.get(), key, [&] { return inner_->translate(source, pair); });
}

CachedQualityScorer::CachedQualityScorer(std::shared_ptr<QualityScorer> inner, std::shared_ptr<ResponseCache> cache,
                                         std::shared_ptr<CacheStats> stats)
    : QualityScorer(inner->config()), inner_(std::move(inner)), cache_(std::move(cache)), stats_(std::move(stats)) {}

double CachedQualityScorer::do_score(std::string_view source, std::string_view translation,
                                     const LanguagePair& pair) {
    auto req = base_request(config(), "score_quality");
    req["source"] = source;
    req["translation"] = translation;
    req["pair"] = pair;
    const auto key = CacheKey::for_request(id(), req);
    return to_double(key, through_cache(*cache_, stats_.get(), key, [&] {
                         return text::exact(inner_->score(source, translation, pair));
                     }));
}

CachedSourceScorer::CachedSourceScorer(std::shared_ptr<SourceScorer> inner, std::shared_ptr<ResponseCache> cache,
                                       std::shared_ptr<CacheStats> stats)
    : SourceScorer(inner->config()), inner_(std::move(inner)), cache_(std::move(cache)), stats_(std::move(stats)) {}

double CachedSourceScorer::do_score(std::string_view source, const LanguagePair& pair) {
    auto req = base_request(config(), "score_source");
    req["source"] = source;
    req["pair"] = pair;
    const auto key = CacheKey::for_request(id(), req);
    return to_double(key, through_cache(*cache_, stats_.get(), key,
                                        [&] { return text::exact(inner_->score(source, pair)); }));
}

CachedEmbedder::CachedEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<ResponseCache> cache,
                               std::shared_ptr<CacheStats> stats)
    : Embedder(inner->config()), inner_(std::move(inner)), cache_(std::move(cache)), stats_(std::move(stats)) {}

std::vector<double> CachedEmbedder::do_embed(std::string_view input) {
    auto req = base_request(config(), "embed");
    req["text"] = input;
    const auto key = CacheKey::for_request(id(), req);
    const auto raw = through_cache(*cache_, stats_.get(), key, [&] {
        // Doubles serialize with round-trip precision.
        return Json(inner_->embed(input)).dump();
    });
    Json j = Json::parse(raw, nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw IntegrityError("cache entry " + key.str() + " is not a vector");
    return j.get<std::vector<double>>();
}

}  // namespace mtb
