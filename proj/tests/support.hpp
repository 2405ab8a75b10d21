#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mtb/core.hpp"
#include "mtb/mock_providers.hpp"
#include "mtb/providers.hpp"
#include "mtb/registry.hpp"

namespace mtb::fixture {

inline ProviderConfig provider(std::string id, ModelKind kind, std::string adapter, Json options = Json::object()) {
    ProviderConfig c;
    c.id = std::move(id);
    c.kind = kind;
    c.adapter = std::move(adapter);
    c.temperature = kind == ModelKind::generator ? 1.0 : 0.0;
    c.options = std::move(options);
    return c;
}

// Adversarial generator "gen", uppercase translator "mt", marker oracle "qe".
inline ProviderRegistry mock_stack() {
    ProviderRegistry r;
    r.add(std::shared_ptr<Generator>(
        std::make_shared<mock::AdversarialGenerator>(provider("gen", ModelKind::generator, "mock:adversarial"))));
    r.add(std::shared_ptr<Translator>(
        std::make_shared<mock::MockTranslator>(provider("mt", ModelKind::translator, "mock:uppercase"))));
    r.add(std::shared_ptr<QualityScorer>(
        std::make_shared<mock::MarkerOracleScorer>(provider("qe", ModelKind::quality_scorer, "mock:marker"))));
    return r;
}

inline MethodSpec mtbreaker_spec(int steps, std::vector<std::string> targets = {"mt"},
                                 std::vector<std::string> scorers = {"qe"}) {
    MethodSpec m;
    m.name = MethodName::mtbreaker;
    m.steps = steps;
    m.seeded = true;
    m.target_translators = std::move(targets);
    m.scorers = std::move(scorers);
    m.generator = "gen";
    return m;
}

inline MethodSpec single_spec(MethodName name, int samples = 1) {
    MethodSpec m = mtbreaker_spec(0);
    m.name = name;
    m.steps = 0;
    m.seeded = name == MethodName::seeds;
    m.samples = samples;
    return m;
}

inline LanguagePair en_cs() { return LanguagePair{"English", "Czech"}; }

// Removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("mtb-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::filesystem::path source_dir() { return MTB_SOURCE_DIR; }

// Printable ASCII text of random length; excludes '|'.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_len = 40) {
    static const std::string alphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,;:!?'\"()-_@#%&*+=/\\<>[]{}~\n\t";
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng)];
    return s;
}

}  // namespace mtb::fixture
