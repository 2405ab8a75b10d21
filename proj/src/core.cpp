#include "mtb/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mtb/error.hpp"
#include "mtb/text.hpp"

namespace mtb {

ValidationError::ValidationError(std::vector<std::string> defects)
    : Error([&] {
          std::string msg = "validation failed:";
          for (const auto& d : defects) msg += "\n  - " + d;
          return msg;
      }()),
      defects_(std::move(defects)) {}

void LanguagePair::validate() const {
    std::vector<std::string> defects;
    if (text::trim(source_lang).empty()) defects.emplace_back("source language is empty");
    if (text::trim(target_lang).empty()) defects.emplace_back("target language is empty");
    if (source_lang == target_lang) {
        defects.emplace_back("source and target language are both '" + source_lang + "'");
    }
    if (!defects.empty()) throw ValidationError(std::move(defects));
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::translator: return "translator";
        case ModelKind::generator: return "generator";
        case ModelKind::quality_scorer: return "quality_scorer";
        case ModelKind::source_scorer: return "source_scorer";
        case ModelKind::embedder: return "embedder";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view s) {
    for (auto k : {ModelKind::translator, ModelKind::generator, ModelKind::quality_scorer,
                   ModelKind::source_scorer, ModelKind::embedder}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

ScoreSet combine_scores(std::map<std::string, double> per_scorer) {
    if (per_scorer.empty()) throw ConfigError("combine_scores: no scorer values");
    double sum = 0.0;
    double lo = 100.0;
    double hi = 0.0;
    for (const auto& [id, v] : per_scorer) {
        if (!(v >= 0.0 && v <= 100.0)) {
            throw ValidationError("score from scorer '" + id + "' out of [0,100]: " + text::exact(v));
        }
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    ScoreSet out;
    // Rounding in the sum can land one ulp outside the value range.
    out.combined = std::clamp(sum / static_cast<double>(per_scorer.size()), lo, hi);
    out.per_scorer = std::move(per_scorer);
    return out;
}

double trajectory_difficulty(const Step& step) {
    if (step.failed) {
        throw PreconditionError("trajectory_difficulty called on failed step " +
                                std::to_string(step.index));
    }
    if (step.scores.empty()) {
        throw PreconditionError("step " + std::to_string(step.index) + " carries no scores");
    }
    double sum = 0.0;
    for (const auto& [id, s] : step.scores) sum += s.combined;
    return sum / static_cast<double>(step.scores.size());
}

std::string_view to_string(MethodName name) {
    switch (name) {
        case MethodName::seeds: return "seeds";
        case MethodName::zeroshot: return "zeroshot";
        case MethodName::zeroshot_history: return "zeroshot_history";
        case MethodName::zeroshot_min: return "zeroshot_min";
        case MethodName::mtbreaker: return "mtbreaker";
    }
    return "unknown";
}

MethodName parse_method_name(std::string_view s) {
    for (auto m : {MethodName::seeds, MethodName::zeroshot, MethodName::zeroshot_history,
                   MethodName::zeroshot_min, MethodName::mtbreaker}) {
        if (to_string(m) == s) return m;
    }
    throw ValidationError("unknown method '" + std::string(s) + "'");
}

void MethodSpec::validate() const {
    std::vector<std::string> defects;
    switch (name) {
        case MethodName::mtbreaker:
            if (steps < 1) defects.emplace_back("mtbreaker requires steps >= 1");
            break;
        case MethodName::seeds:
        case MethodName::zeroshot:
        case MethodName::zeroshot_history:
            if (steps != 0) defects.emplace_back(std::string(to_string(name)) + " requires steps = 0");
            break;
        case MethodName::zeroshot_min:
            if (steps != 0) defects.emplace_back("zeroshot_min requires steps = 0");
            if (samples < 2) defects.emplace_back("zeroshot_min requires samples >= 2");
            break;
    }
    if (samples < 1) defects.emplace_back("samples must be >= 1");
    if (qe_feedback && name != MethodName::mtbreaker) {
        defects.emplace_back("qe_feedback is only valid for mtbreaker");
    }
    if (target_translators.empty()) defects.emplace_back("target_translators is empty");
    if (scorers.empty()) defects.emplace_back("scorers is empty");
    if (generator.empty() && name != MethodName::seeds) defects.emplace_back("generator is not set");
    std::set<std::string> seen;
    for (const auto& t : target_translators) {
        if (!seen.insert(t).second) defects.push_back("duplicate target translator '" + t + "'");
    }
    seen.clear();
    for (const auto& s : scorers) {
        if (!seen.insert(s).second) defects.push_back("duplicate scorer '" + s + "'");
    }
    if (!defects.empty()) throw ValidationError(std::move(defects));
}

std::string MethodSpec::label() const {
    std::string out(to_string(name));
    if (name == MethodName::mtbreaker) {
        out += seeded ? "(seeded" : "(seedless";
        if (qe_feedback) out += "+qe";
        out += ")";
    }
    if (multi_target()) out += "[multi]";
    return out;
}

std::optional<std::size_t> select_step(const std::vector<Step>& steps) {
    std::optional<std::size_t> best;
    double best_value = 0.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].failed) continue;
        const double v = trajectory_difficulty(steps[i]);
        if (!best || v < best_value) {
            best = i;
            best_value = v;
        }
    }
    return best;
}

void Trajectory::validate() const {
    std::vector<std::string> defects;
    std::size_t expected = 1;
    if (method.name == MethodName::mtbreaker) expected = static_cast<std::size_t>(method.steps) + 1;
    if (method.name == MethodName::zeroshot_min) expected = static_cast<std::size_t>(method.samples);
    if (steps.size() != expected) {
        defects.push_back("expected " + std::to_string(expected) + " steps, found " +
                          std::to_string(steps.size()));
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        if (s.index != i) defects.push_back("step " + std::to_string(i) + " has index " + std::to_string(s.index));
        if (s.failed) continue;
        if (s.translations.empty()) defects.push_back("step " + std::to_string(i) + " has no translations");
        bool same_keys = s.translations.size() == s.scores.size() &&
                         std::equal(s.translations.begin(), s.translations.end(), s.scores.begin(),
                                    [](const auto& a, const auto& b) { return a.first == b.first; });
        if (!same_keys) defects.push_back("step " + std::to_string(i) + " scores/translations key mismatch");
    }
    if (defects.empty()) {
        auto sel = select_step(steps);
        if (!sel) {
            defects.emplace_back("no non-failed step to select");
        } else if (*sel != selected) {
            defects.push_back("selected=" + std::to_string(selected) + " but argmin is " + std::to_string(*sel));
        }
    }
    if (!defects.empty()) throw ValidationError(std::move(defects));
}

void SourceAnalysis::validate() const {
    std::vector<std::string> defects;
    const std::pair<const char*, double> values[] = {{"grammaticality", grammaticality},
                                                     {"naturalness", naturalness},
                                                     {"word rarity", word_rarity},
                                                     {"syntax complexity", syntax_complexity}};
    for (const auto& [name, v] : values) {
        if (!(v >= 0.0 && v <= 100.0)) defects.push_back(std::string(name) + " out of [0,100]: " + text::exact(v));
    }
    if (topics.empty() || topics.size() > 5) {
        defects.push_back("topics must hold 1 to 5 entries, found " + std::to_string(topics.size()));
    }
    for (const auto& t : topics) {
        if (text::trim(t).empty()) defects.emplace_back("empty topic");
    }
    if (!defects.empty()) throw ValidationError(std::move(defects));
}

void DatasetRecord::validate() const {
    if (text::trim(source).empty()) throw ValidationError("dataset record source is empty");
}

DatasetRecord make_record(const Trajectory& trajectory, std::optional<std::size_t> item) {
    DatasetRecord r;
    r.source = trajectory.selected_step().source;
    r.language_pair = trajectory.language_pair;
    r.method = trajectory.method.name;
    r.seed = trajectory.seed;
    r.targets = trajectory.method.target_translators;
    r.trajectory_item = item;
    return r;
}

// ---- JSON -----------------------------------------------------------------

void to_json(Json& j, const LanguagePair& v) {
    j = Json{{"source", v.source_lang}, {"target", v.target_lang}};
}

void from_json(const Json& j, LanguagePair& v) {
    j.at("source").get_to(v.source_lang);
    j.at("target").get_to(v.target_lang);
}

void to_json(Json& j, const ScoreSet& v) {
    j = Json{{"per_scorer", v.per_scorer}, {"combined", v.combined}};
}

void from_json(const Json& j, ScoreSet& v) {
    j.at("per_scorer").get_to(v.per_scorer);
    j.at("combined").get_to(v.combined);
}

void to_json(Json& j, const Step& v) {
    j = Json{{"index", v.index},
             {"source", v.source},
             {"translations", v.translations},
             {"scores", v.scores},
             {"failed", v.failed}};
    if (v.failed) j["failure"] = v.failure;
}

void from_json(const Json& j, Step& v) {
    j.at("index").get_to(v.index);
    j.at("source").get_to(v.source);
    j.at("translations").get_to(v.translations);
    j.at("scores").get_to(v.scores);
    j.at("failed").get_to(v.failed);
    v.failure = j.value("failure", std::string());
}

void to_json(Json& j, const MethodSpec& v) {
    j = Json{{"name", std::string(to_string(v.name))},
             {"steps", v.steps},
             {"seeded", v.seeded},
             {"qe_feedback", v.qe_feedback},
             {"samples", v.samples},
             {"target_translators", v.target_translators},
             {"scorers", v.scorers},
             {"generator", v.generator}};
}

void from_json(const Json& j, MethodSpec& v) {
    v.name = parse_method_name(j.at("name").get<std::string>());
    const bool iterative = v.name == MethodName::mtbreaker;
    v.steps = j.value("steps", iterative ? 10 : 0);
    v.seeded = j.value("seeded", v.name == MethodName::seeds || iterative);
    v.qe_feedback = j.value("qe_feedback", false);
    v.samples = j.value("samples", v.name == MethodName::zeroshot_min ? 10 : 1);
    v.target_translators = j.value("target_translators", std::vector<std::string>{});
    v.scorers = j.value("scorers", std::vector<std::string>{});
    v.generator = j.value("generator", std::string());
}

void to_json(Json& j, const Trajectory& v) {
    j = Json{{"method", v.method},
             {"language_pair", v.language_pair},
             {"seed", v.seed ? Json(*v.seed) : Json(nullptr)},
             {"steps", v.steps},
             {"selected", v.selected}};
}

void from_json(const Json& j, Trajectory& v) {
    j.at("method").get_to(v.method);
    j.at("language_pair").get_to(v.language_pair);
    const auto& seed = j.at("seed");
    v.seed = seed.is_null() ? std::nullopt : std::optional<std::string>(seed.get<std::string>());
    j.at("steps").get_to(v.steps);
    j.at("selected").get_to(v.selected);
}

void to_json(Json& j, const SourceAnalysis& v) {
    j = Json{{"grammaticality", v.grammaticality},
             {"naturalness", v.naturalness},
             {"word rarity", v.word_rarity},
             {"syntax complexity", v.syntax_complexity},
             {"topics", v.topics}};
}

void from_json(const Json& j, SourceAnalysis& v) {
    j.at("grammaticality").get_to(v.grammaticality);
    j.at("naturalness").get_to(v.naturalness);
    j.at("word rarity").get_to(v.word_rarity);
    j.at("syntax complexity").get_to(v.syntax_complexity);
    j.at("topics").get_to(v.topics);
}

void to_json(Json& j, const DatasetRecord& v) {
    j = Json{{"source", v.source},
             {"language_pair", v.language_pair},
             {"method", std::string(to_string(v.method))},
             {"seed", v.seed ? Json(*v.seed) : Json(nullptr)},
             {"targets", v.targets}};
    if (v.trajectory_item) j["trajectory_item"] = *v.trajectory_item;
    if (v.analysis) j["analysis"] = *v.analysis;
    if (v.error_modes) j["error_modes"] = *v.error_modes;
}

void from_json(const Json& j, DatasetRecord& v) {
    j.at("source").get_to(v.source);
    j.at("language_pair").get_to(v.language_pair);
    v.method = parse_method_name(j.at("method").get<std::string>());
    const auto& seed = j.at("seed");
    v.seed = seed.is_null() ? std::nullopt : std::optional<std::string>(seed.get<std::string>());
    v.targets = j.value("targets", std::vector<std::string>{});
    v.trajectory_item = j.contains("trajectory_item")
                            ? std::optional<std::size_t>(j["trajectory_item"].get<std::size_t>())
                            : std::nullopt;
    v.analysis = j.contains("analysis") ? std::optional<SourceAnalysis>(j["analysis"].get<SourceAnalysis>())
                                        : std::nullopt;
    v.error_modes = j.contains("error_modes")
                        ? std::optional<std::vector<std::string>>(j["error_modes"].get<std::vector<std::string>>())
                        : std::nullopt;
}

}  // namespace mtb
