#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mtb {

using Json = nlohmann::json;

// Human-readable language names, used verbatim in prompts ("a text in English").
struct LanguagePair {
    std::string source_lang;
    std::string target_lang;

    void validate() const;
    // "English-Czech"; used as a label in reports and log keys.
    std::string label() const { return source_lang + "-" + target_lang; }

    friend bool operator==(const LanguagePair&, const LanguagePair&) = default;
    friend auto operator<=>(const LanguagePair&, const LanguagePair&) = default;
};

enum class ModelKind { translator, generator, quality_scorer, source_scorer, embedder };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view s);

struct ModelRef {
    std::string id;
    ModelKind kind = ModelKind::translator;
    std::string adapter;
};

// Quality-estimation scores on the 0 (worst) .. 100 (perfect) scale.
struct ScoreSet {
    std::map<std::string, double> per_scorer;
    double combined = 0.0;

    friend bool operator==(const ScoreSet&, const ScoreSet&) = default;
};

// Mean of the per-scorer values. Throws ConfigError on an empty map and
// ValidationError naming the scorer when a value lies outside [0, 100].
ScoreSet combine_scores(std::map<std::string, double> per_scorer);

struct Step {
    std::size_t index = 0;
    std::string source;
    std::map<std::string, std::string> translations;  // translator id -> text
    std::map<std::string, ScoreSet> scores;           // translator id -> scores
    bool failed = false;
    std::string failure;  // reason, empty unless failed

    friend bool operator==(const Step&, const Step&) = default;
};

// Mean combined score across every translator of a non-failed step.
// Throws PreconditionError on a failed step.
double trajectory_difficulty(const Step& step);

enum class MethodName { seeds, zeroshot, zeroshot_history, zeroshot_min, mtbreaker };

std::string_view to_string(MethodName name);
MethodName parse_method_name(std::string_view s);

struct MethodSpec {
    MethodName name = MethodName::mtbreaker;
    int steps = 10;
    bool seeded = true;
    bool qe_feedback = false;
    int samples = 1;
    std::vector<std::string> target_translators;
    std::vector<std::string> scorers;
    std::string generator;

    // Throws ValidationError listing every violated invariant.
    void validate() const;
    bool multi_target() const { return target_translators.size() > 1; }
    // "mtbreaker(seeded+qe)", "zeroshot_min", ...
    std::string label() const;

    friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

// Index of the non-failed step with the lowest difficulty, smallest index on
// ties. Returns nullopt when every step failed.
std::optional<std::size_t> select_step(const std::vector<Step>& steps);

struct Trajectory {
    MethodSpec method;
    LanguagePair language_pair;
    std::optional<std::string> seed;
    std::vector<Step> steps;
    std::size_t selected = 0;

    const Step& selected_step() const { return steps.at(selected); }
    void validate() const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct SourceAnalysis {
    double grammaticality = 0;
    double naturalness = 0;
    double word_rarity = 0;
    double syntax_complexity = 0;
    std::vector<std::string> topics;

    void validate() const;
    friend bool operator==(const SourceAnalysis&, const SourceAnalysis&) = default;
};

struct ErrorModeReport {
    std::vector<std::string> error_modes;
    friend bool operator==(const ErrorModeReport&, const ErrorModeReport&) = default;
};

struct DatasetRecord {
    std::string source;
    LanguagePair language_pair;
    MethodName method = MethodName::seeds;
    std::optional<std::string> seed;
    std::vector<std::string> targets;
    std::optional<std::size_t> trajectory_item;  // item index in the run log
    std::optional<SourceAnalysis> analysis;
    std::optional<std::vector<std::string>> error_modes;

    void validate() const;
    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

// Builds the finished dataset item from a trajectory's selected step.
DatasetRecord make_record(const Trajectory& trajectory, std::optional<std::size_t> item = {});

// JSON mapping. Field names of Trajectory are fixed:
// method, language_pair, seed, steps, selected.
void to_json(Json& j, const LanguagePair& v);
void from_json(const Json& j, LanguagePair& v);
void to_json(Json& j, const ScoreSet& v);
void from_json(const Json& j, ScoreSet& v);
void to_json(Json& j, const Step& v);
void from_json(const Json& j, Step& v);
void to_json(Json& j, const MethodSpec& v);
void from_json(const Json& j, MethodSpec& v);
void to_json(Json& j, const Trajectory& v);
void from_json(const Json& j, Trajectory& v);
void to_json(Json& j, const SourceAnalysis& v);
void from_json(const Json& j, SourceAnalysis& v);
void to_json(Json& j, const DatasetRecord& v);
void from_json(const Json& j, DatasetRecord& v);

}  // namespace mtb
