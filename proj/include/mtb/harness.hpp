#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtb/core.hpp"
#include "mtb/metrics.hpp"
#include "mtb/registry.hpp"
#include "mtb/store.hpp"

namespace mtb::harness {

struct ItemScore {
    std::size_t index = 0;  // position in the input record list
    std::optional<ScoreSet> scores;
    std::string error;      // set when the item was excluded
};

struct Evaluation {
    std::vector<ItemScore> items;
    double mean = 0;  // over included items only
    std::size_t included = 0;
    std::size_t excluded = 0;
};

// Translates every record's source with one translator and scores it with
// all scorers. pair overrides the records' own language pair.
Evaluation evaluate_dataset(const ProviderRegistry& registry, const std::vector<DatasetRecord>& records,
                            const std::string& translator, const std::vector<std::string>& scorers,
                            const std::optional<LanguagePair>& pair = {}, std::size_t concurrency = 4);

enum class Axis { model, language };

std::string_view to_string(Axis a);
Axis parse_axis(std::string_view s);

// One evaluation column: a translator, optionally in another language pair.
struct EvalTarget {
    std::string label;
    std::string translator;
    std::optional<LanguagePair> pair;
};

inline constexpr std::string_view kSeedsRow = "Seeds";

struct TransferMatrix {
    Axis axis = Axis::model;
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> cells;  // mean combined QE
    std::vector<std::vector<std::size_t>> counts;
};

// cell(r, c) = evaluate_dataset(datasets[r], column c).mean. A "Seeds" row is
// appended when seeds are given.
TransferMatrix transfer_matrix(const ProviderRegistry& registry, const std::vector<std::string>& rows,
                               const std::map<std::string, std::vector<DatasetRecord>>& datasets,
                               const std::vector<EvalTarget>& columns, const std::vector<std::string>& scorers,
                               Axis axis = Axis::model,
                               const std::optional<std::vector<DatasetRecord>>& seeds = {},
                               std::size_t concurrency = 4);

struct SeriesPoint {
    std::size_t step = 0;
    double mean = 0;
    std::optional<double> lower;  // absent when fewer than 2 values
    std::optional<double> upper;
    std::size_t n = 0;
};

struct DifficultyHistory {
    std::vector<SeriesPoint> cumulative_min;
    std::vector<SeriesPoint> per_step;
};

// Mean over trajectories of the running minimum and of the raw per-step
// score, each with a 90% t-interval.
DifficultyHistory difficulty_history(const std::vector<Trajectory>& trajectories, double level = 0.90);

struct DataQualityReport {
    std::size_t items = 0;
    metrics::DiversityReport diversity;
    std::optional<double> grammaticality;
    std::optional<double> naturalness;
    std::optional<double> word_rarity;
    std::optional<double> syntax_complexity;
    double avg_word_count = 0;
    double avg_word_length = 0;
    std::map<std::string, double> qe;  // scorer id -> mean score
    double qe_combined = 0;            // mean combined score
    std::optional<double> srcqe;
    double coverage = 1.0;             // fraction of items with an analysis
    std::vector<std::string> missing;  // one line per missing analysis
};

struct QualityOptions {
    std::string analyst;        // generator answering the analysis prompts; empty skips missing analyses
    std::string embedder;       // empty: embedding diversity left at 0
    std::string translator;     // target for QE and error-mode analysis
    std::vector<std::string> scorers;
    std::string source_scorer;  // empty: no srcqe row
    int retry_budget = 2;
};

DataQualityReport data_quality_report(const ProviderRegistry& registry, std::vector<DatasetRecord> records,
                                      const QualityOptions& options);

struct ParetoPoint {
    std::string method;
    double diversity = 0;  // mean of the five z-normalized diversity measures
    double qe = 0;
};

std::vector<ParetoPoint> pareto_points(const std::map<std::string, DataQualityReport>& reports);

// Finished records and trajectories from a run log, in item order.
struct LoadedRun {
    std::vector<DatasetRecord> records;
    std::vector<Trajectory> trajectories;
    std::size_t failures = 0;
};

LoadedRun load_run(const std::vector<LogEntry>& log);

void to_json(Json& j, const TransferMatrix& m);
void from_json(const Json& j, TransferMatrix& m);
void to_json(Json& j, const DifficultyHistory& h);
void from_json(const Json& j, DifficultyHistory& h);
void to_json(Json& j, const DataQualityReport& r);
void from_json(const Json& j, DataQualityReport& r);

}  // namespace mtb::harness
