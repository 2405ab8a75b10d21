#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtb/core.hpp"
#include "mtb/providers.hpp"
#include "mtb/registry.hpp"
#include "mtb/store.hpp"

namespace mtb {

enum class SeedLengthPolicy { paired, corpus_mean };

std::string_view to_string(SeedLengthPolicy p);
SeedLengthPolicy parse_seed_length_policy(std::string_view s);

struct RunPlan {
    MethodSpec method;
    std::vector<LanguagePair> language_pairs;
    // Starting points for seeded methods, length donors for seedless ones.
    std::vector<std::string> seeds;
    SeedLengthPolicy seed_length_policy = SeedLengthPolicy::paired;
    std::size_t concurrency = 4;
    int retry_budget = 2;
    std::size_t history_window = 50;

    // Throws ValidationError listing every defect.
    void validate() const;
    // Also checks that every referenced provider id exists with the right kind.
    void validate(const ProviderRegistry& registry) const;
};

void to_json(Json& j, const RunPlan& p);
void from_json(const Json& j, RunPlan& p);

struct ItemFailure {
    std::size_t item = 0;
    std::string reason;
};

struct RunResult {
    std::vector<DatasetRecord> records;
    std::vector<Trajectory> trajectories;
    std::vector<std::size_t> items;  // item index of each trajectory
    std::vector<ItemFailure> failures;
    std::size_t skipped = 0;  // planned items left for a later --resume
};

// Items are the cross product language pair x seed, pair-major.
std::vector<PlannedItem> plan_items(const RunPlan& plan);

// Digest of everything that changes what a trajectory means; a log written
// under another digest cannot be resumed.
std::string method_digest(const RunPlan& plan);

// Word target handed to the initial prompt for this item.
int seed_length_for(const RunPlan& plan, const PlannedItem& item);

// Runs single trajectories against the providers of a registry.
class Engine {
public:
    explicit Engine(const ProviderRegistry& registry, int retry_budget = 2);

    Trajectory run_seeds(const std::string& seed, const MethodSpec& spec, const LanguagePair& pair);

    // seed is required when spec.seeded; seed_length drives the initial
    // prompt and the length guard.
    Trajectory run_mtbreaker(const std::optional<std::string>& seed, const MethodSpec& spec,
                             const LanguagePair& pair, int seed_length, std::string_view nonce = {});

    Trajectory run_zeroshot(const MethodSpec& spec, const LanguagePair& pair, int seed_length,
                            std::string_view nonce = {});

    // history: previously generated sources, oldest first; all of it is shown.
    Trajectory run_zeroshot_history(const MethodSpec& spec, const LanguagePair& pair,
                                    const std::vector<std::string>& history, int seed_length,
                                    std::string_view nonce = {});

    Trajectory run_zeroshot_min(const MethodSpec& spec, const LanguagePair& pair, int seed_length,
                                std::string_view nonce = {});

    // Translates and scores one candidate with every target and scorer.
    Step evaluate(std::size_t index, std::string source, const MethodSpec& spec, const LanguagePair& pair);

private:
    struct Reply {
        std::optional<std::string> source;
        std::string raw;
        std::string failure;
    };

    // Generates and parses a source, re-asking on a scratch copy of the
    // conversation. Never throws ParseError; failures land in Reply::failure.
    Reply ask(Generator& generator, const Conversation& conversation, int seed_length, std::string_view nonce);

    Trajectory single_shot(const MethodSpec& spec, const LanguagePair& pair, Conversation conversation,
                           int seed_length, std::string_view nonce);
    Trajectory finish(const MethodSpec& spec, const LanguagePair& pair, std::optional<std::string> seed,
                      std::vector<Step> steps);

    const ProviderRegistry& registry_;
    int retry_budget_;
};

struct RunOptions {
    std::optional<std::filesystem::path> log_path;
    bool resume = false;
    std::optional<std::size_t> limit;  // process at most this many pending items
};

// Executes a plan over all items. Items run concurrently except for
// zeroshot_history; log lines are committed in item order.
RunResult run_dataset(const ProviderRegistry& registry, const RunPlan& plan, const RunOptions& options = {});

}  // namespace mtb
