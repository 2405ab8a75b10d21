#include "mtb/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "mtb/digest.hpp"
#include "mtb/error.hpp"
#include "mtb/metrics.hpp"
#include "mtb/prompts.hpp"
#include "mtb/text.hpp"

namespace mtb {

namespace {

// Sources longer than this many times the word target are re-asked once.
constexpr int kLengthFactor = 10;

std::string wrap_source(std::string_view s) { return "SOURCE |||" + std::string(s) + "|||"; }

ChatMessage user(std::string content) { return ChatMessage{Role::user, std::move(content)}; }

ChatMessage assistant(std::string content) {
    if (content.empty()) content = "(empty response)";
    return ChatMessage{Role::assistant, std::move(content)};
}

std::string join_nonce(std::string_view base, std::string_view part) {
    if (base.empty()) return std::string(part);
    return std::string(base) + "/" + std::string(part);
}

}  // namespace

std::string_view to_string(SeedLengthPolicy p) {
    return p == SeedLengthPolicy::paired ? "paired" : "corpus_mean";
}

SeedLengthPolicy parse_seed_length_policy(std::string_view s) {
    if (s == "paired") return SeedLengthPolicy::paired;
    if (s == "corpus_mean") return SeedLengthPolicy::corpus_mean;
    throw ValidationError("unknown seed_length_policy '" + std::string(s) + "'");
}

// ---- plan -------------------------------------------------------------------

void RunPlan::validate() const {
    std::vector<std::string> defects;
    try {
        method.validate();
    } catch (const ValidationError& e) {
        defects.insert(defects.end(), e.defects().begin(), e.defects().end());
    }
    if (language_pairs.empty()) defects.emplace_back("no language pairs");
    for (const auto& p : language_pairs) {
        try {
            p.validate();
        } catch (const Error& e) {
            defects.emplace_back(e.what());
        }
    }
    if (seeds.empty()) {
        defects.emplace_back(method.seeded || method.name == MethodName::seeds
                                 ? "seeded method without seeds"
                                 : "no seeds to take source lengths from");
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (text::trim(seeds[i]).empty()) defects.push_back("seed " + std::to_string(i + 1) + " is empty");
        if (seeds[i].find("|||") != std::string::npos) {
            defects.push_back("seed " + std::to_string(i + 1) + " contains '|||'");
        }
    }
    if (concurrency < 1) defects.emplace_back("concurrency must be >= 1");
    if (retry_budget < 0) defects.emplace_back("retry_budget must be >= 0");
    if (history_window < 1) defects.emplace_back("history_window must be >= 1");
    if (!defects.empty()) throw ValidationError(std::move(defects));
}

void RunPlan::validate(const ProviderRegistry& registry) const {
    std::vector<std::string> defects;
    try {
        validate();
    } catch (const ValidationError& e) {
        defects = e.defects();
    }
    const auto need = [&](const std::string& id, ModelKind kind) {
        if (!id.empty() && !registry.has(id, kind)) {
            defects.push_back("no " + std::string(to_string(kind)) + " provider with id '" + id + "'");
        }
    };
    if (method.name != MethodName::seeds) need(method.generator, ModelKind::generator);
    for (const auto& t : method.target_translators) need(t, ModelKind::translator);
    for (const auto& s : method.scorers) need(s, ModelKind::quality_scorer);
    if (!defects.empty()) throw ValidationError(std::move(defects));
}

void to_json(Json& j, const RunPlan& p) {
    j = Json{{"method", p.method},
             {"language_pairs", p.language_pairs},
             {"seeds", p.seeds},
             {"seed_length_policy", std::string(to_string(p.seed_length_policy))},
             {"concurrency", p.concurrency},
             {"retry_budget", p.retry_budget},
             {"history_window", p.history_window}};
}

void from_json(const Json& j, RunPlan& p) {
    RunPlan d;
    j.at("method").get_to(p.method);
    p.language_pairs = j.value("language_pairs", std::vector<LanguagePair>{});
    p.seeds = j.value("seeds", std::vector<std::string>{});
    p.seed_length_policy = parse_seed_length_policy(j.value("seed_length_policy", std::string("paired")));
    p.concurrency = j.value("concurrency", d.concurrency);
    p.retry_budget = j.value("retry_budget", d.retry_budget);
    p.history_window = j.value("history_window", d.history_window);
}

std::vector<PlannedItem> plan_items(const RunPlan& plan) {
    std::vector<PlannedItem> items;
    for (const auto& pair : plan.language_pairs) {
        for (std::size_t s = 0; s < plan.seeds.size(); ++s) {
            items.push_back(PlannedItem{items.size(), pair, s, plan.seeds[s]});
        }
    }
    return items;
}

std::string method_digest(const RunPlan& plan) {
    const Json j = {{"method", plan.method},
                    {"seed_length_policy", std::string(to_string(plan.seed_length_policy))},
                    {"history_window", plan.history_window}};
    return sha256_hex(j.dump());
}

int seed_length_for(const RunPlan& plan, const PlannedItem& item) {
    if (plan.seed_length_policy == SeedLengthPolicy::paired) {
        return std::max<int>(1, static_cast<int>(text::word_count(item.seed)));
    }
    metrics::Accumulator acc;
    for (const auto& s : plan.seeds) acc.add(static_cast<double>(text::word_count(s)));
    return std::max(1, static_cast<int>(std::floor(acc.mean() + 0.5)));
}

// ---- engine -------------------------------------------------------------------

Engine::Engine(const ProviderRegistry& registry, int retry_budget)
    : registry_(registry), retry_budget_(retry_budget) {}

Step Engine::evaluate(std::size_t index, std::string source, const MethodSpec& spec, const LanguagePair& pair) {
    Step step;
    step.index = index;
    step.source = std::move(source);
    for (const auto& tid : spec.target_translators) {
        step.translations[tid] = registry_.translator(tid).translate(step.source, pair);
    }
    try {
        for (const auto& tid : spec.target_translators) {
            const auto& translation = step.translations[tid];
            if (text::trim(translation).empty()) throw ParseError("translator '" + tid + "' returned an empty text");
            std::map<std::string, double> per_scorer;
            for (const auto& sid : spec.scorers) {
                per_scorer[sid] = registry_.quality_scorer(sid).score(step.source, translation, pair);
            }
            step.scores[tid] = combine_scores(std::move(per_scorer));
        }
    } catch (const ParseError& e) {
        step.scores.clear();
        step.failed = true;
        step.failure = std::string("scoring failed: ") + e.what();
    }
    return step;
}

Engine::Reply Engine::ask(Generator& generator, const Conversation& conversation, int seed_length,
                          std::string_view nonce) {
    Conversation scratch = conversation;
    int parse_retries = 0;
    bool length_reasked = false;
    const std::size_t max_words = static_cast<std::size_t>(kLengthFactor) * static_cast<std::size_t>(seed_length);
    while (true) {
        Reply r;
        r.raw = generator.generate(scratch, nonce);
        std::string source;
        try {
            source = prompts::parse_source(r.raw);
        } catch (const ParseError& e) {
            if (parse_retries >= retry_budget_) {
                r.failure = std::string(e.what()) + " after " + std::to_string(parse_retries) + " re-asks";
                return r;
            }
            ++parse_retries;
            scratch.push_back(assistant(r.raw));
            scratch.push_back(user(prompts::source_reminder()));
            continue;
        }
        if (text::word_count(source) > max_words) {
            if (length_reasked) {
                r.failure = "source exceeds " + std::to_string(max_words) + " words";
                return r;
            }
            length_reasked = true;
            scratch.push_back(assistant(r.raw));
            scratch.push_back(user(prompts::length_reminder(seed_length)));
            continue;
        }
        r.source = std::move(source);
        return r;
    }
}

Trajectory Engine::finish(const MethodSpec& spec, const LanguagePair& pair, std::optional<std::string> seed,
                          std::vector<Step> steps) {
    Trajectory t;
    t.method = spec;
    t.language_pair = pair;
    t.seed = std::move(seed);
    t.steps = std::move(steps);
    auto sel = select_step(t.steps);
    if (!sel) {
        std::string reason = "every step failed";
        if (!t.steps.empty() && !t.steps.back().failure.empty()) reason += ": " + t.steps.back().failure;
        throw ParseError(reason);
    }
    t.selected = *sel;
    return t;
}

Trajectory Engine::run_seeds(const std::string& seed, const MethodSpec& spec, const LanguagePair& pair) {
    if (spec.name != MethodName::seeds) throw PreconditionError("run_seeds needs method 'seeds'");
    std::vector<Step> steps;
    steps.push_back(evaluate(0, seed, spec, pair));
    return finish(spec, pair, seed, std::move(steps));
}

Trajectory Engine::run_mtbreaker(const std::optional<std::string>& seed, const MethodSpec& spec,
                                 const LanguagePair& pair, int seed_length, std::string_view nonce) {
    if (spec.name != MethodName::mtbreaker) throw PreconditionError("run_mtbreaker needs method 'mtbreaker'");
    if (spec.seeded && (!seed || text::trim(*seed).empty())) {
        throw PreconditionError("seeded mtbreaker needs a non-empty seed");
    }
    if (seed && seed->find("|||") != std::string::npos) throw ValidationError("seed contains '|||'");
    if (spec.seeded) seed_length = std::max(1, static_cast<int>(text::word_count(*seed)));
    if (seed_length < 1) throw PreconditionError("seed_length must be >= 1");

    Generator& generator = registry_.generator(spec.generator);
    Conversation conv;
    conv.push_back(user(prompts::render_initial(pair, seed_length)));

    std::string current;
    if (spec.seeded) {
        current = text::trim(*seed);
        conv.push_back(assistant(wrap_source(current)));
    } else {
        auto r = ask(generator, conv, seed_length, join_nonce(nonce, "step:0"));
        if (!r.source) throw ParseError("initial generation failed: " + r.failure);
        current = *r.source;
        conv.push_back(assistant(r.raw));
    }

    std::vector<Step> steps;
    steps.push_back(evaluate(0, current, spec, pair));
    std::optional<double> best;
    const auto note_best = [&](const Step& s) {
        if (s.failed) return;
        const double v = trajectory_difficulty(s);
        if (!best || v < *best) best = v;
    };
    note_best(steps.back());

    for (int i = 1; i <= spec.steps; ++i) {
        const Step& prev = steps.back();
        std::vector<std::pair<std::string, std::string>> shown;
        for (const auto& tid : spec.target_translators) shown.emplace_back(tid, prev.translations.at(tid));
        const bool with_qe = spec.qe_feedback && best.has_value();
        conv.push_back(user(prompts::render_followup(shown, with_qe ? best : std::nullopt, with_qe)));

        auto r = ask(generator, conv, seed_length, join_nonce(nonce, "step:" + std::to_string(i)));
        const auto index = static_cast<std::size_t>(i);
        if (r.source) {
            conv.push_back(assistant(r.raw));
            steps.push_back(evaluate(index, *r.source, spec, pair));
        } else {
            conv.push_back(assistant(wrap_source(prev.source)));
            Step carried;
            carried.index = index;
            carried.source = prev.source;
            carried.translations = prev.translations;
            carried.failed = true;
            carried.failure = "generation failed: " + r.failure;
            steps.push_back(std::move(carried));
        }
        note_best(steps.back());
    }
    return finish(spec, pair, spec.seeded ? seed : std::nullopt, std::move(steps));
}

Trajectory Engine::single_shot(const MethodSpec& spec, const LanguagePair& pair, Conversation conversation,
                               int seed_length, std::string_view nonce) {
    Generator& generator = registry_.generator(spec.generator);
    auto r = ask(generator, conversation, seed_length, nonce);
    if (!r.source) throw ParseError("generation failed: " + r.failure);
    std::vector<Step> steps;
    steps.push_back(evaluate(0, *r.source, spec, pair));
    return finish(spec, pair, std::nullopt, std::move(steps));
}

Trajectory Engine::run_zeroshot(const MethodSpec& spec, const LanguagePair& pair, int seed_length,
                                std::string_view nonce) {
    if (spec.name != MethodName::zeroshot) throw PreconditionError("run_zeroshot needs method 'zeroshot'");
    return single_shot(spec, pair, {user(prompts::render_initial(pair, seed_length))}, seed_length, nonce);
}

Trajectory Engine::run_zeroshot_history(const MethodSpec& spec, const LanguagePair& pair,
                                        const std::vector<std::string>& history, int seed_length,
                                        std::string_view nonce) {
    if (spec.name != MethodName::zeroshot_history) {
        throw PreconditionError("run_zeroshot_history needs method 'zeroshot_history'");
    }
    const auto initial = prompts::render_initial(pair, seed_length);
    Conversation conv;
    for (const auto& h : history) {
        conv.push_back(user(initial));
        conv.push_back(assistant(wrap_source(h)));
    }
    conv.push_back(user(initial));
    return single_shot(spec, pair, std::move(conv), seed_length, nonce);
}

Trajectory Engine::run_zeroshot_min(const MethodSpec& spec, const LanguagePair& pair, int seed_length,
                                    std::string_view nonce) {
    if (spec.name != MethodName::zeroshot_min) throw PreconditionError("run_zeroshot_min needs method 'zeroshot_min'");
    Generator& generator = registry_.generator(spec.generator);
    const Conversation conv{user(prompts::render_initial(pair, seed_length))};
    std::vector<Step> steps;
    for (int k = 0; k < spec.samples; ++k) {
        const auto index = static_cast<std::size_t>(k);
        auto r = ask(generator, conv, seed_length, join_nonce(nonce, "sample:" + std::to_string(k)));
        if (r.source) {
            steps.push_back(evaluate(index, *r.source, spec, pair));
        } else {
            Step failed;
            failed.index = index;
            failed.failed = true;
            failed.failure = "generation failed: " + r.failure;
            steps.push_back(std::move(failed));
        }
    }
    return finish(spec, pair, std::nullopt, std::move(steps));
}

// ---- dataset ----------------------------------------------------------------------

namespace {

LogEntry entry_for(const PlannedItem& item, const std::string& digest) {
    LogEntry e;
    e.item = item.index;
    e.pair = item.pair;
    e.seed_digest = item.seed_digest();
    e.method_digest = digest;
    return e;
}

// Collects finished items and writes them to the log strictly in order.
class OrderedCommitter {
public:
    OrderedCommitter(std::size_t n, RunLogWriter* writer) : slots_(n), writer_(writer) {}

    void complete(std::size_t position, LogEntry entry) {
        std::lock_guard lock(mutex_);
        slots_[position] = std::move(entry);
        while (next_ < slots_.size() && slots_[next_]) {
            if (writer_) writer_->append(*slots_[next_]);
            ++next_;
        }
    }

    std::vector<LogEntry> take() {
        std::vector<LogEntry> out;
        for (auto& s : slots_) {
            if (s) out.push_back(std::move(*s));
        }
        return out;
    }

private:
    std::mutex mutex_;
    std::vector<std::optional<LogEntry>> slots_;
    std::size_t next_ = 0;
    RunLogWriter* writer_;
};

}  // namespace

RunResult run_dataset(const ProviderRegistry& registry, const RunPlan& plan, const RunOptions& options) {
    plan.validate(registry);
    const auto digest = method_digest(plan);
    const auto planned = plan_items(plan);

    std::vector<LogEntry> previous;
    if (options.resume && options.log_path) previous = read_run_log(*options.log_path);
    auto pending = resume_plan(planned, digest, previous);
    std::size_t skipped = 0;
    if (options.limit && pending.size() > *options.limit) {
        skipped = pending.size() - *options.limit;
        pending.resize(*options.limit);
    }

    std::optional<RunLogWriter> writer;
    if (options.log_path) writer.emplace(*options.log_path, !options.resume);
    OrderedCommitter committer(pending.size(), writer ? &*writer : nullptr);

    Engine engine(registry, plan.retry_budget);
    const auto& spec = plan.method;

    // Per-pair history for zeroshot_history, restored from earlier runs.
    std::map<LanguagePair, std::vector<std::string>> history;
    if (spec.name == MethodName::zeroshot_history) {
        std::map<std::size_t, std::pair<LanguagePair, std::string>> done;
        for (const auto& e : previous) {
            if (e.trajectory) done[e.item] = {e.pair, e.trajectory->selected_step().source};
        }
        for (const auto& [item, ps] : done) history[ps.first].push_back(ps.second);
    }

    const auto run_one = [&](const PlannedItem& item) -> LogEntry {
        auto entry = entry_for(item, digest);
        const auto nonce = "item:" + std::to_string(item.index);
        const int length = seed_length_for(plan, item);
        try {
            Trajectory t;
            switch (spec.name) {
                case MethodName::seeds:
                    t = engine.run_seeds(item.seed, spec, item.pair);
                    break;
                case MethodName::mtbreaker:
                    t = engine.run_mtbreaker(spec.seeded ? std::optional<std::string>(item.seed) : std::nullopt, spec,
                                             item.pair, length, nonce);
                    break;
                case MethodName::zeroshot:
                    t = engine.run_zeroshot(spec, item.pair, length, nonce);
                    break;
                case MethodName::zeroshot_min:
                    t = engine.run_zeroshot_min(spec, item.pair, length, nonce);
                    break;
                case MethodName::zeroshot_history: {
                    auto& h = history[item.pair];
                    const auto from = h.size() > plan.history_window ? h.size() - plan.history_window : 0;
                    const std::vector<std::string> window(h.begin() + static_cast<std::ptrdiff_t>(from), h.end());
                    t = engine.run_zeroshot_history(spec, item.pair, window, length, nonce);
                    h.push_back(t.selected_step().source);
                    break;
                }
            }
            entry.kind = LogEntry::Kind::trajectory;
            entry.trajectory = std::move(t);
        } catch (const std::exception& e) {
            entry.kind = LogEntry::Kind::failure;
            entry.reason = e.what();
        }
        return entry;
    };

    const bool sequential = spec.name == MethodName::zeroshot_history;
    const std::size_t workers = sequential ? 1 : std::min(plan.concurrency, std::max<std::size_t>(1, pending.size()));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t pos = next++; pos < pending.size(); pos = next++) {
            committer.complete(pos, run_one(pending[pos]));
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Latest entry per item: earlier runs first, then this one.
    std::map<std::size_t, LogEntry> latest;
    for (auto& e : previous) latest[e.item] = std::move(e);
    for (auto& e : committer.take()) latest[e.item] = std::move(e);

    RunResult result;
    result.skipped = skipped;
    for (const auto& item : planned) {
        auto it = latest.find(item.index);
        if (it == latest.end()) continue;
        const auto& e = it->second;
        if (e.kind == LogEntry::Kind::trajectory && e.trajectory) {
            result.records.push_back(make_record(*e.trajectory, item.index));
            result.trajectories.push_back(*e.trajectory);
            result.items.push_back(item.index);
        } else {
            result.failures.push_back(ItemFailure{item.index, e.reason});
        }
    }
    return result;
}

}  // namespace mtb
