#include "mtb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "mtb/error.hpp"
#include "mtb/prompts.hpp"
#include "mtb/text.hpp"

namespace mtb::harness {

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t concurrency, Fn&& fn) {
    const std::size_t workers = std::min(std::max<std::size_t>(1, concurrency), n);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    if (workers <= 1) {
        work();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

std::string analysis_reminder() {
    return "Your response could not be parsed. Return only the JSON object in the requested format.";
}

template <typename Parse>
auto ask_json(Generator& gen, const std::string& prompt, int retry_budget, Parse&& parse) {
    Conversation conv{{Role::user, prompt}};
    for (int attempt = 0;; ++attempt) {
        const auto reply = gen.generate(conv, "analysis");
        try {
            return parse(reply);
        } catch (const ParseError&) {
            if (attempt >= retry_budget) throw;
            conv.push_back({Role::assistant, reply.empty() ? std::string("(empty response)") : reply});
            conv.push_back({Role::user, analysis_reminder()});
        }
    }
}

SeriesPoint point(std::size_t step, const std::vector<double>& values, double level) {
    SeriesPoint p;
    p.step = step;
    p.n = values.size();
    if (values.size() >= 2) {
        const auto ci = metrics::mean_ci_t(values, level);
        p.mean = ci.mean;
        p.lower = ci.lower;
        p.upper = ci.upper;
    } else {
        p.mean = metrics::mean(values);
    }
    return p;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_from(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

Evaluation evaluate_dataset(const ProviderRegistry& registry, const std::vector<DatasetRecord>& records,
                            const std::string& translator, const std::vector<std::string>& scorers,
                            const std::optional<LanguagePair>& pair, std::size_t concurrency) {
    if (records.empty()) throw ValidationError("evaluate_dataset: no records");
    if (scorers.empty()) throw ValidationError("evaluate_dataset: no scorers");
    auto& tr = registry.translator(translator);
    std::vector<QualityScorer*> sc;
    for (const auto& s : scorers) sc.push_back(&registry.quality_scorer(s));

    Evaluation ev;
    ev.items.resize(records.size());
    parallel_for(records.size(), concurrency, [&](std::size_t i) {
        auto& item = ev.items[i];
        item.index = i;
        const auto& lp = pair ? *pair : records[i].language_pair;
        try {
            const auto translation = tr.translate(records[i].source, lp);
            std::map<std::string, double> per;
            for (std::size_t k = 0; k < sc.size(); ++k) per[scorers[k]] = sc[k]->score(records[i].source, translation, lp);
            item.scores = combine_scores(std::move(per));
        } catch (const std::exception& e) {
            item.error = e.what();
        }
    });
    metrics::Accumulator acc;
    for (const auto& item : ev.items) {
        if (item.scores) {
            acc.add(item.scores->combined);
            ++ev.included;
        } else {
            ++ev.excluded;
        }
    }
    ev.mean = acc.mean();
    return ev;
}

std::string_view to_string(Axis a) { return a == Axis::model ? "model" : "language"; }

Axis parse_axis(std::string_view s) {
    if (s == "model") return Axis::model;
    if (s == "language") return Axis::language;
    throw ValidationError("unknown transfer axis '" + std::string(s) + "'");
}

TransferMatrix transfer_matrix(const ProviderRegistry& registry, const std::vector<std::string>& rows,
                               const std::map<std::string, std::vector<DatasetRecord>>& datasets,
                               const std::vector<EvalTarget>& columns, const std::vector<std::string>& scorers,
                               Axis axis, const std::optional<std::vector<DatasetRecord>>& seeds,
                               std::size_t concurrency) {
    std::vector<std::string> defects;
    if (rows.size() < 2) defects.emplace_back("transfer matrix needs at least 2 rows");
    if (columns.size() < 2) defects.emplace_back("transfer matrix needs at least 2 columns");
    for (const auto& r : rows) {
        if (!datasets.count(r)) defects.push_back("no dataset for row '" + r + "'");
    }
    if (!defects.empty()) throw ValidationError(std::move(defects));

    TransferMatrix m;
    m.axis = axis;
    m.rows = rows;
    for (const auto& c : columns) m.columns.push_back(c.label);
    std::vector<const std::vector<DatasetRecord>*> sets;
    for (const auto& r : rows) sets.push_back(&datasets.at(r));
    if (seeds) {
        m.rows.emplace_back(kSeedsRow);
        sets.push_back(&*seeds);
    }
    for (std::size_t r = 0; r < sets.size(); ++r) {
        std::vector<double> cells;
        std::vector<std::size_t> counts;
        for (const auto& c : columns) {
            const auto ev = evaluate_dataset(registry, *sets[r], c.translator, scorers, c.pair, concurrency);
            if (ev.included == 0) {
                throw ValidationError("transfer cell (" + m.rows[r] + ", " + c.label + ") has no evaluated items");
            }
            cells.push_back(ev.mean);
            counts.push_back(ev.included);
        }
        m.cells.push_back(std::move(cells));
        m.counts.push_back(std::move(counts));
    }
    return m;
}

DifficultyHistory difficulty_history(const std::vector<Trajectory>& trajectories, double level) {
    if (trajectories.empty()) throw ValidationError("difficulty_history: no trajectories");
    const auto n_steps = trajectories.front().steps.size();
    for (const auto& t : trajectories) {
        if (t.steps.size() != n_steps) {
            throw ValidationError("difficulty_history: trajectories differ in step count (" +
                                  std::to_string(n_steps) + " vs " + std::to_string(t.steps.size()) + ")");
        }
    }
    std::vector<std::vector<double>> cum(n_steps);
    std::vector<std::vector<double>> raw(n_steps);
    for (const auto& t : trajectories) {
        std::optional<double> running;
        for (std::size_t i = 0; i < n_steps; ++i) {
            const auto& s = t.steps[i];
            if (!s.failed) {
                const double v = trajectory_difficulty(s);
                raw[i].push_back(v);
                running = running ? std::min(*running, v) : v;
            }
            if (running) cum[i].push_back(*running);
        }
    }
    DifficultyHistory h;
    for (std::size_t i = 0; i < n_steps; ++i) {
        if (!cum[i].empty()) h.cumulative_min.push_back(point(i, cum[i], level));
        if (!raw[i].empty()) h.per_step.push_back(point(i, raw[i], level));
    }
    return h;
}

DataQualityReport data_quality_report(const ProviderRegistry& registry, std::vector<DatasetRecord> records,
                                      const QualityOptions& options) {
    if (records.empty()) throw ValidationError("data_quality_report: no records");
    DataQualityReport rep;
    rep.items = records.size();

    std::vector<std::string> texts;
    for (const auto& r : records) texts.push_back(r.source);

    // Analyses are produced on demand; failures are listed, not fatal.
    Generator* analyst = options.analyst.empty() ? nullptr : &registry.generator(options.analyst);
    Translator* translator = options.translator.empty() ? nullptr : &registry.translator(options.translator);
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& r = records[i];
        if (!r.analysis && analyst) {
            try {
                r.analysis = ask_json(*analyst, prompts::render_source_analysis(r.source), options.retry_budget,
                                      [](const std::string& s) { return prompts::parse_source_analysis(s); });
            } catch (const std::exception& e) {
                rep.missing.push_back("item " + std::to_string(i) + ": source analysis: " + e.what());
            }
        } else if (!r.analysis) {
            rep.missing.push_back("item " + std::to_string(i) + ": no source analysis");
        }
        if (!r.error_modes && analyst && translator) {
            try {
                const auto tr = translator->translate(r.source, r.language_pair);
                auto em = ask_json(*analyst, prompts::render_target_analysis(r.source, tr), options.retry_budget,
                                   [](const std::string& s) { return prompts::parse_target_analysis(s); });
                r.error_modes = std::move(em.error_modes);
            } catch (const std::exception& e) {
                rep.missing.push_back("item " + std::to_string(i) + ": target analysis: " + e.what());
            }
        }
    }

    // Diversity.
    if (texts.size() >= 2) rep.diversity.chrf = metrics::pairwise_diversity_chrf(texts);
    if (!options.embedder.empty() && texts.size() >= 2) {
        auto& emb = registry.embedder(options.embedder);
        std::vector<std::vector<double>> vecs;
        for (const auto& t : texts) vecs.push_back(emb.embed(t));
        rep.diversity.embd = metrics::pairwise_diversity_embedding(vecs);
    }
    std::vector<std::vector<std::string>> topics;
    std::vector<std::vector<std::string>> errors;
    metrics::Accumulator g, n, w, s;
    std::size_t analysed = 0;
    for (const auto& r : records) {
        if (r.analysis) {
            ++analysed;
            topics.push_back(r.analysis->topics);
            g.add(r.analysis->grammaticality);
            n.add(r.analysis->naturalness);
            w.add(r.analysis->word_rarity);
            s.add(r.analysis->syntax_complexity);
        }
        if (r.error_modes) errors.push_back(*r.error_modes);
    }
    rep.diversity.topics = metrics::unique_count(topics, true);
    rep.diversity.errors = metrics::unique_count(errors, true);
    rep.diversity.words = metrics::vocab_size(texts);
    rep.coverage = static_cast<double>(analysed) / static_cast<double>(records.size());
    if (analysed > 0) {
        rep.grammaticality = g.mean();
        rep.naturalness = n.mean();
        rep.word_rarity = w.mean();
        rep.syntax_complexity = s.mean();
    }

    const auto lengths = metrics::length_stats(texts);
    rep.avg_word_count = lengths.avg_word_count;
    rep.avg_word_length = lengths.avg_word_length;

    // Quality estimation.
    if (translator && !options.scorers.empty()) {
        const auto ev = evaluate_dataset(registry, records, options.translator, options.scorers);
        std::map<std::string, metrics::Accumulator> per;
        for (const auto& item : ev.items) {
            if (!item.scores) continue;
            for (const auto& [sid, v] : item.scores->per_scorer) per[sid].add(v);
        }
        for (const auto& [sid, acc] : per) rep.qe[sid] = acc.mean();
        rep.qe_combined = ev.mean;
    }
    if (!options.source_scorer.empty()) {
        auto& ss = registry.source_scorer(options.source_scorer);
        metrics::Accumulator acc;
        for (const auto& r : records) acc.add(ss.score(r.source, r.language_pair));
        rep.srcqe = acc.mean();
    }
    return rep;
}

std::vector<ParetoPoint> pareto_points(const std::map<std::string, DataQualityReport>& reports) {
    if (reports.size() < 2) throw ValidationError("pareto_points needs at least 2 methods");
    std::vector<std::string> names;
    std::vector<std::vector<double>> measures(5);
    for (const auto& [name, r] : reports) {
        names.push_back(name);
        measures[0].push_back(r.diversity.embd);
        measures[1].push_back(r.diversity.chrf);
        measures[2].push_back(static_cast<double>(r.diversity.topics));
        measures[3].push_back(static_cast<double>(r.diversity.errors));
        measures[4].push_back(static_cast<double>(r.diversity.words));
    }
    std::vector<std::vector<double>> z;
    for (const auto& m : measures) z.push_back(metrics::z_normalize(m));
    std::vector<ParetoPoint> out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        metrics::Accumulator acc;
        for (const auto& col : z) acc.add(col[i]);
        out.push_back(ParetoPoint{names[i], acc.mean(), reports.at(names[i]).qe_combined});
    }
    return out;
}

LoadedRun load_run(const std::vector<LogEntry>& log) {
    std::map<std::size_t, const LogEntry*> latest;
    for (const auto& e : log) latest[e.item] = &e;
    LoadedRun run;
    for (const auto& [item, e] : latest) {
        if (e->kind == LogEntry::Kind::trajectory && e->trajectory) {
            run.records.push_back(make_record(*e->trajectory, item));
            run.trajectories.push_back(*e->trajectory);
        } else {
            ++run.failures;
        }
    }
    return run;
}

// ---- JSON ------------------------------------------------------------------------

void to_json(Json& j, const TransferMatrix& m) {
    j = Json{{"axis", std::string(to_string(m.axis))},
             {"rows", m.rows},
             {"columns", m.columns},
             {"cells", m.cells},
             {"counts", m.counts}};
}

void from_json(const Json& j, TransferMatrix& m) {
    m.axis = parse_axis(j.at("axis").get<std::string>());
    j.at("rows").get_to(m.rows);
    j.at("columns").get_to(m.columns);
    j.at("cells").get_to(m.cells);
    j.at("counts").get_to(m.counts);
}

namespace {

Json series_json(const std::vector<SeriesPoint>& s) {
    Json out = Json::array();
    for (const auto& p : s) {
        out.push_back({{"step", p.step}, {"mean", p.mean}, {"lo", opt(p.lower)}, {"hi", opt(p.upper)}, {"n", p.n}});
    }
    return out;
}

std::vector<SeriesPoint> series_from(const Json& j) {
    std::vector<SeriesPoint> out;
    for (const auto& p : j) {
        out.push_back(SeriesPoint{p.at("step").get<std::size_t>(), p.at("mean").get<double>(), opt_from(p, "lo"),
                                  opt_from(p, "hi"), p.value("n", std::size_t{0})});
    }
    return out;
}

}  // namespace

void to_json(Json& j, const DifficultyHistory& h) {
    j = Json{{"cumulative_min", series_json(h.cumulative_min)}, {"per_step", series_json(h.per_step)}};
}

void from_json(const Json& j, DifficultyHistory& h) {
    h.cumulative_min = series_from(j.at("cumulative_min"));
    h.per_step = series_from(j.at("per_step"));
}

void to_json(Json& j, const DataQualityReport& r) {
    j = Json{{"items", r.items},
             {"diversity",
              {{"embd", r.diversity.embd},
               {"chrf", r.diversity.chrf},
               {"topics", r.diversity.topics},
               {"errors", r.diversity.errors},
               {"words", r.diversity.words}}},
             {"grammaticality", opt(r.grammaticality)},
             {"naturalness", opt(r.naturalness)},
             {"word_rarity", opt(r.word_rarity)},
             {"syntax_complexity", opt(r.syntax_complexity)},
             {"avg_word_count", r.avg_word_count},
             {"avg_word_length", r.avg_word_length},
             {"qe", r.qe},
             {"qe_combined", r.qe_combined},
             {"srcqe", opt(r.srcqe)},
             {"coverage", r.coverage},
             {"missing", r.missing}};
}

void from_json(const Json& j, DataQualityReport& r) {
    r.items = j.at("items").get<std::size_t>();
    const auto& d = j.at("diversity");
    r.diversity.embd = d.at("embd").get<double>();
    r.diversity.chrf = d.at("chrf").get<double>();
    r.diversity.topics = d.at("topics").get<std::size_t>();
    r.diversity.errors = d.at("errors").get<std::size_t>();
    r.diversity.words = d.at("words").get<std::size_t>();
    r.grammaticality = opt_from(j, "grammaticality");
    r.naturalness = opt_from(j, "naturalness");
    r.word_rarity = opt_from(j, "word_rarity");
    r.syntax_complexity = opt_from(j, "syntax_complexity");
    r.avg_word_count = j.at("avg_word_count").get<double>();
    r.avg_word_length = j.at("avg_word_length").get<double>();
    r.qe = j.value("qe", std::map<std::string, double>{});
    r.qe_combined = j.value("qe_combined", 0.0);
    r.srcqe = opt_from(j, "srcqe");
    r.coverage = j.value("coverage", 1.0);
    r.missing = j.value("missing", std::vector<std::string>{});
}

}  // namespace mtb::harness
