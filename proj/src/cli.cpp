#include "mtb/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "mtb/config.hpp"
#include "mtb/engine.hpp"
#include "mtb/error.hpp"
#include "mtb/harness.hpp"
#include "mtb/registry.hpp"
#include "mtb/report.hpp"
#include "mtb/store.hpp"
#include "mtb/text.hpp"

namespace fs = std::filesystem;

namespace mtb::cli {

namespace {

using Row = report::Row;

constexpr const char* kLogName = "trajectories.jsonl";

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Context {
    config::Config cfg;
    const Invocation& inv;
    std::ostream& out;
    std::ostream& err;

    fs::path out_dir(const std::string& fallback_leaf) const {
        if (inv.out) return *inv.out;
        const auto& o = cfg.section("outputs");
        const fs::path base = cfg.resolve(o.value("dir", std::string("runs")));
        return base / fallback_leaf;
    }

    std::shared_ptr<ResponseCache> cache() const {
        const auto& o = cfg.section("outputs");
        if (!o.value("cache", true)) return nullptr;
        const auto fallback = cfg.resolve(o.value("cache_dir", std::string(".mtb-cache")));
        return std::make_shared<DirectoryCache>(resolve_cache_root(fallback));
    }

    ProviderRegistry registry() const {
        RegistryOptions opts;
        opts.cache = cache();
        opts.remote_concurrency = cfg.section("plan").value("remote_concurrency", std::size_t{8});
        return build_registry(config::providers(cfg), opts);
    }
};

// Accepts [{"label": .., "run": ..}] or {"label": "run", ...}.
std::vector<std::pair<std::string, fs::path>> labeled_runs(const Context& ctx, const Json& j, const char* what) {
    std::vector<std::pair<std::string, fs::path>> out;
    if (j.is_array()) {
        for (const auto& e : j) {
            if (e.is_string()) {
                const fs::path p = ctx.cfg.resolve(e.get<std::string>());
                out.emplace_back(p.filename().string(), p);
            } else {
                out.emplace_back(e.at("label").get<std::string>(), ctx.cfg.resolve(e.at("run").get<std::string>()));
            }
        }
    } else if (j.is_object()) {
        for (const auto& [label, dir] : j.items()) out.emplace_back(label, ctx.cfg.resolve(dir.get<std::string>()));
    }
    if (out.empty()) throw ConfigError(std::string("no runs given for ") + what);
    return out;
}

harness::LoadedRun load_run_dir(const fs::path& dir) {
    const auto log = dir / kLogName;
    if (!fs::exists(log)) throw IoError("run log '" + log.string() + "' does not exist");
    return harness::load_run(read_run_log(log));
}

std::optional<LanguagePair> optional_pair(const Json& j) {
    if (j.is_null()) return std::nullopt;
    auto p = j.get<LanguagePair>();
    p.validate();
    return p;
}

int cmd_generate(Context& ctx) {
    std::optional<fs::path> seed_file;
    if (ctx.inv.seed_file) seed_file = *ctx.inv.seed_file;
    auto plan = config::plan(ctx.cfg, seed_file);
    if (ctx.inv.concurrency) plan.concurrency = *ctx.inv.concurrency;
    const auto providers = config::providers(ctx.cfg);
    plan.validate();
    const auto digest = method_digest(plan);
    const auto run_id = ctx.cfg.section("outputs").value("run_id", digest.substr(0, 12));
    const auto dir = ctx.out_dir(run_id);

    if (ctx.inv.dry_run) {
        Json ids = Json::array();
        for (const auto& p : providers) ids.push_back(p.id);
        const Json resolved = {{"plan", plan},
                               {"method", plan.method.label()},
                               {"method_digest", digest},
                               {"items", plan_items(plan).size()},
                               {"providers", ids},
                               {"run_dir", dir.string()}};
        ctx.out << resolved.dump(2) << "\n";
        return kOk;
    }

    const auto registry = ctx.registry();
    plan.validate(registry);
    const auto started = utc_now();
    RunOptions opts;
    opts.log_path = dir / kLogName;
    opts.resume = ctx.inv.resume;
    opts.limit = ctx.inv.limit;
    const auto result = run_dataset(registry, plan, opts);

    std::string sources;
    for (const auto& r : result.records) {
        std::string line = r.source;
        for (char& c : line) {
            if (c == '\n' || c == '\r') c = ' ';
        }
        sources += line + "\n";
    }
    report::write_file(dir / "sources.txt", sources);

    Json ids = Json::array();
    for (const auto& p : providers) ids.push_back(p.id);
    const auto stats = registry.cache_stats();
    Json failures = Json::array();
    for (const auto& f : result.failures) failures.push_back({{"item", f.item}, {"reason", f.reason}});
    const Json manifest = {{"run_id", run_id},
                           {"method", plan.method.label()},
                           {"method_digest", digest},
                           {"plan", plan},
                           {"providers", ids},
                           {"started_at", started},
                           {"finished_at", utc_now()},
                           {"planned", plan_items(plan).size()},
                           {"succeeded", result.records.size()},
                           {"failed", failures},
                           {"pending", result.skipped},
                           {"cache", {{"hits", stats ? stats->hits.load() : 0}, {"misses", stats ? stats->misses.load() : 0}}}};
    report::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    ctx.out << dir.string() << "\n";
    ctx.err << result.records.size() << " succeeded, " << result.failures.size() << " failed";
    if (result.skipped) ctx.err << ", " << result.skipped << " pending (resume to continue)";
    ctx.err << "\n";
    for (const auto& f : result.failures) ctx.err << "  item " << f.item << ": " << f.reason << "\n";
    return result.records.empty() ? kFailed : kOk;
}

int cmd_evaluate(Context& ctx) {
    const auto& s = ctx.cfg.section("evaluate");
    const auto runs = labeled_runs(ctx, s.value("runs", Json()), "evaluate");
    const auto translator = s.at("translator").get<std::string>();
    const auto scorers = s.at("scorers").get<std::vector<std::string>>();
    const auto pair = optional_pair(s.value("pair", Json()));
    const auto concurrency = ctx.inv.concurrency.value_or(s.value("concurrency", std::size_t{4}));
    const auto dir = ctx.out_dir("evaluate");
    const auto registry = ctx.registry();

    Json summary = Json::array();
    std::size_t included = 0;
    for (const auto& [label, run] : runs) {
        const auto loaded = load_run_dir(run);
        const auto ev = harness::evaluate_dataset(registry, loaded.records, translator, scorers, pair, concurrency);
        report::write_evaluation(dir, label, loaded.records, ev);
        summary.push_back({{"dataset", label}, {"mean", ev.mean}, {"included", ev.included}, {"excluded", ev.excluded}});
        included += ev.included;
        ctx.out << label << ": mean " << report::display(ev.mean) << " over " << ev.included << " items";
        if (ev.excluded) ctx.out << " (" << ev.excluded << " excluded)";
        ctx.out << "\n";
    }
    report::write_file(dir / "evaluation.json", summary.dump(2) + "\n");
    return included ? kOk : kFailed;
}

int cmd_transfer(Context& ctx) {
    const auto& s = ctx.cfg.section("transfer");
    const auto rows = labeled_runs(ctx, s.value("rows", Json()), "transfer rows");
    std::vector<harness::EvalTarget> columns;
    for (const auto& c : s.value("columns", Json::array())) {
        columns.push_back({c.at("label").get<std::string>(), c.at("translator").get<std::string>(),
                           optional_pair(c.value("pair", Json()))});
    }
    const auto scorers = s.at("scorers").get<std::vector<std::string>>();
    const auto axis = harness::parse_axis(s.value("axis", std::string("model")));
    const auto concurrency = ctx.inv.concurrency.value_or(s.value("concurrency", std::size_t{4}));

    std::vector<std::string> labels;
    std::map<std::string, std::vector<DatasetRecord>> datasets;
    for (const auto& [label, run] : rows) {
        labels.push_back(label);
        datasets[label] = load_run_dir(run).records;
    }
    std::optional<std::vector<DatasetRecord>> seeds;
    if (s.contains("seeds_file")) {
        std::optional<LanguagePair> pair = optional_pair(s.value("seeds_pair", Json()));
        if (!pair) {
            const auto& first = datasets.at(labels.front());
            if (first.empty()) throw ConfigError("transfer: cannot infer the seeds language pair");
            pair = first.front().language_pair;
        }
        seeds.emplace();
        for (auto& text : config::read_seeds(ctx.cfg.resolve(s.at("seeds_file").get<std::string>()))) {
            DatasetRecord r;
            r.source = std::move(text);
            r.language_pair = *pair;
            r.method = MethodName::seeds;
            seeds->push_back(std::move(r));
        }
    }
    const auto registry = ctx.registry();
    const auto m = harness::transfer_matrix(registry, labels, datasets, columns, scorers, axis, seeds, concurrency);
    const auto dir = ctx.out_dir("transfer");
    report::write_transfer(dir, m);
    report::write_file(dir / "transfer.json", Json(m).dump(2) + "\n");
    ctx.out << (dir / "transfer.csv").string() << "\n";
    return kOk;
}

int cmd_analyze(Context& ctx) {
    const auto& s = ctx.cfg.section("analyze");
    const auto runs = labeled_runs(ctx, s.value("runs", Json()), "analyze");
    harness::QualityOptions opts;
    opts.analyst = s.value("analyst", std::string());
    opts.embedder = s.value("embedder", std::string());
    opts.translator = s.value("translator", std::string());
    opts.scorers = s.value("scorers", std::vector<std::string>{});
    opts.source_scorer = s.value("source_scorer", std::string());
    const auto registry = ctx.registry();

    std::map<std::string, harness::DataQualityReport> reports;
    for (const auto& [label, run] : runs) {
        reports[label] = harness::data_quality_report(registry, load_run_dir(run).records, opts);
        for (const auto& m : reports[label].missing) ctx.err << label << ": " << m << "\n";
    }
    const auto dir = ctx.out_dir("analyze");
    report::write_quality(dir, reports);
    Json j = Json::object();
    for (const auto& [label, r] : reports) j[label] = r;
    report::write_file(dir / "quality.json", j.dump(2) + "\n");
    if (reports.size() >= 2) report::write_pareto(dir / "pareto.csv", harness::pareto_points(reports));
    ctx.out << (dir / "quality.csv").string() << "\n";
    return kOk;
}

int cmd_history(Context& ctx) {
    const auto& s = ctx.cfg.section("history");
    if (!s.contains("run")) throw ConfigError("history.run is not set");
    const auto loaded = load_run_dir(ctx.cfg.resolve(s.at("run").get<std::string>()));
    if (loaded.trajectories.empty()) throw ValidationError("history: the run has no finished trajectories");
    const auto h = harness::difficulty_history(loaded.trajectories);
    const auto dir = ctx.out_dir("history");
    report::write_history(dir, h);
    report::write_file(dir / "history.json", Json(h).dump(2) + "\n");
    ctx.out << (dir / "history_cummin.csv").string() << "\n";
    return kOk;
}

Json read_json_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read '" + p.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw IntegrityError("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

int cmd_report(Context& ctx) {
    const auto& s = ctx.cfg.section("report");
    std::vector<fs::path> inputs;
    for (const auto& i : s.value("inputs", Json::array())) inputs.push_back(ctx.cfg.resolve(i.get<std::string>()));
    if (inputs.empty()) {
        ctx.err << "report: no inputs configured (report.inputs)\n";
        return kFailed;
    }
    const auto dir = ctx.out_dir("report");
    std::string summary;
    std::size_t rendered = 0;
    for (const auto& in : inputs) {
        const auto name = in.filename().string();
        const auto sub = dir / name;
        if (fs::exists(in / "transfer.json")) {
            const auto m = read_json_file(in / "transfer.json").get<harness::TransferMatrix>();
            report::write_transfer(sub, m);
            Row header{"generated_for"};
            header.insert(header.end(), m.columns.begin(), m.columns.end());
            std::vector<report::Row> rows;
            for (std::size_t r = 0; r < m.rows.size(); ++r) {
                report::Row row{m.rows[r]};
                for (double v : m.cells[r]) row.push_back(report::display(v));
                rows.push_back(std::move(row));
            }
            summary += "Transfer (" + std::string(harness::to_string(m.axis)) + ") from " + name + "\n";
            summary += report::table(header, rows) + "\n";
            ++rendered;
        }
        if (fs::exists(in / "quality.json")) {
            std::map<std::string, harness::DataQualityReport> reports;
            const auto doc = read_json_file(in / "quality.json");
            for (const auto& [label, r] : doc.items()) {
                reports[label] = r.get<harness::DataQualityReport>();
            }
            report::write_quality(sub, reports);
            if (reports.size() >= 2) report::write_pareto(sub / "pareto.csv", harness::pareto_points(reports));
            std::ifstream t(sub / "quality.txt");
            summary += "Data quality from " + name + "\n" + std::string(std::istreambuf_iterator<char>(t), {}) + "\n";
            ++rendered;
        }
        if (fs::exists(in / "history.json")) {
            const auto h = read_json_file(in / "history.json").get<harness::DifficultyHistory>();
            report::write_history(sub, h);
            std::vector<report::Row> rows;
            for (const auto& p : h.cumulative_min) {
                rows.push_back({std::to_string(p.step), report::display(p.mean),
                                p.lower ? report::display(*p.lower) : "", p.upper ? report::display(*p.upper) : ""});
            }
            summary += "Difficulty history (cumulative minimum) from " + name + "\n";
            summary += report::table({"step", "mean", "lo", "hi"}, rows) + "\n";
            ++rendered;
        }
    }
    if (rendered == 0) {
        ctx.err << "report: no transfer.json, quality.json or history.json found in the inputs\n";
        return kFailed;
    }
    report::write_file(dir / "report.txt", summary);
    ctx.out << summary;
    return kOk;
}

}  // namespace

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
    try {
        auto cfg = config::load(inv.config);
        for (const auto& o : inv.overrides) config::apply_override(cfg.root, o);
        Context ctx{std::move(cfg), inv, out, err};
        if (inv.command == "generate") return cmd_generate(ctx);
        if (inv.command == "evaluate") return cmd_evaluate(ctx);
        if (inv.command == "transfer") return cmd_transfer(ctx);
        if (inv.command == "analyze") return cmd_analyze(ctx);
        if (inv.command == "history") return cmd_history(ctx);
        if (inv.command == "report") return cmd_report(ctx);
        err << "unknown command '" << inv.command << "'\n";
        return kInvalid;
    } catch (const ValidationError& e) {
        err << "validation failed:\n";
        for (const auto& d : e.defects()) err << "  - " << d << "\n";
        return kInvalid;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kInvalid;
    } catch (const Json::exception& e) {
        err << "configuration error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailed;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adversarial difficult-to-translate test set generator and evaluation harness", "mtbreaker"};
    app.require_subcommand(1);
    app.fallthrough();

    Invocation inv;
    std::string config;
    std::string out_dir;
    std::string seed_file;
    std::size_t concurrency = 0;
    std::size_t limit = 0;
    app.add_option("-c,--config", config, "Configuration file (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("-o,--out", out_dir, "Output directory");
    app.add_option("--override", inv.overrides, "Dotted key=value override (repeatable)")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_flag("--dry-run", inv.dry_run, "Print the resolved plan and exit without provider calls");
    app.add_flag("--resume", inv.resume, "Continue an interrupted run from its log");
    app.add_option("--concurrency", concurrency, "Concurrent items")->check(CLI::PositiveNumber);
    app.add_option("--seed-file", seed_file, "Seed sources, one per line");
    app.add_option("--limit", limit, "Process at most N pending items")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", inv.verbosity, "More output");

    for (const auto* name : {"generate", "evaluate", "analyze", "transfer", "history", "report"}) {
        app.add_subcommand(name)->callback([&inv, name] { inv.command = name; });
    }
    static const std::map<std::string, std::string> descriptions = {
        {"generate", "Run a generation method over all seeds and language pairs"},
        {"evaluate", "Score finished datasets with a translator and scorers"},
        {"analyze", "Data-quality report (diversity, complexity, quality estimation)"},
        {"transfer", "Model or language transfer matrix"},
        {"history", "Difficulty-history series of an iterative run"},
        {"report", "Render tables and plot data from earlier outputs"}};
    for (auto* sub : app.get_subcommands({})) sub->description(descriptions.at(sub->get_name()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalid;
    }
    inv.config = config;
    if (!out_dir.empty()) inv.out = out_dir;
    if (!seed_file.empty()) inv.seed_file = seed_file;
    if (concurrency) inv.concurrency = concurrency;
    if (limit) inv.limit = limit;
    return execute(inv, out, err);
}

}  // namespace mtb::cli
