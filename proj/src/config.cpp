#include "mtb/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mtb/error.hpp"
#include "mtb/registry.hpp"
#include "mtb/text.hpp"

namespace fs = std::filesystem;

namespace mtb::config {

namespace {

using KeySet = std::set<std::string, std::less<>>;

const KeySet kSections = {"providers", "plan", "outputs", "evaluate", "transfer", "analyze", "history", "report"};

// Keys accepted per object path; paths absent from this table are free-form.
const std::map<std::string, KeySet, std::less<>>& known_keys() {
    static const std::map<std::string, KeySet, std::less<>> table = {
        {"", kSections},
        {"plan",
         {"method", "language_pairs", "seeds", "seeds_file", "seed_length_policy", "concurrency", "retry_budget",
          "history_window", "remote_concurrency"}},
        {"plan.method",
         {"name", "steps", "seeded", "qe_feedback", "samples", "target_translators", "scorers", "generator"}},
        {"outputs", {"dir", "run_id", "cache", "cache_dir"}},
        {"providers.*",
         {"id", "kind", "adapter", "endpoint", "credential_env", "model", "temperature", "timeout_s", "max_retries",
          "backoff_ms", "response_path", "auth_header", "auth_prefix", "options"}},
        {"evaluate", {"runs", "translator", "scorers", "pair", "concurrency"}},
        {"transfer", {"axis", "rows", "columns", "seeds_file", "seeds_pair", "scorers", "concurrency"}},
        {"analyze", {"runs", "analyst", "embedder", "translator", "scorers", "source_scorer"}},
        {"history", {"run"}},
        {"report", {"inputs"}},
    };
    return table;
}

std::vector<std::string> split_dots(std::string_view key) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : key) {
        if (c == '.') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

fs::path Config::resolve(const std::string& p) const {
    fs::path path(p);
    if (path.is_absolute() || dir.empty()) return path;
    return dir / path;
}

const Json& Config::section(std::string_view name) const {
    static const Json empty = Json::object();
    auto it = root.find(std::string(name));
    return it == root.end() ? empty : *it;
}

Config load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Config cfg;
    try {
        cfg.root = Json::parse(ss.str());
    } catch (const Json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!cfg.root.is_object()) throw ConfigError("config '" + path.string() + "' must be a JSON object");
    for (const auto& [k, v] : cfg.root.items()) {
        if (!kSections.count(k)) throw ConfigError("config '" + path.string() + "': unknown section '" + k + "'");
    }
    cfg.dir = path.parent_path();
    return cfg;
}

void apply_override(Json& root, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    auto segments = split_dots(text::trim(assignment.substr(0, eq)));
    for (const auto& s : segments) {
        if (s.empty()) throw ConfigError("override '" + std::string(assignment) + "' has an empty key segment");
    }
    if (!kSections.count(segments.front())) segments.insert(segments.begin(), "plan");

    const std::string raw(assignment.substr(eq + 1));
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    Json* node = &root;
    std::string path;  // pattern used for the key table, provider ids as '*'
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        const auto& table = known_keys();
        auto rule = table.find(path);
        if (rule != table.end() && !rule->second.count(seg)) {
            throw ConfigError("override '" + std::string(assignment) + "': unknown key '" + seg + "'" +
                              (path.empty() ? "" : " under '" + path + "'"));
        }
        const bool last = i + 1 == segments.size();
        if (path == "" && seg == "providers" && !last) {
            // providers.<id>.<field>...
            auto& list = root["providers"];
            const auto& id = segments[++i];
            Json* found = nullptr;
            if (list.is_array()) {
                for (auto& p : list) {
                    if (p.value("id", std::string()) == id) found = &p;
                }
            }
            if (!found) throw ConfigError("override '" + std::string(assignment) + "': no provider '" + id + "'");
            if (i + 1 == segments.size()) {
                *found = value;
                return;
            }
            node = found;
            path = "providers.*";
            continue;
        }
        if (last) {
            (*node)[seg] = value;
            return;
        }
        auto& child = (*node)[seg];
        if (child.is_null()) child = Json::object();
        if (!child.is_object()) {
            throw ConfigError("override '" + std::string(assignment) + "': '" + seg + "' is not an object");
        }
        node = &child;
        path = path.empty() ? seg : path + "." + seg;
    }
}

std::vector<std::string> read_seeds(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read seeds file '" + path.string() + "'");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        out.push_back(line);
    }
    return out;
}

std::vector<ProviderConfig> providers(const Config& cfg) {
    if (!cfg.root.contains("providers")) return {};
    return parse_provider_configs(cfg.root.at("providers"));
}

RunPlan plan(const Config& cfg, const std::optional<fs::path>& seed_file) {
    const auto& p = cfg.section("plan");
    if (!p.contains("method")) throw ConfigError("config has no plan.method");
    RunPlan plan;
    try {
        plan = p.get<RunPlan>();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid plan section: ") + e.what());
    }
    if (seed_file) {
        plan.seeds = read_seeds(*seed_file);
    } else if (p.contains("seeds_file")) {
        plan.seeds = read_seeds(cfg.resolve(p.at("seeds_file").get<std::string>()));
    }
    return plan;
}

}  // namespace mtb::config
