#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtb/core.hpp"
#include "mtb/engine.hpp"
#include "mtb/providers.hpp"

namespace mtb::config {

// One JSON document with sections providers, plan, outputs, evaluate,
// transfer, analyze, history and report. Relative paths resolve against the
// directory holding the file.
struct Config {
    Json root = Json::object();
    std::filesystem::path dir;

    std::filesystem::path resolve(const std::string& p) const;
    const Json& section(std::string_view name) const;
};

Config load(const std::filesystem::path& path);

// Applies "a.b.c=value". The value is parsed as JSON when possible, else
// taken as a string. A first segment that is not a section name resolves
// under "plan" ("method.steps=1" is "plan.method.steps=1"); providers are
// addressed by id ("providers.gen.temperature=0.7"). Unknown keys throw
// ConfigError.
void apply_override(Json& root, std::string_view assignment);

// UTF-8, one source per line; blank lines are skipped. A missing file throws
// IoError naming the path.
std::vector<std::string> read_seeds(const std::filesystem::path& path);

std::vector<ProviderConfig> providers(const Config& cfg);

// The plan section with seeds loaded from plan.seeds or plan.seeds_file,
// unless seed_file is given.
RunPlan plan(const Config& cfg, const std::optional<std::filesystem::path>& seed_file = {});

}  // namespace mtb::config
