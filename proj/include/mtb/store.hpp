#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtb/core.hpp"

namespace mtb {

// Identifies one provider request. The digest covers the canonical request
// (provider id, model name, messages or texts, temperature, nonce).
struct CacheKey {
    std::string provider_id;
    std::string digest;

    // Canonicalization: nlohmann objects serialize with sorted keys and no
    // insignificant whitespace, so the dump is stable across runs.
    static CacheKey for_request(std::string provider_id, const Json& canonical_request);
    std::string str() const { return provider_id + ":" + digest; }
};

class ResponseCache {
public:
    virtual ~ResponseCache() = default;
    virtual std::optional<std::string> get(const CacheKey& key) = 0;
    // Write-once. Re-putting identical bytes is a no-op; different bytes for
    // an existing key throw IntegrityError.
    virtual void put(const CacheKey& key, std::string_view response) = 0;
};

class MemoryCache final : public ResponseCache {
public:
    std::optional<std::string> get(const CacheKey& key) override;
    void put(const CacheKey& key, std::string_view response) override;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string> entries_;
};

// One file per entry under <root>/<d0d1>/<d2d3>/<digest>.entry. Each file is
// a JSON header line followed by the raw response bytes.
class DirectoryCache final : public ResponseCache {
public:
    explicit DirectoryCache(std::filesystem::path root);

    std::optional<std::string> get(const CacheKey& key) override;
    void put(const CacheKey& key, std::string_view response) override;

    std::filesystem::path entry_path(const CacheKey& key) const;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
};

// MTB_CACHE_DIR when set, otherwise the fallback.
std::filesystem::path resolve_cache_root(const std::filesystem::path& fallback);

// ---- run logs --------------------------------------------------------------

inline constexpr int kLogSchema = 1;

// One planned unit of work: a seed (or length donor) paired with a language pair.
struct PlannedItem {
    std::size_t index = 0;
    LanguagePair pair;
    std::size_t seed_index = 0;
    std::string seed;

    std::string seed_digest() const;
};

struct LogEntry {
    enum class Kind { trajectory, failure };
    Kind kind = Kind::trajectory;
    std::size_t item = 0;
    LanguagePair pair;
    std::string seed_digest;
    std::string method_digest;
    std::optional<Trajectory> trajectory;
    std::string reason;
};

Json to_json(const LogEntry& entry);
LogEntry log_entry_from_json(const Json& j);

// Append-only JSONL writer. Appends are serialized and flushed line by line.
class RunLogWriter {
public:
    // truncate=false appends to an existing log.
    RunLogWriter(const std::filesystem::path& path, bool truncate);
    void append(const LogEntry& entry);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
    std::ofstream out_;
};

// Parses a log; a missing file is an empty log. Throws IntegrityError on a
// malformed line, except a truncated final line (a crash mid-write), which is
// ignored.
std::vector<LogEntry> read_run_log(const std::filesystem::path& path);

// Planned items minus those with a completed trajectory in the log, in the
// original order. Throws ConfigError if the log was written for a different
// method.
std::vector<PlannedItem> resume_plan(const std::vector<PlannedItem>& planned,
                                     std::string_view method_digest,
                                     const std::vector<LogEntry>& log);

}  // namespace mtb
