#include "mtb/store.hpp"

#include <atomic>
#include <cstdlib>
#include <set>
#include <sstream>
#include <system_error>
#include <thread>
#include <tuple>

#include <unistd.h>

#include "mtb/digest.hpp"
#include "mtb/error.hpp"

namespace fs = std::filesystem;

namespace mtb {

CacheKey CacheKey::for_request(std::string provider_id, const Json& canonical_request) {
    Json keyed = {{"provider", provider_id}, {"request", canonical_request}};
    return CacheKey{std::move(provider_id), sha256_hex(keyed.dump())};
}

std::optional<std::string> MemoryCache::get(const CacheKey& key) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key.str());
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void MemoryCache::put(const CacheKey& key, std::string_view response) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = entries_.emplace(key.str(), std::string(response));
    if (!inserted && it->second != response) {
        throw IntegrityError("conflicting cache put for key " + key.str());
    }
}

std::size_t MemoryCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

DirectoryCache::DirectoryCache(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw IoError("cannot create cache directory " + root_.string() + ": " + ec.message());
}

fs::path DirectoryCache::entry_path(const CacheKey& key) const {
    if (key.digest.size() < 4) throw PreconditionError("cache digest too short: '" + key.digest + "'");
    return root_ / key.digest.substr(0, 2) / key.digest.substr(2, 2) / (key.digest + ".entry");
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string encode_entry(const CacheKey& key, std::string_view response) {
    Json header = {{"schema", 1},
                   {"provider", key.provider_id},
                   {"digest", key.digest},
                   {"size", response.size()},
                   {"checksum", sha256_hex(response)}};
    std::string out = header.dump();
    out.push_back('\n');
    out.append(response);
    return out;
}

std::string decode_entry(const CacheKey& key, const std::string& bytes) {
    const auto fail = [&](const std::string& why) {
        return IntegrityError("corrupt cache entry " + key.str() + ": " + why);
    };
    auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw fail("missing header");
    Json header = Json::parse(bytes.substr(0, nl), nullptr, false);
    if (header.is_discarded() || !header.is_object()) throw fail("unparseable header");
    std::string body = bytes.substr(nl + 1);
    if (header.value("digest", std::string()) != key.digest ||
        header.value("provider", std::string()) != key.provider_id) {
        throw fail("header does not match key");
    }
    if (header.value("size", std::size_t{0}) != body.size()) throw fail("size mismatch");
    if (header.value("checksum", std::string()) != sha256_hex(body)) throw fail("checksum mismatch");
    return body;
}

std::string unique_suffix() {
    static std::atomic<unsigned long> counter{0};
    std::ostringstream ss;
    ss << ".tmp." << ::getpid() << "." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "."
       << counter++;
    return ss.str();
}

}  // namespace

std::optional<std::string> DirectoryCache::get(const CacheKey& key) {
    const auto path = entry_path(key);
    std::error_code ec;
    if (!fs::exists(path, ec)) {
        if (ec) throw IoError("cache unavailable at " + path.string() + ": " + ec.message());
        return std::nullopt;
    }
    return decode_entry(key, read_file(path));
}

void DirectoryCache::put(const CacheKey& key, std::string_view response) {
    const auto path = entry_path(key);
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());

    const fs::path tmp = path.string() + unique_suffix();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        const auto bytes = encode_entry(key, response);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out.flush()) throw IoError("cannot write " + tmp.string());
    }
    // link() fails if the entry already exists: first writer wins.
    fs::create_hard_link(tmp, path, ec);
    std::error_code ignored;
    fs::remove(tmp, ignored);
    if (!ec) return;
    if (ec != std::errc::file_exists) throw IoError("cannot store " + path.string() + ": " + ec.message());
    if (decode_entry(key, read_file(path)) != response) {
        throw IntegrityError("conflicting cache put for key " + key.str());
    }
}

fs::path resolve_cache_root(const fs::path& fallback) {
    if (const char* env = std::getenv("MTB_CACHE_DIR"); env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    return fallback;
}

// ---- run logs --------------------------------------------------------------

std::string PlannedItem::seed_digest() const { return sha256_hex(seed); }

Json to_json(const LogEntry& e) {
    Json j = {{"schema", kLogSchema},
              {"kind", e.kind == LogEntry::Kind::trajectory ? "trajectory" : "failure"},
              {"item", e.item},
              {"pair", e.pair},
              {"seed_digest", e.seed_digest},
              {"method_digest", e.method_digest}};
    if (e.trajectory) j["trajectory"] = *e.trajectory;
    if (e.kind == LogEntry::Kind::failure) j["reason"] = e.reason;
    return j;
}

LogEntry log_entry_from_json(const Json& j) {
    if (j.at("schema").get<int>() != kLogSchema) {
        throw IntegrityError("unsupported log schema " + j.at("schema").dump());
    }
    LogEntry e;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "trajectory") {
        e.kind = LogEntry::Kind::trajectory;
    } else if (kind == "failure") {
        e.kind = LogEntry::Kind::failure;
    } else {
        throw IntegrityError("unknown log entry kind '" + kind + "'");
    }
    j.at("item").get_to(e.item);
    j.at("pair").get_to(e.pair);
    j.at("seed_digest").get_to(e.seed_digest);
    j.at("method_digest").get_to(e.method_digest);
    if (j.contains("trajectory")) e.trajectory = j["trajectory"].get<Trajectory>();
    e.reason = j.value("reason", std::string());
    return e;
}

RunLogWriter::RunLogWriter(const fs::path& path, bool truncate) : path_(path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (!truncate && fs::exists(path)) {
        // Drop a partial trailing line left behind by an interrupted writer.
        const auto bytes = read_file(path);
        const auto last_nl = bytes.rfind('\n');
        const auto keep = last_nl == std::string::npos ? 0 : last_nl + 1;
        if (keep != bytes.size()) fs::resize_file(path, keep);
    }
    out_.open(path, std::ios::binary | (truncate ? std::ios::trunc : std::ios::app));
    if (!out_) throw IoError("cannot open run log " + path.string());
}

void RunLogWriter::append(const LogEntry& entry) {
    const auto line = to_json(entry).dump() + "\n";
    std::lock_guard lock(mutex_);
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
    if (!out_) throw IoError("cannot append to run log " + path_.string());
}

std::vector<LogEntry> read_run_log(const fs::path& path) {
    std::vector<LogEntry> out;
    if (!fs::exists(path)) return out;
    const auto bytes = read_file(path);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < bytes.size()) {
        auto nl = bytes.find('\n', pos);
        const bool complete = nl != std::string::npos;
        std::string line = bytes.substr(pos, complete ? nl - pos : std::string::npos);
        pos = complete ? nl + 1 : bytes.size();
        ++line_no;
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            if (!complete) break;
            throw IntegrityError("malformed run log line " + std::to_string(line_no) + " in " + path.string());
        }
        out.push_back(log_entry_from_json(j));
    }
    return out;
}

std::vector<PlannedItem> resume_plan(const std::vector<PlannedItem>& planned, std::string_view method_digest,
                                     const std::vector<LogEntry>& log) {
    std::set<std::tuple<std::size_t, LanguagePair, std::string>> done;
    for (const auto& e : log) {
        if (e.method_digest != method_digest) {
            throw ConfigError("run log was written for a different method (digest " + e.method_digest +
                              "); refusing to resume");
        }
        if (e.kind == LogEntry::Kind::trajectory) done.emplace(e.item, e.pair, e.seed_digest);
    }
    std::vector<PlannedItem> remaining;
    for (const auto& item : planned) {
        if (!done.count({item.index, item.pair, item.seed_digest()})) remaining.push_back(item);
    }
    return remaining;
}

}  // namespace mtb
