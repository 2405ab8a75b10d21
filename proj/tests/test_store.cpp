#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <random>
#include <thread>

#include "mtb/digest.hpp"
#include "mtb/error.hpp"
#include "mtb/store.hpp"
#include "support.hpp"

using namespace mtb;

namespace {

Trajectory tiny_trajectory(const std::string& seed) {
    Trajectory t;
    t.method = fixture::mtbreaker_spec(1);
    t.language_pair = fixture::en_cs();
    t.seed = seed;
    Step s0{0, seed, {{"mt", "X"}}, {{"mt", combine_scores({{"qe", 100}})}}, false, ""};
    Step s1{1, seed + " @@", {{"mt", "X"}}, {{"mt", combine_scores({{"qe", 80}})}}, false, ""};
    t.steps = {s0, s1};
    t.selected = 1;
    return t;
}

LogEntry trajectory_entry(std::size_t item, const std::string& seed, const std::string& method_digest = "m1") {
    LogEntry e;
    e.kind = LogEntry::Kind::trajectory;
    e.item = item;
    e.pair = fixture::en_cs();
    e.seed_digest = sha256_hex(seed);
    e.method_digest = method_digest;
    e.trajectory = tiny_trajectory(seed);
    return e;
}

std::vector<PlannedItem> planned(std::size_t n) {
    std::vector<PlannedItem> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({i, fixture::en_cs(), i, "seed " + std::to_string(i)});
    return out;
}

}  // namespace

TEST(Digest, KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CacheKey, CanonicalRequestIsOrderIndependent) {
    const auto a = CacheKey::for_request("p", Json::parse(R"({"b": 1, "a": [1, 2]})"));
    const auto b = CacheKey::for_request("p", Json::parse(R"({ "a":[1,2], "b":1 })"));
    EXPECT_EQ(a.digest, b.digest);
    EXPECT_NE(a.digest, CacheKey::for_request("q", Json::parse(R"({"a": [1, 2], "b": 1})")).digest);
    EXPECT_NE(a.digest, CacheKey::for_request("p", Json::parse(R"({"a": [2, 1], "b": 1})")).digest);
}

TEST(MemoryCache, WriteOnce) {
    MemoryCache c;
    const auto k = CacheKey::for_request("p", Json{{"x", 1}});
    EXPECT_FALSE(c.get(k));
    c.put(k, "v");
    c.put(k, "v");
    EXPECT_EQ(c.get(k), "v");
    EXPECT_THROW(c.put(k, "w"), IntegrityError);
}

TEST(DirectoryCache, PersistsAcrossInstances) {
    fixture::TempDir dir;
    const auto k = CacheKey::for_request("p", Json{{"x", 1}});
    std::string binary("a\0b\nc", 5);
    {
        DirectoryCache c(dir.path());
        c.put(k, binary);
    }
    DirectoryCache c(dir.path());
    EXPECT_EQ(c.get(k), binary);
    EXPECT_TRUE(std::filesystem::exists(c.entry_path(k)));
    EXPECT_EQ(c.entry_path(k).parent_path().filename().string(), k.digest.substr(2, 2));
    EXPECT_THROW(c.put(k, "other"), IntegrityError);
}

TEST(DirectoryCache, CorruptEntryIsIntegrityError) {
    fixture::TempDir dir;
    DirectoryCache c(dir.path());
    const auto k = CacheKey::for_request("p", Json{{"x", 2}});
    c.put(k, "payload");
    auto bytes = fixture::slurp(c.entry_path(k));
    bytes.back() = 'X';
    std::filesystem::permissions(c.entry_path(k), std::filesystem::perms::owner_write,
                                 std::filesystem::perm_options::add);
    fixture::spit(c.entry_path(k), bytes);
    EXPECT_THROW(c.get(k), IntegrityError);
}

TEST(DirectoryCache, ConcurrentPutsOfSameValue) {
    fixture::TempDir dir;
    DirectoryCache c(dir.path());
    std::vector<std::thread> threads;
    std::atomic<int> errors{0};
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 50; ++i) {
                try {
                    const auto k = CacheKey::for_request("p", Json{{"i", i}});
                    c.put(k, "value " + std::to_string(i));
                } catch (...) {
                    ++errors;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(errors.load(), 0);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(c.get(CacheKey::for_request("p", Json{{"i", i}})), "value " + std::to_string(i));
    // No temporary files are left behind.
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path())) {
        if (e.is_regular_file()) EXPECT_EQ(e.path().extension(), ".entry");
    }
}

TEST(DirectoryCache, EnvironmentOverridesRoot) {
    ::setenv("MTB_CACHE_DIR", "/tmp/elsewhere", 1);
    EXPECT_EQ(resolve_cache_root(".mtb-cache"), "/tmp/elsewhere");
    ::unsetenv("MTB_CACHE_DIR");
    EXPECT_EQ(resolve_cache_root(".mtb-cache"), ".mtb-cache");
}

TEST(RunLog, AppendAndReadBack) {
    fixture::TempDir dir;
    const auto path = dir / "run.jsonl";
    {
        RunLogWriter w(path, true);
        w.append(trajectory_entry(0, "seed 0"));
        LogEntry f;
        f.kind = LogEntry::Kind::failure;
        f.item = 1;
        f.pair = fixture::en_cs();
        f.seed_digest = sha256_hex("seed 1");
        f.method_digest = "m1";
        f.reason = "provider 'x' unavailable";
        w.append(f);
    }
    const auto log = read_run_log(path);
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[0].trajectory, tiny_trajectory("seed 0"));
    EXPECT_EQ(log[1].kind, LogEntry::Kind::failure);
    EXPECT_EQ(log[1].reason, "provider 'x' unavailable");
    EXPECT_FALSE(log[1].trajectory);
}

TEST(RunLog, MissingFileIsEmpty) { EXPECT_TRUE(read_run_log("/nonexistent/run.jsonl").empty()); }

TEST(RunLog, TruncatedFinalLineIsIgnoredAndRepairedOnAppend) {
    fixture::TempDir dir;
    const auto path = dir / "run.jsonl";
    {
        RunLogWriter w(path, true);
        w.append(trajectory_entry(0, "seed 0"));
    }
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << R"({"schema":1,"kind":"traj)";
    }
    EXPECT_EQ(read_run_log(path).size(), 1u);
    {
        RunLogWriter w(path, false);
        w.append(trajectory_entry(1, "seed 1"));
    }
    const auto log = read_run_log(path);
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[1].item, 1u);
}

TEST(RunLog, MalformedMiddleLineIsIntegrityError) {
    fixture::TempDir dir;
    const auto path = dir / "run.jsonl";
    fixture::spit(path, "garbage\n" + to_json(trajectory_entry(0, "s")).dump() + "\n");
    EXPECT_THROW(read_run_log(path), IntegrityError);
}

TEST(RunLog, UnknownSchemaIsIntegrityError) {
    auto j = to_json(trajectory_entry(0, "s"));
    j["schema"] = 99;
    EXPECT_THROW(log_entry_from_json(j), IntegrityError);
}

TEST(ResumePlan, SkipsCompletedItemsOnly) {
    const auto plan = planned(4);
    std::vector<LogEntry> log{trajectory_entry(0, "seed 0"), trajectory_entry(2, "seed 2")};
    LogEntry failure = trajectory_entry(3, "seed 3");
    failure.kind = LogEntry::Kind::failure;
    failure.trajectory.reset();
    log.push_back(failure);
    const auto rest = resume_plan(plan, "m1", log);
    ASSERT_EQ(rest.size(), 2u);
    EXPECT_EQ(rest[0].index, 1u);
    EXPECT_EQ(rest[1].index, 3u);
}

TEST(ResumePlan, ChangedSeedIsRedone) {
    const auto plan = planned(2);
    const auto rest = resume_plan(plan, "m1", {trajectory_entry(0, "a different seed")});
    EXPECT_EQ(rest.size(), 2u);
}

TEST(ResumePlan, DifferentMethodIsConfigError) {
    EXPECT_THROW(resume_plan(planned(2), "m2", {trajectory_entry(0, "seed 0", "m1")}), ConfigError);
}

// Any prefix of a complete log resumes to exactly the missing suffix.
TEST(ResumePlan, PropertyPrefixes) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
        const auto plan = planned(n);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        const auto k = std::uniform_int_distribution<std::size_t>(0, n)(rng);
        std::vector<LogEntry> log;
        std::set<std::size_t> done;
        for (std::size_t i = 0; i < k; ++i) {
            log.push_back(trajectory_entry(order[i], plan[order[i]].seed));
            done.insert(order[i]);
        }
        const auto rest = resume_plan(plan, "m1", log);
        ASSERT_EQ(rest.size(), n - k);
        std::size_t prev = 0;
        for (std::size_t i = 0; i < rest.size(); ++i) {
            EXPECT_FALSE(done.count(rest[i].index));
            if (i > 0) EXPECT_GT(rest[i].index, prev);
            prev = rest[i].index;
        }
    }
}
