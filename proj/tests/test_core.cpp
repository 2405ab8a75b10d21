#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mtb/core.hpp"
#include "mtb/error.hpp"
#include "support.hpp"

using namespace mtb;

namespace {

Step scored_step(std::size_t index, std::map<std::string, double> combined_by_translator) {
    Step s;
    s.index = index;
    s.source = "s" + std::to_string(index);
    for (const auto& [tid, v] : combined_by_translator) {
        s.translations[tid] = "t";
        s.scores[tid] = combine_scores({{"q", v}});
    }
    return s;
}

}  // namespace

TEST(CombineScores, Examples) {
    EXPECT_DOUBLE_EQ(combine_scores({{"a", 100}, {"b", 100}}).combined, 100);
    EXPECT_DOUBLE_EQ(combine_scores({{"a", 80}, {"b", 60}}).combined, 70);
    const auto single = combine_scores({{"a", 70.8}});
    EXPECT_DOUBLE_EQ(single.combined, 70.8);
    EXPECT_EQ(single.per_scorer.at("a"), 70.8);
}

TEST(CombineScores, EmptyIsConfigError) { EXPECT_THROW(combine_scores({}), ConfigError); }

TEST(CombineScores, OutOfRangeNamesScorer) {
    try {
        combine_scores({{"good", 50}, {"metricx", 101}});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("metricx"), std::string::npos);
    }
    EXPECT_THROW(combine_scores({{"a", -0.1}}), ValidationError);
    EXPECT_THROW(combine_scores({{"a", std::nan("")}}), ValidationError);
}

TEST(CombineScores, PropertyMeanWithinRange) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> v(0, 100);
    std::uniform_int_distribution<int> n(1, 6);
    for (int trial = 0; trial < 2000; ++trial) {
        std::map<std::string, double> m;
        const int k = n(rng);
        // Equal values stress rounding at the bounds.
        const double shared = v(rng);
        const bool equal = trial % 3 == 0;
        for (int i = 0; i < k; ++i) m["s" + std::to_string(i)] = equal ? shared : v(rng);
        const auto s = combine_scores(m);
        double lo = 100, hi = 0, sum = 0;
        for (const auto& [id, x] : m) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            sum += x;
        }
        EXPECT_LE(lo, s.combined);
        EXPECT_LE(s.combined, hi);
        EXPECT_NEAR(s.combined, sum / k, 1e-9);
        EXPECT_EQ(s.per_scorer, m);
    }
}

TEST(TrajectoryDifficulty, Examples) {
    EXPECT_DOUBLE_EQ(trajectory_difficulty(scored_step(0, {{"t", 40}})), 40);
    EXPECT_DOUBLE_EQ(trajectory_difficulty(scored_step(0, {{"a", 55}, {"b", 65}})), 60);
    EXPECT_NEAR(trajectory_difficulty(scored_step(0, {{"a", 35.92}, {"b", 42.36}, {"c", 42.97}, {"d", 39.79}})),
                40.26, 1e-9);
}

TEST(TrajectoryDifficulty, FailedStepIsMisuse) {
    auto s = scored_step(0, {{"t", 40}});
    s.failed = true;
    EXPECT_THROW(trajectory_difficulty(s), PreconditionError);
}

TEST(MethodSpec, Invariants) {
    auto m = fixture::mtbreaker_spec(10);
    EXPECT_NO_THROW(m.validate());
    m.steps = 0;
    EXPECT_THROW(m.validate(), ValidationError);

    auto z = fixture::single_spec(MethodName::zeroshot);
    EXPECT_NO_THROW(z.validate());
    z.steps = 2;
    EXPECT_THROW(z.validate(), ValidationError);

    auto zm = fixture::single_spec(MethodName::zeroshot_min, 1);
    EXPECT_THROW(zm.validate(), ValidationError);
    zm.samples = 2;
    EXPECT_NO_THROW(zm.validate());

    auto q = fixture::single_spec(MethodName::zeroshot);
    q.qe_feedback = true;
    EXPECT_THROW(q.validate(), ValidationError);
}

TEST(MethodSpec, ValidationListsEveryDefect) {
    MethodSpec m;
    m.name = MethodName::zeroshot;
    m.steps = 3;
    m.qe_feedback = true;
    try {
        m.validate();
        FAIL();
    } catch (const ValidationError& e) {
        // steps, qe_feedback, translators, scorers, generator
        EXPECT_EQ(e.defects().size(), 5u);
    }
}

TEST(MethodSpec, MultiTargetAndLabel) {
    auto m = fixture::mtbreaker_spec(3, {"a", "b"});
    m.qe_feedback = true;
    EXPECT_TRUE(m.multi_target());
    EXPECT_EQ(m.label(), "mtbreaker(seeded+qe)[multi]");
    m.seeded = false;
    m.qe_feedback = false;
    m.target_translators = {"a"};
    EXPECT_EQ(m.label(), "mtbreaker(seedless)");
}

TEST(LanguagePair, Invariants) {
    EXPECT_NO_THROW((LanguagePair{"English", "Czech"}.validate()));
    EXPECT_THROW((LanguagePair{"English", "English"}.validate()), ValidationError);
    EXPECT_THROW((LanguagePair{"", "Czech"}.validate()), ValidationError);
}

TEST(SelectStep, SmallestIndexOnTies) {
    std::vector<Step> steps{scored_step(0, {{"t", 50}}), scored_step(1, {{"t", 20}}), scored_step(2, {{"t", 20}})};
    EXPECT_EQ(select_step(steps), 1u);
}

TEST(SelectStep, SkipsFailedSteps) {
    std::vector<Step> steps{scored_step(0, {{"t", 50}}), scored_step(1, {{"t", 10}})};
    steps[1].failed = true;
    EXPECT_EQ(select_step(steps), 0u);
    steps[0].failed = true;
    EXPECT_FALSE(select_step(steps).has_value());
}

// Randomized synthetic trajectories: the selected index attains the minimum
// across-translator mean, smallest index on ties.
TEST(SelectStep, PropertyRandomTrajectories) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> n_steps(1, 12), n_tr(1, 4), coarse(0, 5);
    std::uniform_real_distribution<double> fine(0, 100);
    std::bernoulli_distribution fail(0.15), use_coarse(0.5);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = n_steps(rng), m = n_tr(rng);
        const bool ties = use_coarse(rng);
        std::vector<Step> steps;
        for (int i = 0; i < n; ++i) {
            std::map<std::string, double> per;
            for (int t = 0; t < m; ++t) per["t" + std::to_string(t)] = ties ? 20.0 * coarse(rng) : fine(rng);
            steps.push_back(scored_step(static_cast<std::size_t>(i), per));
            steps.back().failed = i > 0 && fail(rng);
        }
        const auto sel = select_step(steps);
        ASSERT_TRUE(sel.has_value());
        const double best = trajectory_difficulty(steps[*sel]);
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (steps[i].failed) continue;
            const double v = trajectory_difficulty(steps[i]);
            EXPECT_LE(best, v);
            if (i < *sel) EXPECT_LT(best, v);
        }
    }
}

TEST(Trajectory, ValidateChecksShapeAndSelection) {
    Trajectory t;
    t.method = fixture::mtbreaker_spec(2);
    t.language_pair = fixture::en_cs();
    t.seed = "a b";
    t.steps = {scored_step(0, {{"mt", 100}}), scored_step(1, {{"mt", 80}}), scored_step(2, {{"mt", 60}})};
    t.selected = 2;
    EXPECT_NO_THROW(t.validate());
    t.selected = 1;
    EXPECT_THROW(t.validate(), ValidationError);
    t.selected = 2;
    t.steps.pop_back();
    EXPECT_THROW(t.validate(), ValidationError);
}

TEST(Trajectory, JsonFieldNamesAreFixed) {
    Trajectory t;
    t.method = fixture::mtbreaker_spec(1);
    t.language_pair = fixture::en_cs();
    t.steps = {scored_step(0, {{"mt", 100}}), scored_step(1, {{"mt", 80}})};
    t.selected = 1;
    const Json j = t;
    for (const char* key : {"method", "language_pair", "seed", "steps", "selected"}) EXPECT_TRUE(j.contains(key));
    EXPECT_TRUE(j["seed"].is_null());
}

TEST(Trajectory, PropertyJsonRoundTrip) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> score(0, 100);
    std::uniform_int_distribution<int> steps(1, 6);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 300; ++trial) {
        Trajectory t;
        const int n = steps(rng);
        t.method = fixture::mtbreaker_spec(n, {"mt", "other"}, {"q1", "q2"});
        t.method.qe_feedback = coin(rng);
        t.language_pair = {"English", "Čeština"};
        if (coin(rng)) t.seed = fixture::random_text(rng);
        for (int i = 0; i <= n; ++i) {
            Step s;
            s.index = static_cast<std::size_t>(i);
            s.source = fixture::random_text(rng);
            s.failed = i > 0 && coin(rng);
            if (s.failed) s.failure = "reason " + fixture::random_text(rng);
            for (const auto& tid : t.method.target_translators) {
                s.translations[tid] = fixture::random_text(rng);
                if (!s.failed) s.scores[tid] = combine_scores({{"q1", score(rng)}, {"q2", score(rng)}});
            }
            t.steps.push_back(std::move(s));
        }
        t.selected = select_step(t.steps).value();
        const auto bytes = Json(t).dump();
        const auto back = Json::parse(bytes).get<Trajectory>();
        EXPECT_EQ(back, t);
        EXPECT_EQ(Json(back).dump(), bytes);
    }
}

TEST(DatasetRecord, FromSelectedStep) {
    Trajectory t;
    t.method = fixture::mtbreaker_spec(1);
    t.language_pair = fixture::en_cs();
    t.seed = "seed";
    t.steps = {scored_step(0, {{"mt", 90}}), scored_step(1, {{"mt", 30}})};
    t.selected = 1;
    const auto r = make_record(t, 7);
    EXPECT_EQ(r.source, "s1");
    EXPECT_EQ(r.seed, "seed");
    EXPECT_EQ(r.trajectory_item, 7u);
    EXPECT_EQ(r.targets, std::vector<std::string>{"mt"});
    DatasetRecord blank;
    blank.source = "  \n";
    EXPECT_THROW(blank.validate(), ValidationError);
}
