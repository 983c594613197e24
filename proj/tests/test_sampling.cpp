#include "reception/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "reception/error.hpp"

using namespace reception;

namespace {

// Floating point reference, halves rounded up.
std::vector<std::size_t> pilot_oracle(std::size_t n) {
    std::vector<std::size_t> out = {1, 2, 3, 4, 5};
    for (int i = 1; i <= 45; ++i) {
        const long double x = 5.0L + i * (0.9L * n - 5.0L) / 45.0L;
        auto r = static_cast<std::size_t>(std::floor(x + 0.5L + 1e-12L));
        if (r <= out.back()) r = out.back() + 1;
        out.push_back(r);
    }
    return out;
}

}  // namespace

TEST(Pilot, KnownPools) {
    auto p = pilot_plan(1000, "q").plan;
    ASSERT_EQ(p.entries.size(), 50u);
    EXPECT_EQ(p.entries[5].rank, 25u);   // 5 + 895/45 = 24.89
    EXPECT_EQ(p.entries[49].rank, 900u);
    EXPECT_EQ(p.entries[4].reason, SampleReason::Top);
    EXPECT_EQ(p.entries[5].reason, SampleReason::Interval);

    auto small = pilot_plan(200).plan;
    EXPECT_EQ(small.entries[5].rank, 9u);  // 8.89
    EXPECT_EQ(small.entries.back().rank, 180u);
}

TEST(Pilot, MatchesOracleAcrossPoolSizes) {
    for (std::size_t n = 50; n <= 5000; n += 7) {
        const auto res = pilot_plan(n);
        EXPECT_TRUE(res.warnings.empty());
        const auto got = res.plan.ranks();
        ASSERT_EQ(got, pilot_oracle(n)) << n;
        for (std::size_t i = 1; i < got.size(); ++i) ASSERT_LT(got[i - 1], got[i]);
        ASSERT_LE(got.back(), n);
    }
}

TEST(Pilot, TinyPoolsTakeEverything) {
    auto res = pilot_plan(12);
    EXPECT_EQ(res.plan.entries.size(), 12u);
    EXPECT_EQ(res.warnings.size(), 1u);
    EXPECT_TRUE(pilot_plan(0).plan.entries.empty());
}

TEST(Triage, FixedRanks) {
    auto t = triage_plan(200, "q").ranks();
    ASSERT_EQ(t.size(), 50u);
    for (std::size_t r = 1; r <= 20; ++r) EXPECT_EQ(t[r - 1], r);
    EXPECT_EQ(t[20], 21u);
    EXPECT_EQ(t[21], 27u);
    EXPECT_EQ(t.back(), 195u);
    EXPECT_EQ(triage_plan(100000).ranks(), t);
    EXPECT_THROW(triage_plan(199), std::invalid_argument);
}

TEST(Exhaustive, CappedAt200) {
    EXPECT_EQ(exhaustive_plan(1000).entries.size(), 200u);
    EXPECT_EQ(exhaustive_plan(37).entries.size(), 37u);
    EXPECT_EQ(exhaustive_plan(37).entries.back().rank, 37u);
}

TEST(Decide, DensityAndThreshold) {
    auto d = decide_deepening(5, 12, 2, 0.5, "q");
    EXPECT_DOUBLE_EQ(*d.significant_density, 0.5);
    EXPECT_TRUE(d.deepen);
    EXPECT_FALSE(decide_deepening(4, 12, 2).deepen);
    EXPECT_TRUE(decide_deepening(1, 10, 0, 0.1).deepen);

    auto none = decide_deepening(0, 4, 4);
    EXPECT_FALSE(none.significant_density.has_value());
    EXPECT_FALSE(none.deepen);
    EXPECT_EQ(none.warnings.size(), 1u);

    EXPECT_THROW(decide_deepening(1, 3, 4), std::invalid_argument);
    EXPECT_THROW(decide_deepening(4, 5, 2), std::invalid_argument);
}

TEST(PlanRows, RoundTrip) {
    auto a = pilot_plan(300, "q1").plan;
    auto b = triage_plan(300, "q1");
    auto rows = plan_rows(a);
    auto more = plan_rows(b);
    rows.insert(rows.end(), more.begin(), more.end());
    auto plans = plans_from_rows(rows);
    ASSERT_EQ(plans.size(), 2u);
    EXPECT_EQ(plans[0].entries, a.entries);
    EXPECT_EQ(plans[1].stage, Stage::Triage);
    EXPECT_EQ(plans[1].entries, b.entries);
    EXPECT_THROW(plans_from_rows({Json{{"query_id", "q"}, {"stage", "bogus"}, {"rank", 1}}}), DataError);
}
