#include "reception/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "reception/error.hpp"
#include "reception/random.hpp"

using namespace reception;

namespace {

// Rank by counting, then textbook Pearson.
double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double less = 0, equal = 0;
            for (double w : v) {
                less += w < v[i];
                equal += w == v[i];
            }
            r[i] = less + (equal + 1) / 2;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

AnnotatedHit ah(std::string q, std::size_t rank, std::size_t pool, Label label) {
    AnnotatedHit h;
    h.query_id = std::move(q);
    h.rank = rank;
    h.pool_size = pool;
    h.label = label;
    h.candidate_id = h.query_id + ":" + std::to_string(rank);
    return h;
}

std::vector<AnnotatedHit> constructed() {
    using L = Label;
    return {ah("q1", 1, 10, L::Paraphrase), ah("q1", 2, 10, L::NoMatch),      ah("q1", 5, 10, L::TopicalMatch),
            ah("q1", 8, 10, L::NoMatch),    ah("q2", 1, 20, L::MeaningMatch), ah("q2", 3, 20, L::Paraphrase),
            ah("q2", 10, 20, L::NoMatch),   ah("q2", 15, 20, L::DontKnow)};
}

const CategoryRow& row_for(const std::vector<CategoryRow>& rows, Label l) {
    for (const auto& r : rows) if (r.label == l) return r;
    throw std::logic_error("no row");
}

}  // namespace

TEST(AverageRanks, TiesShareMeanPosition) {
    std::vector<double> v = {10, 20, 10, 30, 20, 10};
    EXPECT_EQ(average_ranks(v), (std::vector<double>{2, 4.5, 2, 6, 4.5, 2}));
    EXPECT_TRUE(average_ranks({}).empty());
}

TEST(Spearman, KnownValues) {
    std::vector<double> ind = {1, 1, 0, 0}, rk = {1, 2, 3, 4};
    auto r = spearman_rho(ind, rk);
    ASSERT_TRUE(r);
    EXPECT_NEAR(r->rho, -0.894427190999916, 1e-12);
    // df = 2: two-sided p = 1 - t / sqrt(t^2 + 2).
    const double t = 0.894427190999916 * std::sqrt(2 / (1 - 0.8));
    EXPECT_NEAR(r->p_value, 1 - t / std::sqrt(t * t + 2), 1e-9);

    // Reference values from scipy.stats.spearmanr.
    std::vector<double> v1 = {17, 86, 60, 77, 47, 3, 70, 87, 88, 92};
    std::vector<double> v2 = {70, 29, 85, 61, 80, 34, 60, 31, 73, 66};
    r = spearman_rho(v1, v2);
    EXPECT_NEAR(r->rho, -0.16363636363636364, 1e-12);
    EXPECT_NEAR(r->p_value, 0.6514773427962428, 1e-9);
    v1[7] = 47;
    r = spearman_rho(v1, v2);
    EXPECT_NEAR(r->rho, 0.024316221747202587, 1e-12);
    EXPECT_NEAR(r->p_value, 0.9468397049085097, 1e-9);
}

TEST(Spearman, UndefinedAndErrors) {
    std::vector<double> a = {1, 2}, b = {2, 1};
    EXPECT_FALSE(spearman_rho(a, b));
    std::vector<double> c = {1, 1, 1}, d = {1, 2, 3};
    EXPECT_FALSE(spearman_rho(c, d));
    EXPECT_THROW(spearman_rho(c, a), std::invalid_argument);
    EXPECT_DOUBLE_EQ(spearman_rho(d, d)->rho, 1.0);
    EXPECT_DOUBLE_EQ(spearman_rho(d, d)->p_value, 0.0);
}

TEST(Spearman, MatchesOracleAndIsAntisymmetricInRankOrder) {
    Rng rng(99);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 3 + uniform_below(rng, 200);
        std::vector<double> ind(n), rk(n), rev(n);
        for (std::size_t i = 0; i < n; ++i) {
            ind[i] = static_cast<double>(uniform_below(rng, 2));
            rk[i] = static_cast<double>(i + 1);
            rev[i] = static_cast<double>(n - i);
        }
        auto r = spearman_rho(ind, rk);
        if (!r) continue;
        EXPECT_NEAR(r->rho, spearman_oracle(ind, rk), 1e-9);
        EXPECT_GE(r->rho, -1.0);
        EXPECT_LE(r->rho, 1.0);
        EXPECT_NEAR(spearman_rho(ind, rev)->rho, -r->rho, 1e-12);
        EXPECT_GE(r->p_value, 0.0);
        EXPECT_LE(r->p_value, 1.0);
    }
}

TEST(CategoryTable, ConstructedCase) {
    const auto rows = category_table(constructed());
    ASSERT_EQ(rows.size(), kAllLabels.size());
    const auto& p = row_for(rows, Label::Paraphrase);
    const auto& n = row_for(rows, Label::NoMatch);
    EXPECT_NEAR(*p.overall_pct, 25.0, 1e-9);
    EXPECT_NEAR(*n.overall_pct, 37.5, 1e-9);
    EXPECT_NEAR(*p.top5_pct, (100.0 / 3 + 50) / 2, 1e-9);
    EXPECT_NEAR(*p.top20pct_pct, 50.0, 1e-9);
    EXPECT_NEAR(*n.top20pct_pct, 25.0, 1e-9);
    EXPECT_NEAR(*p.top50pct_pct, 100.0 / 3, 1e-9);
    EXPECT_NEAR(*row_for(rows, Label::DontKnow).top5_pct, 0.0, 1e-12);

    for (auto pick : {&CategoryRow::overall_pct, &CategoryRow::top5_pct, &CategoryRow::top20pct_pct,
                      &CategoryRow::top50pct_pct}) {
        double sum = 0;
        for (const auto& r : rows) sum += *(r.*pick);
        EXPECT_NEAR(sum, 100.0, 0.1);
    }

    // Pooled rho over local ranks 1..4 in each query.
    std::vector<double> ind = {0, 1, 0, 1, 0, 0, 1, 0}, loc = {1, 2, 3, 4, 1, 2, 3, 4};
    EXPECT_NEAR(*n.rho, spearman_oracle(ind, loc), 1e-12);
    EXPECT_TRUE(n.p_value.has_value());

    const auto mean_rows = category_table(constructed(), RhoMode::Mean);
    const double q1 = spearman_oracle({0, 1, 0, 1}, {1, 2, 3, 4});
    const double q2 = spearman_oracle({0, 0, 1, 0}, {1, 2, 3, 4});
    EXPECT_NEAR(*row_for(mean_rows, Label::NoMatch).rho, (q1 + q2) / 2, 1e-12);
    EXPECT_FALSE(row_for(mean_rows, Label::NoMatch).p_value.has_value());
    // TopicalMatch is constant in q2, so only q1 contributes.
    EXPECT_NEAR(*row_for(mean_rows, Label::TopicalMatch).rho, spearman_oracle({0, 0, 1, 0}, {1, 2, 3, 4}), 1e-12);

    EXPECT_NE(render_category_table(rows).find("Paraphrase"), std::string::npos);
    EXPECT_EQ(category_table_csv(rows).rfind("label,overall_pct", 0), 0u);
}

TEST(CategoryTable, EmptyInput) {
    for (const auto& r : category_table({})) {
        EXPECT_FALSE(r.overall_pct);
        EXPECT_FALSE(r.rho);
    }
}

TEST(YieldCurve, CumulativeExcludingDontKnow) {
    auto hits = constructed();
    std::vector<AnnotatedHit> q2(hits.begin() + 4, hits.end());
    auto curve = yield_curve(q2);
    ASSERT_EQ(curve.size(), 4u);
    EXPECT_DOUBLE_EQ(curve[0].cumulative_significant_fraction, 1.0);
    EXPECT_DOUBLE_EQ(curve[2].cumulative_significant_fraction, 2.0 / 3);
    EXPECT_EQ(curve[3].rank, 15u);
    EXPECT_DOUBLE_EQ(curve[3].cumulative_significant_fraction, 2.0 / 3);

    EXPECT_TRUE(yield_curve({ah("q", 1, 5, Label::DontKnow)}).empty());

    // Equal-rank entries may come in any order.
    std::vector<AnnotatedHit> tied = {ah("q", 2, 5, Label::NoMatch), ah("q", 2, 5, Label::Paraphrase),
                                      ah("q", 1, 5, Label::MeaningMatch)};
    auto a = yield_curve(tied);
    std::swap(tied[0], tied[1]);
    auto b = yield_curve(tied);
    ASSERT_EQ(a.size(), 2u);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_DOUBLE_EQ(a[1].cumulative_significant_fraction, b[1].cumulative_significant_fraction);
    EXPECT_DOUBLE_EQ(a[1].cumulative_significant_fraction, 2.0 / 3);
}

TEST(Facets, CountsAndOrdering) {
    auto hits = constructed();
    const char* authors[] = {"Hume", "Locke", "Hume", "", "Reid", "Locke", "Hume", "Reid"};
    const std::optional<int> years[] = {1799, 1800, 1755, std::nullopt, 1690, 1699, 1701, 1789};
    for (std::size_t i = 0; i < hits.size(); ++i) {
        hits[i].author = authors[i];
        hits[i].year = years[i];
    }
    auto t = facet_counts(hits, Facet::Author);
    EXPECT_EQ(t.values, (std::vector<std::string>{"Hume", "Locke", "Reid", "unknown"}));
    EXPECT_EQ(t.totals["Hume"], 3u);
    EXPECT_EQ(t.counts["Hume"][Label::NoMatch], 1u);
    EXPECT_EQ(t.counts["Hume"][Label::TopicalMatch], 1u);

    auto top2 = facet_counts(hits, Facet::Author, 2);
    EXPECT_EQ(top2.values.size(), 2u);
    EXPECT_FALSE(top2.totals.contains("Reid"));

    auto d = facet_counts(hits, Facet::Decade);
    EXPECT_EQ(d.totals["1790"], 1u);
    EXPECT_EQ(d.totals["1690"], 2u);
    EXPECT_EQ(d.totals["1780"], 1u);
    EXPECT_EQ(d.totals["unknown"], 1u);
    EXPECT_EQ(facet_counts({}, Facet::Genre).values.size(), 0u);

    const auto csv = facet_table_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "value,Paraphrase,MeaningMatch,TopicalMatch,NoMatch,DontKnow,total");
    EXPECT_NE(csv.find("\"Hume\",1,0,1,1,0,3"), std::string::npos) << csv;
}

TEST(WorkLevel, SignificantVersusIntersectionWorks) {
    auto hits = constructed();
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].work_id = "W" + std::to_string(i % 3);
    HitPartition p;
    EXPECT_EQ(work_level_comparison(p, hits).lexical_works, 0u);
    // Significant hits: indices 0 (W0), 4 (W1), 5 (W2).
    EXPECT_EQ(work_level_comparison(p, hits).significant_semantic_works, 3u);
    p.intersection = {{"q", "c", "d", "X", 1, 1}, {"q", "c2", "d2", "X", 1, 2}, {"q", "c3", "d3", "Y", 1, 3}};
    EXPECT_EQ(work_level_comparison(p, hits).lexical_works, 2u);
}

TEST(Rows, ParseAndSkipLexical) {
    std::vector<Json> rows = {
        {{"query_id", "q"}, {"rank", 3}, {"label", "Paraphrase"}, {"pool_size", 9}, {"year", 1777}},
        {{"query_id", "q"}, {"rank", 4}, {"label", "LexicalMatch"}},
    };
    std::size_t skipped = 0;
    auto hits = annotated_hits_from_rows(rows, &skipped);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(skipped, 1u);
    EXPECT_EQ(hits[0].candidate_id, "q:3");
    EXPECT_EQ(hits[0].year, 1777);
    rows.push_back({{"query_id", "q"}, {"rank", 5}, {"label", "Perhaps"}});
    EXPECT_THROW(annotated_hits_from_rows(rows), DataError);
    EXPECT_THROW(annotated_hits_from_rows({{{"label", "NoMatch"}}}), DataError);
}

TEST(Durations, Median) {
    auto hits = constructed();
    EXPECT_FALSE(median_duration_seconds({}));
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].duration_seconds = static_cast<double>(i * 2);
    EXPECT_DOUBLE_EQ(*median_duration_seconds(hits), 7.0);
    hits.pop_back();
    EXPECT_DOUBLE_EQ(*median_duration_seconds(hits), 6.0);
}
