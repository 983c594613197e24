#include "reception/reuse.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "reception/random.hpp"

using namespace reception;

namespace {

// Plain O(nm) score-only local alignment.
int sw_score_oracle(const std::string& a, const std::string& b, const AlignmentParams& p) {
    std::vector<std::vector<int>> h(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    int best = 0;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const bool eq = std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                            std::tolower(static_cast<unsigned char>(b[j - 1]));
            h[i][j] = std::max({0, h[i - 1][j - 1] + (eq ? p.match : p.mismatch), h[i - 1][j] + p.gap,
                                h[i][j - 1] + p.gap});
            best = std::max(best, h[i][j]);
        }
    }
    return best;
}

std::string random_text(Rng& rng, std::size_t n, const std::string& alphabet = "abcdefghijklmnopqrstuvwxyz    ") {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += alphabet[uniform_below(rng, alphabet.size())];
    return s;
}

std::string substitute(std::string s, double rate, Rng& rng) {
    for (auto& c : s) {
        if (uniform_unit(rng) < rate) {
            char r;
            do r = static_cast<char>('a' + uniform_below(rng, 26));
            while (r == c);
            c = r;
        }
    }
    return s;
}

}  // namespace

TEST(SmithWaterman, MatchesOracleScore) {
    Rng rng(1);
    AlignmentParams p;
    for (int t = 0; t < 150; ++t) {
        auto a = random_text(rng, 1 + uniform_below(rng, 60), "abcd");
        auto b = random_text(rng, 1 + uniform_below(rng, 60), "abcd");
        auto got = smith_waterman(a, b, p);
        ASSERT_EQ(got.score, sw_score_oracle(a, b, p)) << a << " | " << b;
        if (got.score > 0) {
            // The reported spans alone must carry the whole score.
            EXPECT_EQ(sw_score_oracle(a.substr(got.a_span.begin, got.a_span.length()),
                                      b.substr(got.b_span.begin, got.b_span.length()), p),
                      got.score);
            EXPECT_GE(got.columns, std::max(got.a_span.length(), got.b_span.length()));
            EXPECT_LE(got.matches, got.columns);
        }
    }
}

TEST(SmithWaterman, KnownAlignment) {
    AlignmentParams p;
    auto r = smith_waterman("xxHUMAN UNDERSTANDINGyy", "zz human understanding zz", p);
    EXPECT_EQ(r.score, 19);
    EXPECT_EQ(r.a_span, (Span{2, 21}));
    EXPECT_EQ(r.b_span, (Span{3, 22}));
    EXPECT_DOUBLE_EQ(r.identity(), 1.0);
    EXPECT_EQ(smith_waterman("", "abc", p).score, 0);
}

TEST(AlignPair, ParamsValidated) {
    AlignmentParams p;
    p.gap = 0;
    EXPECT_THROW(align_pair("aaaaaa", "aaaaaa", p), std::invalid_argument);
    p = {};
    p.seed_len = 2;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(AlignPair, FindsEveryPlantedExactCopy) {
    Rng rng(2);
    AlignmentParams p;
    for (int t = 0; t < 60; ++t) {
        const auto query = random_text(rng, 300);
        const std::size_t len = 40 + uniform_below(rng, 200);
        const std::size_t qb = uniform_below(rng, query.size() - len);
        std::string target = random_text(rng, 200 + uniform_below(rng, 500));
        const std::size_t tb = uniform_below(rng, target.size());
        target.insert(tb, query.substr(qb, len));

        auto found = align_pair(query, target, p);
        const Span planted{tb, tb + len};
        bool covered = false;
        for (const auto& a : found) {
            EXPECT_GE(a.score, p.min_score);
            if (overlap(a.b_span, planted) == len) covered = true;
        }
        EXPECT_TRUE(covered) << "trial " << t;
    }
}

TEST(AlignPair, BestScoreAgreesWithFullDp) {
    Rng rng(3);
    AlignmentParams p;
    for (int t = 0; t < 40; ++t) {
        const auto quote = random_text(rng, 150);
        const auto noisy = substitute(quote, 0.08, rng);
        const std::string target = random_text(rng, 120) + noisy + random_text(rng, 120);
        const int oracle = sw_score_oracle(quote, target, p);
        auto found = align_pair(quote, target, p);
        ASSERT_FALSE(found.empty());
        int best = 0;
        for (const auto& a : found) best = std::max(best, a.score);
        EXPECT_EQ(best, oracle) << "trial " << t;
    }
}

TEST(AlignPair, RecoversTenPercentSubstitutions) {
    Rng rng(4);
    AlignmentParams p;
    int good = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const auto quote = random_text(rng, 200);
        const std::size_t pre = 100 + uniform_below(rng, 300);
        const std::string target = random_text(rng, pre) + substitute(quote, 0.10, rng) + random_text(rng, 200);
        for (const auto& a : align_pair(quote, target, p)) {
            if (a.identity() >= 0.85 && overlap(a.b_span, {pre, pre + 200}) >= 180) {
                ++good;
                break;
            }
        }
    }
    EXPECT_GE(good, 95);
}

TEST(AlignPair, UnrelatedTextsYieldNothing) {
    Rng rng(5);
    AlignmentParams p;
    for (int t = 0; t < 20; ++t) {
        EXPECT_TRUE(align_pair(random_text(rng, 300, "abcdefgh"), random_text(rng, 300, "stuvwxyz"), p).empty());
    }
}

TEST(DetectReuse, ThreadCountDoesNotChangeOutput) {
    Rng rng(6);
    const auto source = random_text(rng, 400);
    std::vector<DocumentRecord> corpus;
    for (int d = 0; d < 12; ++d) {
        std::string text = random_text(rng, 300);
        if (d % 3 == 0) text.insert(50, source.substr(20 * d, 80));
        corpus.push_back({"d" + std::to_string(d), "w" + std::to_string(d / 2), "", "", {}, "", "", text});
    }
    corpus.push_back({"src", "W", "", "", {}, "", "", source});
    AlignmentParams p;
    auto one = detect_reuse(source, corpus, p, "src", "src", 1);
    auto four = detect_reuse(source, corpus, p, "src", "src", 4);
    ASSERT_EQ(one.size(), 4u);
    ASSERT_EQ(one.size(), four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].target_doc, four[i].target_doc);
        EXPECT_EQ(one[i].target_span, four[i].target_span);
        EXPECT_EQ(one[i].query_doc, "src");
    }
    EXPECT_EQ(one[0].target_doc, "d0");
    EXPECT_EQ(one[3].target_doc, "d9");
}

TEST(Clustering, MatchesBruteForceComponents) {
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        std::vector<AlignmentMatch> ms;
        const std::size_t n = 1 + uniform_below(rng, 30);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t b = uniform_below(rng, 500);
            const std::size_t len = 10 + uniform_below(rng, 80);
            ms.push_back({"src", "d" + std::to_string(i), "w" + std::to_string(uniform_below(rng, 4)),
                          {b, b + len}, {i, i + len}, 40, 1.0});
        }
        // Union-find over all pairs.
        std::vector<std::size_t> comp(n);
        for (std::size_t i = 0; i < n; ++i) comp[i] = i;
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const auto& a = ms[i].query_span;
                    const auto& b = ms[j].query_span;
                    if (2 * overlap(a, b) >= std::min(a.length(), b.length()) && comp[j] > comp[i]) {
                        comp[j] = comp[i];
                        changed = true;
                    }
                }
            }
        }
        std::set<std::set<std::string>> want;
        for (std::size_t c : std::set<std::size_t>(comp.begin(), comp.end())) {
            std::set<std::string> g;
            for (std::size_t i = 0; i < n; ++i) if (comp[i] == c) g.insert(ms[i].target_doc);
            want.insert(g);
        }
        const std::string source(700, 'x');
        auto clusters = cluster_reuses(ms, "w0", source);
        std::set<std::set<std::string>> got;
        for (const auto& c : clusters) {
            std::set<std::string> g;
            std::size_t external = 0;
            for (const auto& o : c.occurrences) {
                g.insert(o.doc_id);
                external += o.work_id != "w0";
            }
            EXPECT_EQ(c.external_frequency, external);
            EXPECT_EQ(c.canonical_text.size(), c.source_span.length());
            got.insert(g);
        }
        EXPECT_EQ(got, want);
        for (std::size_t i = 1; i < clusters.size(); ++i) {
            EXPECT_LT(clusters[i - 1].source_span.begin, clusters[i].source_span.begin + 1);
            EXPECT_LT(clusters[i - 1].cluster_id, clusters[i].cluster_id);
        }
    }
}

TEST(Quotes, FilteredAndRankedByFrequency) {
    auto make = [](std::string id, std::size_t len, std::size_t freq) {
        ReuseCluster c;
        c.cluster_id = std::move(id);
        c.canonical_text = std::string(len, 'a');
        c.external_frequency = freq;
        return c;
    };
    std::vector<ReuseCluster> cs = {make("c1", 200, 3), make("c2", 149, 9), make("c3", 300, 7),
                                    make("c4", 301, 9), make("c5", 150, 7), make("c6", 200, 2)};
    auto qs = extract_query_quotes(cs);
    ASSERT_EQ(qs.size(), 3u);
    EXPECT_EQ(qs[0].cluster_id, "c3");
    EXPECT_EQ(qs[1].cluster_id, "c5");
    EXPECT_EQ(qs[2].cluster_id, "c1");
    EXPECT_EQ(qs[2].frequency_rank, 3u);
    EXPECT_EQ(qs[0].quote_id, "q0001");

    // Length is counted in code points.
    std::string accented;
    for (int i = 0; i < 150; ++i) accented += "é";
    cs = {make("c1", 0, 3)};
    cs[0].canonical_text = accented;
    EXPECT_EQ(extract_query_quotes(cs).size(), 1u);
}

TEST(Quotes, SelectionTiers) {
    std::vector<QueryQuote> ranked;
    for (std::size_t r = 1; r <= 200; ++r) ranked.push_back({"q" + std::to_string(r), "", "t", 1000 - r, r});
    auto a = select_query_set(ranked, 9);
    auto b = select_query_set(ranked, 9);
    ASSERT_EQ(a.quotes.size(), 20u);
    EXPECT_TRUE(a.warnings.empty());
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(a.quotes[i].quote_id, b.quotes[i].quote_id);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.quotes[i].frequency_rank, i + 1);
    auto in_tier = [&](std::size_t lo, std::size_t hi) {
        return std::count_if(a.quotes.begin(), a.quotes.end(),
                             [&](const QueryQuote& q) { return q.frequency_rank >= lo && q.frequency_rank <= hi; });
    };
    EXPECT_EQ(in_tier(6, 50), 5);
    EXPECT_EQ(in_tier(51, 150), 5);
    EXPECT_EQ(in_tier(151, 1000), 5);

    ranked.resize(8);
    auto small = select_query_set(ranked, 9);
    EXPECT_EQ(small.quotes.size(), 8u);
    EXPECT_EQ(small.warnings.size(), 3u);
}
