#include "reception/index.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "reception/random.hpp"

using namespace reception;

namespace {

VectorCollection random_unit(std::size_t n, std::size_t dim, Rng& rng, const std::string& prefix = "c") {
    VectorCollection out;
    for (std::size_t i = 0; i < n; ++i) {
        EmbeddingVector v;
        v.id = prefix + std::to_string(i);
        for (std::size_t d = 0; d < dim; ++d) v.values.push_back(static_cast<float>(uniform_unit(rng) * 2 - 1));
        normalize(v.values);
        out.push_back(std::move(v));
    }
    return out;
}

// Full sort over every vector.
std::vector<std::pair<std::string, double>> brute_force(const VectorCollection& data, const EmbeddingVector& q,
                                                        std::size_t k) {
    std::vector<std::pair<std::string, double>> all;
    for (const auto& v : data) {
        double dot = 0.0;
        for (std::size_t d = 0; d < v.dim(); ++d) dot += static_cast<double>(v.values[d]) * q.values[d];
        all.emplace_back(v.id, dot);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

ChunkCatalog catalog_for(const VectorCollection& vs) {
    std::vector<Chunk> chunks;
    for (const auto& v : vs) chunks.push_back({v.id, "doc-" + v.id, "work-" + v.id, 0, 1, 0, 1, "t"});
    return ChunkCatalog(chunks);
}

}  // namespace

TEST(FlatIndex, MatchesBruteForce) {
    Rng rng(21);
    auto data = random_unit(700, 24, rng);
    auto queries = random_unit(20, 24, rng, "q");
    auto index = FlatIndex::build(data);
    for (const auto& q : queries) {
        for (std::size_t k : {1u, 7u, 50u, 700u, 900u}) {
            auto got = index.search(q.values, k);
            auto want = brute_force(data, q, k);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                EXPECT_EQ(index.id(got[i].slot), want[i].first);
                EXPECT_EQ(got[i].score, want[i].second);
            }
        }
    }
}

TEST(FlatIndex, TiesBreakByAscendingId) {
    VectorCollection data;
    for (const char* id : {"d", "b", "c", "a"}) data.push_back({id, {1.0f, 0.0f}});
    data.push_back({"z", {0.0f, 1.0f}});
    auto index = FlatIndex::build(data);
    auto got = index.search(std::vector<float>{1.0f, 0.0f}, 3);
    ASSERT_EQ(got.size(), 3u);
    EXPECT_EQ(index.id(got[0].slot), "a");
    EXPECT_EQ(index.id(got[1].slot), "b");
    EXPECT_EQ(index.id(got[2].slot), "c");
}

TEST(FlatIndex, BuildAndSearchPreconditions) {
    EXPECT_THROW(FlatIndex::build({}), std::invalid_argument);
    EXPECT_THROW(FlatIndex::build({{"a", {1, 0}}, {"b", {1}}}), std::invalid_argument);
    EXPECT_THROW(FlatIndex::build({{"a", {2, 0}}}), std::invalid_argument);
    EXPECT_THROW(FlatIndex::build({{"a", {1, 0}}, {"a", {0, 1}}}), std::invalid_argument);
    auto index = FlatIndex::build({{"a", {1, 0}}});
    EXPECT_THROW(index.search(std::vector<float>{1, 0, 0}, 1), std::invalid_argument);
    EXPECT_THROW(index.search(std::vector<float>{1, 0}, 0), std::invalid_argument);
}

TEST(SearchAll, ResolvesProvenanceIndependentOfThreads) {
    Rng rng(3);
    auto data = random_unit(120, 16, rng);
    auto queries = random_unit(9, 16, rng, "q");
    auto index = FlatIndex::build(data);
    auto catalog = catalog_for(data);
    auto one = search_all(index, queries, 10, catalog, 1);
    auto many = search_all(index, queries, 10, catalog, 4);
    EXPECT_EQ(one, many);
    ASSERT_EQ(one.size(), 90u);
    EXPECT_EQ(one[0].query_id, "q0");
    EXPECT_EQ(one[0].rank, 1u);
    EXPECT_EQ(one[9].rank, 10u);
    EXPECT_EQ(one[0].doc_id, "doc-" + one[0].chunk_id);
    EXPECT_EQ(one[10].query_id, "q1");
}

TEST(Hits, JsonRoundTrip) {
    RankedHit h{"q", "c#1", "c", "w", 0.25, 3};
    EXPECT_EQ(hit_from_json(to_json(h)), h);
    EXPECT_THROW(hit_from_json(Json::object()), DataError);
}
