#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reception/corpus.hpp"
#include "reception/jsonl.hpp"

namespace reception {

struct AlignmentParams {
    std::size_t seed_len = 5;
    int match = 1;
    int mismatch = -1;
    int gap = -2;
    int x_drop = 10;
    int min_score = 30;

    void validate() const;  // throws std::invalid_argument
};

// Half-open character (byte) range.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

std::size_t overlap(const Span& a, const Span& b);

struct LocalAlignment {
    int score = 0;
    Span a_span;
    Span b_span;
    std::size_t matches = 0;
    std::size_t columns = 0;  // aligned positions, gaps included

    double identity() const { return columns == 0 ? 0.0 : static_cast<double>(matches) / columns; }
};

/// Full-matrix local alignment (case-insensitive on ASCII), linear gaps.
/// Ties on the best cell resolve to the smallest (i, j) in row-major order.
LocalAlignment smith_waterman(std::string_view a, std::string_view b, const AlignmentParams& params);

/// All local alignments between query and target found by exact seeding,
/// ungapped X-drop filtering and gapped X-drop extension, each scoring at
/// least params.min_score. Sorted by target offset.
std::vector<LocalAlignment> align_pair(std::string_view query, std::string_view target,
                                       const AlignmentParams& params);

struct AlignmentMatch {
    std::string query_doc;
    std::string target_doc;
    std::string target_work;
    Span query_span;
    Span target_span;
    int score = 0;
    double identity = 0.0;
};

Json to_json(const AlignmentMatch& m);
AlignmentMatch match_from_json(const Json& j);
std::vector<AlignmentMatch> read_matches_file(const std::string& path);
void write_matches_file(const std::string& path, const std::vector<AlignmentMatch>& matches);

/// Runs align_pair against every corpus document (skipping `skip_doc`).
/// Output is ordered by corpus position then target offset, independent of
/// the thread count.
std::vector<AlignmentMatch> detect_reuse(std::string_view query_text, const std::vector<DocumentRecord>& corpus,
                                         const AlignmentParams& params, const std::string& query_doc = "query",
                                         const std::string& skip_doc = {}, unsigned threads = 1);

struct Occurrence {
    std::string doc_id;
    std::string work_id;
    Span span;
};

struct ReuseCluster {
    std::string cluster_id;
    Span source_span;  // union of the member query spans
    std::string canonical_text;
    std::vector<Occurrence> occurrences;
    std::size_t external_frequency = 0;
};

Json to_json(const ReuseCluster& c);
ReuseCluster cluster_from_json(const Json& j);

/// Groups matches whose source spans overlap by at least half of the
/// shorter span (transitively). external_frequency counts occurrences whose
/// work differs from source_work. Clusters are numbered by source offset.
std::vector<ReuseCluster> cluster_reuses(const std::vector<AlignmentMatch>& matches, const std::string& source_work,
                                         std::string_view source_text);

struct QueryQuote {
    std::string quote_id;
    std::string cluster_id;
    std::string text;
    std::size_t external_frequency = 0;
    std::size_t frequency_rank = 0;
};

Json to_json(const QueryQuote& q);
QueryQuote quote_from_json(const Json& j);
std::vector<QueryQuote> read_quotes_file(const std::string& path);

std::size_t utf8_length(std::string_view s);

struct QuoteConstraints {
    std::size_t min_len = 150;
    std::size_t max_len = 300;
    std::size_t min_freq = 3;
};

/// Clusters meeting both constraints, ordered by (-external_frequency,
/// cluster_id) and ranked 1..n. Length is counted in code points.
std::vector<QueryQuote> extract_query_quotes(const std::vector<ReuseCluster>& clusters,
                                             const QuoteConstraints& constraints = {});

struct QuerySelection {
    std::vector<QueryQuote> quotes;  // ordered by frequency_rank
    std::vector<std::string> warnings;
};

/// Ranks 1-5 plus 5 seeded uniform draws from each of the rank tiers 6-50,
/// 51-150 and 151-1000. Tiers with fewer than 5 members are taken whole
/// and reported.
QuerySelection select_query_set(const std::vector<QueryQuote>& ranked, std::uint64_t seed);

}  // namespace reception
