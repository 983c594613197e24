#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reception/annotate.hpp"
#include "reception/pipeline.hpp"

namespace reception {

// One annotated candidate as exported by the annotation store.
struct AnnotatedHit {
    std::string candidate_id;
    std::string query_id;
    std::size_t rank = 0;       // rank in the annotation pool
    std::size_t pool_size = 0;
    Label label = Label::NoMatch;
    double score = 0.0;
    std::string chunk_id;
    std::string doc_id;
    std::string work_id;
    std::string author;
    std::string title;
    std::optional<int> year;
    std::string genre;
    std::string language;
    std::string quote_text;
    std::string hit_text;
    double duration_seconds = 0.0;
};

/// Parses export rows; rows labelled with the reserved LexicalMatch value are
/// dropped and counted in *skipped when given.
std::vector<AnnotatedHit> annotated_hits_from_rows(const std::vector<Json>& rows, std::size_t* skipped = nullptr);

/// 1-based ranks with ties given the mean of the positions they occupy.
std::vector<double> average_ranks(std::span<const double> values);

struct Correlation {
    double rho = 0.0;
    double p_value = 1.0;  // two-sided, t approximation with n-2 df
};

/// Spearman correlation (Pearson on average ranks). nullopt when n < 3 or
/// either series is constant. Throws std::invalid_argument on length
/// mismatch.
std::optional<Correlation> spearman_rho(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value for a correlation coefficient over n pairs.
double correlation_p_value(double rho, std::size_t n);

enum class RhoMode { Pooled, Mean };

struct CategoryRow {
    Label label = Label::NoMatch;
    std::optional<double> overall_pct;
    std::optional<double> top5_pct;
    std::optional<double> top20pct_pct;
    std::optional<double> top50pct_pct;
    std::optional<double> rho;
    std::optional<double> p_value;
};

/// Yields per query (on pool ranks) averaged over queries; the correlation is
/// between each label's indicator and the local rank (1..n position of the
/// hit within its query's annotated subset).
std::vector<CategoryRow> category_table(const std::vector<AnnotatedHit>& hits, RhoMode mode = RhoMode::Pooled);
std::string render_category_table(const std::vector<CategoryRow>& rows);
std::string category_table_csv(const std::vector<CategoryRow>& rows);

struct YieldPoint {
    std::size_t rank = 0;
    double cumulative_significant_fraction = 0.0;
};

/// Cumulative share of significant labels at each annotated rank; Don't
/// Know entries count in neither numerator nor denominator.
std::vector<YieldPoint> yield_curve(const std::vector<AnnotatedHit>& query_hits);

enum class Facet { Author, Genre, Decade };
std::optional<Facet> parse_facet(std::string_view s);
std::string facet_value(const AnnotatedHit& hit, Facet facet);

struct FacetTable {
    Facet facet = Facet::Author;
    std::vector<std::string> values;  // by total count desc, then name
    std::map<std::string, std::map<Label, std::size_t>> counts;
    std::map<std::string, std::size_t> totals;
};

FacetTable facet_counts(const std::vector<AnnotatedHit>& hits, Facet facet, std::size_t top_n = 0);
std::string facet_table_csv(const FacetTable& table);

struct WorkLevelComparison {
    std::size_t significant_semantic_works = 0;
    std::size_t lexical_works = 0;
};

WorkLevelComparison work_level_comparison(const HitPartition& partition, const std::vector<AnnotatedHit>& hits);

std::optional<double> median_duration_seconds(const std::vector<AnnotatedHit>& hits);

/// query_id, rank, label, score rows for score-by-category plots.
std::string score_by_category_csv(const std::vector<AnnotatedHit>& hits);

}  // namespace reception
