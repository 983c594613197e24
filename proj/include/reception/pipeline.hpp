#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "reception/corpus.hpp"
#include "reception/index.hpp"
#include "reception/reuse.hpp"

namespace reception {

// All pipeline transforms operate per query_id: ranks are reassigned densely
// within each query's list and queries keep their input order.

std::vector<RankedHit> filter_subcorpus(const std::vector<RankedHit>& hits,
                                        const std::unordered_set<std::string>& allowed_doc_ids);

/// Keeps the best-ranked hit per (query_id, work_id).
std::vector<RankedHit> dedupe_by_work(const std::vector<RankedHit>& hits);

struct HitPartition {
    std::vector<RankedHit> intersection;
    std::vector<RankedHit> unique_semantic;  // re-ranked densely per query
    std::vector<AlignmentMatch> unique_lexical;
};

/// A hit is in the intersection when a lexical match for the same query
/// targets the hit's document (and therefore work) with a character span
/// overlapping the hit chunk. Lexical matches are tied to queries through
/// AlignmentMatch::query_doc == RankedHit::query_id.
HitPartition anti_lexical_partition(const std::vector<RankedHit>& semantic_hits,
                                    const std::vector<AlignmentMatch>& lexical_matches, const ChunkCatalog& catalog);

/// |intersection| / (|intersection| + |unique_lexical|); nullopt when both
/// are empty.
std::optional<double> lexical_recall(const HitPartition& partition);
std::optional<double> lexical_recall(double intersection, double unique_lexical);

std::vector<Json> partition_rows(const HitPartition& partition);

}  // namespace reception
