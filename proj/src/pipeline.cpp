#include "reception/pipeline.hpp"

#include <map>
#include <set>
#include <unordered_map>
#include <utility>

namespace reception {

namespace {

void rerank_per_query(std::vector<RankedHit>& hits) {
    std::unordered_map<std::string, std::size_t> next;
    for (auto& h : hits) h.rank = ++next[h.query_id];
}

}  // namespace

std::vector<RankedHit> filter_subcorpus(const std::vector<RankedHit>& hits,
                                        const std::unordered_set<std::string>& allowed_doc_ids) {
    std::vector<RankedHit> out;
    for (const auto& h : hits) {
        if (allowed_doc_ids.contains(h.doc_id)) out.push_back(h);
    }
    rerank_per_query(out);
    return out;
}

std::vector<RankedHit> dedupe_by_work(const std::vector<RankedHit>& hits) {
    // Best (lowest rank) position per (query, work); ties keep the first seen.
    std::map<std::pair<std::string, std::string>, std::size_t> best;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        auto key = std::make_pair(hits[i].query_id, hits[i].work_id);
        auto [it, inserted] = best.emplace(std::move(key), i);
        if (!inserted && hits[i].rank < hits[it->second].rank) it->second = i;
    }
    std::vector<bool> keep(hits.size(), false);
    for (const auto& [key, idx] : best) keep[idx] = true;
    std::vector<RankedHit> out;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (keep[i]) out.push_back(hits[i]);
    }
    rerank_per_query(out);
    return out;
}

HitPartition anti_lexical_partition(const std::vector<RankedHit>& semantic_hits,
                                    const std::vector<AlignmentMatch>& lexical_matches, const ChunkCatalog& catalog) {
    // (query, doc) -> indices of lexical matches
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_doc;
    for (std::size_t i = 0; i < lexical_matches.size(); ++i) {
        by_doc[{lexical_matches[i].query_doc, lexical_matches[i].target_doc}].push_back(i);
    }
    std::vector<bool> paired(lexical_matches.size(), false);

    HitPartition part;
    for (const auto& h : semantic_hits) {
        bool covered = false;
        if (const auto* chunk = catalog.find(h.chunk_id)) {
            const Span chunk_span{chunk->char_start, chunk->char_end};
            if (auto it = by_doc.find({h.query_id, h.doc_id}); it != by_doc.end()) {
                for (const std::size_t i : it->second) {
                    const auto& m = lexical_matches[i];
                    if (m.target_work == h.work_id && overlap(m.target_span, chunk_span) >= 1) {
                        paired[i] = true;
                        covered = true;
                    }
                }
            }
        }
        (covered ? part.intersection : part.unique_semantic).push_back(h);
    }
    for (std::size_t i = 0; i < lexical_matches.size(); ++i) {
        if (!paired[i]) part.unique_lexical.push_back(lexical_matches[i]);
    }
    rerank_per_query(part.unique_semantic);
    return part;
}

std::optional<double> lexical_recall(double intersection, double unique_lexical) {
    const double denom = intersection + unique_lexical;
    if (denom <= 0.0) return std::nullopt;
    return intersection / denom;
}

std::optional<double> lexical_recall(const HitPartition& partition) {
    return lexical_recall(static_cast<double>(partition.intersection.size()),
                          static_cast<double>(partition.unique_lexical.size()));
}

std::vector<Json> partition_rows(const HitPartition& partition) {
    std::vector<Json> rows;
    for (const auto& h : partition.intersection) {
        auto j = to_json(h);
        j["partition"] = "intersection";
        rows.push_back(std::move(j));
    }
    for (const auto& h : partition.unique_semantic) {
        auto j = to_json(h);
        j["partition"] = "unique_semantic";
        rows.push_back(std::move(j));
    }
    for (const auto& m : partition.unique_lexical) {
        auto j = to_json(m);
        j["partition"] = "unique_lexical";
        rows.push_back(std::move(j));
    }
    return rows;
}

}  // namespace reception
