#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "reception/corpus.hpp"
#include "reception/embed.hpp"
#include "reception/jsonl.hpp"

namespace reception {

struct RankedHit {
    std::string query_id;
    std::string chunk_id;
    std::string doc_id;
    std::string work_id;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based

    friend bool operator==(const RankedHit&, const RankedHit&) = default;
};

Json to_json(const RankedHit& hit);
RankedHit hit_from_json(const Json& j);
std::vector<RankedHit> read_hits_file(const std::string& path);
void write_hits_file(const std::string& path, const std::vector<RankedHit>& hits);

struct Neighbor {
    std::size_t slot;  // position in the index
    double score;
};

/// Exact inner-product search over unit vectors (cosine). Immutable once
/// built, so concurrent searches are safe.
class FlatIndex {
public:
    /// Throws std::invalid_argument on empty input, ragged dims, non-unit
    /// vectors or duplicate ids.
    static FlatIndex build(const VectorCollection& vectors);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::string& id(std::size_t slot) const { return ids_[slot]; }

    /// Top min(k, size()) by score descending, ties by ascending id.
    std::vector<Neighbor> search(std::span<const float> query, std::size_t k) const;

private:
    FlatIndex() = default;

    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;  // row-major, size() x dim_
};

/// Searches one query and resolves chunk provenance through the catalog.
std::vector<RankedHit> search_hits(const FlatIndex& index, const EmbeddingVector& query, std::size_t k,
                                   const ChunkCatalog& catalog);

/// Runs every query (in parallel when threads > 1); results are concatenated
/// in query order, so the output does not depend on thread count.
std::vector<RankedHit> search_all(const FlatIndex& index, const VectorCollection& queries, std::size_t k,
                                  const ChunkCatalog& catalog, unsigned threads = 0);

}  // namespace reception
