#include "reception/index.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "reception/error.hpp"

namespace reception {

Json to_json(const RankedHit& h) {
    Json j;
    j["query_id"] = h.query_id;
    j["chunk_id"] = h.chunk_id;
    j["doc_id"] = h.doc_id;
    j["work_id"] = h.work_id;
    j["score"] = h.score;
    j["rank"] = h.rank;
    return j;
}

RankedHit hit_from_json(const Json& j) {
    try {
        return {j.at("query_id").get<std::string>(), j.at("chunk_id").get<std::string>(),
                j.at("doc_id").get<std::string>(),   j.at("work_id").get<std::string>(),
                j.at("score").get<double>(),         j.at("rank").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad hit record: ") + e.what());
    }
}

std::vector<RankedHit> read_hits_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open hits " + path);
    std::vector<RankedHit> hits;
    jsonl::for_each(in, [&](const Json& j, std::size_t line) {
        try {
            hits.push_back(hit_from_json(j));
        } catch (const DataError& e) {
            throw DataError(path + ": line " + std::to_string(line) + ": " + e.what());
        }
    });
    return hits;
}

void write_hits_file(const std::string& path, const std::vector<RankedHit>& hits) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& h : hits) jsonl::write_line(out, to_json(h));
}

FlatIndex FlatIndex::build(const VectorCollection& vectors) {
    if (vectors.empty()) throw std::invalid_argument("index build: no vectors");
    FlatIndex index;
    index.dim_ = vectors.front().dim();
    if (index.dim_ == 0) throw std::invalid_argument("index build: zero dim");
    index.ids_.reserve(vectors.size());
    index.data_.reserve(vectors.size() * index.dim_);
    std::unordered_set<std::string> seen;
    for (const auto& v : vectors) {
        if (v.dim() != index.dim_) {
            throw std::invalid_argument("index build: dim mismatch for '" + v.id + "'");
        }
        if (!is_unit_norm(v.values)) throw std::invalid_argument("index build: '" + v.id + "' is not unit-norm");
        if (!seen.insert(v.id).second) throw std::invalid_argument("index build: duplicate id '" + v.id + "'");
        index.ids_.push_back(v.id);
        index.data_.insert(index.data_.end(), v.values.begin(), v.values.end());
    }
    return index;
}

std::vector<Neighbor> FlatIndex::search(std::span<const float> query, std::size_t k) const {
    if (query.size() != dim_) throw std::invalid_argument("search: query dim mismatch");
    if (k == 0) throw std::invalid_argument("search: k must be >= 1");
    k = std::min(k, size());

    // "a before b" in the final ranking.
    auto better = [this](const Neighbor& a, const Neighbor& b) {
        if (a.score != b.score) return a.score > b.score;
        return ids_[a.slot] < ids_[b.slot];
    };
    // Heap top is the worst retained neighbour.
    std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(better)> heap(better);

    for (std::size_t slot = 0; slot < size(); ++slot) {
        const float* row = data_.data() + slot * dim_;
        double dot = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) dot += static_cast<double>(row[d]) * query[d];
        Neighbor cand{slot, dot};
        if (heap.size() < k) {
            heap.push(cand);
        } else if (better(cand, heap.top())) {
            heap.pop();
            heap.push(cand);
        }
    }
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
        out.push_back(heap.top());
        heap.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<RankedHit> search_hits(const FlatIndex& index, const EmbeddingVector& query, std::size_t k,
                                   const ChunkCatalog& catalog) {
    const auto neighbors = index.search(query.values, k);
    std::vector<RankedHit> hits;
    hits.reserve(neighbors.size());
    for (std::size_t r = 0; r < neighbors.size(); ++r) {
        const auto& chunk = catalog.at(index.id(neighbors[r].slot));
        hits.push_back({query.id, chunk.chunk_id, chunk.doc_id, chunk.work_id, neighbors[r].score, r + 1});
    }
    return hits;
}

std::vector<RankedHit> search_all(const FlatIndex& index, const VectorCollection& queries, std::size_t k,
                                  const ChunkCatalog& catalog, unsigned threads) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, std::max<std::size_t>(queries.size(), 1));

    std::vector<std::vector<RankedHit>> per_query(queries.size());
    if (threads <= 1) {
        for (std::size_t q = 0; q < queries.size(); ++q) per_query[q] = search_hits(index, queries[q], k, catalog);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) {
                pool.emplace_back([&, t] {
                    try {
                        for (std::size_t q = t; q < queries.size(); q += threads) {
                            per_query[q] = search_hits(index, queries[q], k, catalog);
                        }
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    std::vector<RankedHit> all;
    for (auto& v : per_query) all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    return all;
}

}  // namespace reception
