#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reception/corpus.hpp"
#include "reception/error.hpp"

namespace reception {

struct EmbeddingVector {
    std::string id;
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

using VectorCollection = std::vector<EmbeddingVector>;

inline constexpr double kUnitNormTolerance = 1e-4;

double l2_norm(std::span<const float> v);
bool is_unit_norm(std::span<const float> v, double tol = kUnitNormTolerance);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);
// In-place L2 normalisation; returns false (vector untouched) for a zero vector.
bool normalize(std::vector<float>& v);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual EmbeddingVector embed(std::string id, std::string_view text) const = 0;
};

/// Signed feature hashing of lowercased byte trigrams, L2-normalised.
/// Texts with no trigram (or whose counts cancel) map to e_0.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim = 256);

class HashEmbedder final : public Embedder {
public:
    explicit HashEmbedder(std::size_t dim = 256);
    std::string name() const override { return "hash-trigram"; }
    std::size_t dim() const override { return dim_; }
    EmbeddingVector embed(std::string id, std::string_view text) const override;

private:
    std::size_t dim_;
};

// Trigram bucket/sign used by hash_embed, exposed for tests that need to
// construct collision-free text pairs.
struct TrigramSlot {
    std::size_t bucket;
    int sign;
};
TrigramSlot trigram_slot(std::string_view lowered_trigram, std::size_t dim);

VectorCollection embed_chunks(const std::vector<Chunk>& chunks, const Embedder& embedder);

// --- RMV1 vector file -------------------------------------------------------
//   "RMV1" | dim:u32le | count:u64le | count x (len:u16le, utf8 id) |
//   count x dim x f32le

class VectorFileError : public DataError {
public:
    enum class Kind { BadMagic, DimMismatch, Truncated, NotUnitNorm, IdTooLong };
    VectorFileError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::string save_vectors(const VectorCollection& vectors);
void save_vectors(std::ostream& out, const VectorCollection& vectors);
void save_vectors_file(const std::string& path, const VectorCollection& vectors);

struct LoadOptions {
    std::optional<std::uint32_t> expected_dim;
    bool require_unit_norm = true;
};

VectorCollection load_vectors(std::string_view bytes, const LoadOptions& opts = {});
VectorCollection load_vectors_file(const std::string& path, const LoadOptions& opts = {});

/// Reads externally produced vectors (RMV1 or JSONL of {"id", "values"})
/// and L2-normalises them. Zero vectors and ragged dims are data errors.
VectorCollection import_vectors_file(const std::string& path);

}  // namespace reception
