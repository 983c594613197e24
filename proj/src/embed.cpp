#include "reception/embed.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "reception/jsonl.hpp"

namespace reception {

namespace {

constexpr char kMagic[4] = {'R', 'M', 'V', '1'};

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

template <typename T>
void put_le(std::string& buf, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xffU));
    }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& pos) {
    if (bytes.size() - pos < sizeof(T)) {
        throw VectorFileError(VectorFileError::Kind::Truncated, "vector file truncated");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    }
    pos += sizeof(T);
    return static_cast<T>(v);
}

}  // namespace

double l2_norm(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

bool is_unit_norm(std::span<const float> v, double tol) { return std::abs(l2_norm(v) - 1.0) <= tol; }

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("cosine: dim mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += static_cast<double>(a.values[i]) * b.values[i];
    const double na = l2_norm(a.values);
    const double nb = l2_norm(b.values);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (na * nb);
}

bool normalize(std::vector<float>& v) {
    const double n = l2_norm(v);
    if (n == 0.0 || !std::isfinite(n)) return false;
    for (auto& x : v) x = static_cast<float>(x / n);
    return true;
}

TrigramSlot trigram_slot(std::string_view lowered_trigram, std::size_t dim) {
    const std::uint64_t h = fnv1a(lowered_trigram);
    return {static_cast<std::size_t>(h % dim), ((h >> 40) & 1U) ? -1 : 1};
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
    if (dim < 8) throw std::invalid_argument("hash_embed: dim must be >= 8");
    std::string lowered(text);
    for (auto& c : lowered) c = ascii_lower(c);

    std::vector<double> raw(dim, 0.0);
    for (std::size_t i = 0; i + 3 <= lowered.size(); ++i) {
        const auto slot = trigram_slot(std::string_view(lowered).substr(i, 3), dim);
        raw[slot.bucket] += slot.sign;
    }
    double norm = 0.0;
    for (double x : raw) norm += x * x;
    norm = std::sqrt(norm);

    EmbeddingVector out;
    out.values.assign(dim, 0.0f);
    if (norm == 0.0) {
        out.values[0] = 1.0f;
    } else {
        for (std::size_t i = 0; i < dim; ++i) out.values[i] = static_cast<float>(raw[i] / norm);
    }
    return out;
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim < 8) throw std::invalid_argument("HashEmbedder: dim must be >= 8");
}

EmbeddingVector HashEmbedder::embed(std::string id, std::string_view text) const {
    auto v = hash_embed(text, dim_);
    v.id = std::move(id);
    return v;
}

VectorCollection embed_chunks(const std::vector<Chunk>& chunks, const Embedder& embedder) {
    VectorCollection out;
    out.reserve(chunks.size());
    for (const auto& c : chunks) out.push_back(embedder.embed(c.chunk_id, c.text));
    return out;
}

std::string save_vectors(const VectorCollection& vectors) {
    const std::uint32_t dim = vectors.empty() ? 0 : static_cast<std::uint32_t>(vectors.front().dim());
    std::string buf(kMagic, 4);
    put_le<std::uint32_t>(buf, dim);
    put_le<std::uint64_t>(buf, vectors.size());
    for (const auto& v : vectors) {
        if (v.dim() != dim) {
            throw VectorFileError(VectorFileError::Kind::DimMismatch,
                                  "vector '" + v.id + "' has dim " + std::to_string(v.dim()) + ", expected " +
                                      std::to_string(dim));
        }
        if (v.id.size() > 0xffff) {
            throw VectorFileError(VectorFileError::Kind::IdTooLong, "id longer than 65535 bytes");
        }
        put_le<std::uint16_t>(buf, static_cast<std::uint16_t>(v.id.size()));
        buf += v.id;
    }
    buf.reserve(buf.size() + vectors.size() * dim * 4);
    for (const auto& v : vectors) {
        for (float f : v.values) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(f));
    }
    return buf;
}

void save_vectors(std::ostream& out, const VectorCollection& vectors) {
    const auto bytes = save_vectors(vectors);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void save_vectors_file(const std::string& path, const VectorCollection& vectors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    save_vectors(out, vectors);
}

VectorCollection load_vectors(std::string_view bytes, const LoadOptions& opts) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw VectorFileError(VectorFileError::Kind::BadMagic, "bad magic: not an RMV1 vector file");
    }
    std::size_t pos = 4;
    const auto dim = get_le<std::uint32_t>(bytes, pos);
    const auto count = get_le<std::uint64_t>(bytes, pos);
    if (opts.expected_dim && count > 0 && dim != *opts.expected_dim) {
        throw VectorFileError(VectorFileError::Kind::DimMismatch,
                              "dim mismatch: file has " + std::to_string(dim) + ", expected " +
                                  std::to_string(*opts.expected_dim));
    }
    if (count > 0 && dim == 0) {
        throw VectorFileError(VectorFileError::Kind::DimMismatch, "dim mismatch: zero dim with non-empty payload");
    }
    // Every id costs at least two bytes; reject absurd counts before allocating.
    if (count > (bytes.size() - pos) / 2 + 1) {
        throw VectorFileError(VectorFileError::Kind::Truncated, "vector file truncated (count exceeds payload)");
    }

    VectorCollection out(static_cast<std::size_t>(count));
    for (auto& v : out) {
        const auto len = get_le<std::uint16_t>(bytes, pos);
        if (bytes.size() - pos < len) {
            throw VectorFileError(VectorFileError::Kind::Truncated, "vector file truncated in id table");
        }
        v.id.assign(bytes.substr(pos, len));
        pos += len;
    }
    const std::size_t payload = static_cast<std::size_t>(count) * dim * 4;
    if (bytes.size() - pos < payload) {
        throw VectorFileError(VectorFileError::Kind::Truncated, "vector file truncated in float payload");
    }
    for (auto& v : out) {
        v.values.resize(dim);
        for (auto& f : v.values) f = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
        if (opts.require_unit_norm && !is_unit_norm(v.values)) {
            throw VectorFileError(VectorFileError::Kind::NotUnitNorm, "vector '" + v.id + "' is not unit-norm");
        }
    }
    return out;
}

VectorCollection load_vectors_file(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vectors " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_vectors(bytes, opts);
}

VectorCollection import_vectors_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    VectorCollection out;
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
        out = load_vectors(bytes, {.expected_dim = std::nullopt, .require_unit_norm = false});
    } else {
        std::istringstream ss(bytes);
        jsonl::for_each(ss, [&](const Json& j, std::size_t line) {
            EmbeddingVector v;
            v.id = jsonl::get_string(j, "id");
            const Json* arr = nullptr;
            for (const char* key : {"values", "vector", "embedding"}) {
                if (auto it = j.find(key); it != j.end() && it->is_array()) {
                    arr = &*it;
                    break;
                }
            }
            if (v.id.empty() || arr == nullptr) {
                throw DataError("line " + std::to_string(line) + ": expected {\"id\", \"values\": [...]}");
            }
            for (const auto& x : *arr) v.values.push_back(x.get<float>());
            out.push_back(std::move(v));
        });
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].dim() != out.front().dim() || out[i].dim() == 0) {
            throw DataError("import: vector '" + out[i].id + "' has inconsistent dim");
        }
        if (!normalize(out[i].values)) throw DataError("import: vector '" + out[i].id + "' is zero");
    }
    return out;
}

}  // namespace reception
