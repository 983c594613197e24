#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reception/jsonl.hpp"

namespace reception {

struct DocumentRecord {
    std::string doc_id;
    std::string work_id;
    std::string title;
    std::string author;
    std::optional<int> year;
    std::string genre;
    std::string declared_language;
    std::string text;
};

// A token with its byte offsets [begin, end) into the source text.
struct Token {
    std::string_view text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Chunk {
    std::string chunk_id;  // doc_id + "#" + sequence
    std::string doc_id;
    std::string work_id;
    std::size_t token_start = 0;
    std::size_t token_end = 0;  // exclusive
    std::size_t char_start = 0;
    std::size_t char_end = 0;  // exclusive
    std::string text;
};

inline constexpr std::size_t kDefaultChunkSize = 100;

/// Parses UTF-8 JSONL, one document per line. Blank lines are skipped.
/// Throws DataError naming the offending line (1-based) on malformed input
/// or duplicate doc_id.
std::vector<DocumentRecord> ingest(std::istream& in);
std::vector<DocumentRecord> ingest_file(const std::string& path);

/// Whitespace split, then leading/trailing ASCII punctuation peeled off as
/// single-character tokens. An interior apostrophe starts a clitic token
/// ("Locke's" -> "Locke", "'s"). No case folding.
std::vector<Token> tokenize_with_offsets(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

/// Tiles the document into consecutive non-overlapping chunks of at most
/// chunk_size tokens; only the last chunk may be shorter.
std::vector<Chunk> chunk_document(const DocumentRecord& doc,
                                  std::size_t chunk_size = kDefaultChunkSize);

// Chunk lookup by id, plus the per-document ordering needed for context
// windows.
class ChunkCatalog {
public:
    ChunkCatalog() = default;
    explicit ChunkCatalog(std::vector<Chunk> chunks);

    const Chunk* find(std::string_view chunk_id) const;
    const Chunk& at(std::string_view chunk_id) const;  // throws DataError
    /// Chunks of the same document within `radius` positions, in order.
    std::vector<const Chunk*> neighborhood(std::string_view chunk_id, std::size_t radius) const;
    const std::vector<Chunk>& chunks() const { return chunks_; }
    std::size_t size() const { return chunks_.size(); }

private:
    std::vector<Chunk> chunks_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

Json to_json(const DocumentRecord& doc);
Json to_json(const Chunk& chunk);
Chunk chunk_from_json(const Json& j);

void write_documents(std::ostream& out, const std::vector<DocumentRecord>& docs);
void write_chunks(std::ostream& out, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks(std::istream& in);
std::vector<Chunk> read_chunks_file(const std::string& path);

}  // namespace reception
