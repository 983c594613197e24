#include "reception/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "reception/error.hpp"

namespace reception {

namespace {

std::string required_string(const Json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw DataError("line " + std::to_string(line) + ": missing or non-string field '" + key + "'");
    }
    return it->get<std::string>();
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_punct(char c) {
    auto u = static_cast<unsigned char>(c);
    return u < 0x80 && ((u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) || (u >= 0x5b && u <= 0x60) ||
                        (u >= 0x7b && u <= 0x7e));
}

}  // namespace

std::vector<DocumentRecord> ingest(std::istream& in) {
    std::vector<DocumentRecord> docs;
    std::unordered_map<std::string, std::size_t> seen;  // doc_id -> line
    jsonl::for_each(in, [&](const Json& j, std::size_t line) {
        DocumentRecord doc;
        doc.doc_id = required_string(j, "doc_id", line);
        doc.work_id = required_string(j, "work_id", line);
        doc.text = required_string(j, "text", line);
        if (doc.doc_id.empty()) throw DataError("line " + std::to_string(line) + ": empty doc_id");
        if (doc.work_id.empty()) throw DataError("line " + std::to_string(line) + ": empty work_id");
        doc.title = jsonl::get_string(j, "title");
        doc.author = jsonl::get_string(j, "author");
        doc.genre = jsonl::get_string(j, "genre");
        doc.declared_language = jsonl::get_string(j, "declared_language");
        if (auto it = j.find("year"); it != j.end() && !it->is_null()) {
            if (!it->is_number_integer() || it->get<long long>() <= 0) {
                throw DataError("line " + std::to_string(line) + ": year must be a positive integer");
            }
            doc.year = it->get<int>();
        }
        auto [pos, inserted] = seen.emplace(doc.doc_id, line);
        if (!inserted) {
            throw DataError("duplicate doc_id '" + doc.doc_id + "' on lines " + std::to_string(pos->second) +
                            " and " + std::to_string(line));
        }
        docs.push_back(std::move(doc));
    });
    return docs;
}

std::vector<DocumentRecord> ingest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus " + path);
    return ingest(in);
}

std::vector<Token> tokenize_with_offsets(std::string_view text) {
    std::vector<Token> out;
    auto emit = [&](std::size_t b, std::size_t e) { out.push_back({text.substr(b, e - b), b, e}); };
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        if (i >= n) break;
        std::size_t word_end = i;
        while (word_end < n && !is_space(text[word_end])) ++word_end;

        std::size_t b = i;
        std::size_t e = word_end;
        while (b < e && is_punct(text[b])) {
            emit(b, b + 1);
            ++b;
        }
        std::size_t trail = e;
        while (trail > b && is_punct(text[trail - 1])) --trail;

        // Core [b, trail): split before each interior apostrophe.
        std::size_t start = b;
        for (std::size_t k = b + 1; k < trail; ++k) {
            if (text[k] == '\'') {
                emit(start, k);
                start = k;
            }
        }
        if (start < trail) emit(start, trail);
        for (std::size_t k = trail; k < e; ++k) emit(k, k + 1);
        i = word_end;
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& t : tokenize_with_offsets(text)) out.emplace_back(t.text);
    return out;
}

std::vector<Chunk> chunk_document(const DocumentRecord& doc, std::size_t chunk_size) {
    if (chunk_size == 0) throw std::invalid_argument("chunk_size must be >= 1");
    const auto tokens = tokenize_with_offsets(doc.text);
    std::vector<Chunk> chunks;
    chunks.reserve((tokens.size() + chunk_size - 1) / chunk_size);
    for (std::size_t start = 0, seq = 0; start < tokens.size(); start += chunk_size, ++seq) {
        const std::size_t end = std::min(start + chunk_size, tokens.size());
        Chunk c;
        c.chunk_id = doc.doc_id + "#" + std::to_string(seq);
        c.doc_id = doc.doc_id;
        c.work_id = doc.work_id;
        c.token_start = start;
        c.token_end = end;
        c.char_start = tokens[start].begin;
        c.char_end = tokens[end - 1].end;
        c.text = doc.text.substr(c.char_start, c.char_end - c.char_start);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

Json to_json(const DocumentRecord& doc) {
    Json j;
    j["doc_id"] = doc.doc_id;
    j["work_id"] = doc.work_id;
    j["title"] = doc.title;
    j["author"] = doc.author;
    j["year"] = doc.year ? Json(*doc.year) : Json(nullptr);
    j["genre"] = doc.genre;
    j["declared_language"] = doc.declared_language;
    j["text"] = doc.text;
    return j;
}

Json to_json(const Chunk& c) {
    Json j;
    j["chunk_id"] = c.chunk_id;
    j["doc_id"] = c.doc_id;
    j["work_id"] = c.work_id;
    j["token_start"] = c.token_start;
    j["token_end"] = c.token_end;
    j["char_start"] = c.char_start;
    j["char_end"] = c.char_end;
    j["text"] = c.text;
    return j;
}

Chunk chunk_from_json(const Json& j) {
    Chunk c;
    try {
        c.chunk_id = j.at("chunk_id").get<std::string>();
        c.doc_id = j.at("doc_id").get<std::string>();
        c.work_id = j.at("work_id").get<std::string>();
        c.token_start = j.at("token_start").get<std::size_t>();
        c.token_end = j.at("token_end").get<std::size_t>();
        c.char_start = j.value("char_start", std::size_t{0});
        c.char_end = j.value("char_end", std::size_t{0});
        c.text = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad chunk record: ") + e.what());
    }
    return c;
}

void write_documents(std::ostream& out, const std::vector<DocumentRecord>& docs) {
    for (const auto& d : docs) jsonl::write_line(out, to_json(d));
}

void write_chunks(std::ostream& out, const std::vector<Chunk>& chunks) {
    for (const auto& c : chunks) jsonl::write_line(out, to_json(c));
}

std::vector<Chunk> read_chunks(std::istream& in) {
    std::vector<Chunk> chunks;
    jsonl::for_each(in, [&](const Json& j, std::size_t line) {
        try {
            chunks.push_back(chunk_from_json(j));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line) + ": " + e.what());
        }
    });
    return chunks;
}

std::vector<Chunk> read_chunks_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open chunks " + path);
    return read_chunks(in);
}


ChunkCatalog::ChunkCatalog(std::vector<Chunk> chunks) : chunks_(std::move(chunks)) {
    by_id_.reserve(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        if (!by_id_.emplace(chunks_[i].chunk_id, i).second) {
            throw DataError("duplicate chunk_id '" + chunks_[i].chunk_id + "'");
        }
    }
}

const Chunk* ChunkCatalog::find(std::string_view chunk_id) const {
    auto it = by_id_.find(std::string(chunk_id));
    return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

const Chunk& ChunkCatalog::at(std::string_view chunk_id) const {
    if (const auto* c = find(chunk_id)) return *c;
    throw DataError("unknown chunk_id '" + std::string(chunk_id) + "'");
}

std::vector<const Chunk*> ChunkCatalog::neighborhood(std::string_view chunk_id, std::size_t radius) const {
    std::vector<const Chunk*> out;
    auto it = by_id_.find(std::string(chunk_id));
    if (it == by_id_.end()) return out;
    const auto& centre = chunks_[it->second];
    const auto seq_of = [](const Chunk& c) { return std::stoul(c.chunk_id.substr(c.chunk_id.rfind('#') + 1)); };
    const std::size_t seq = seq_of(centre);
    const std::size_t lo = seq >= radius ? seq - radius : 0;
    for (std::size_t s = lo; s <= seq + radius; ++s) {
        if (const auto* c = find(centre.doc_id + "#" + std::to_string(s))) out.push_back(c);
    }
    return out;
}

}  // namespace reception
