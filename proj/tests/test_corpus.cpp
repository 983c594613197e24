#include "reception/corpus.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "reception/error.hpp"
#include "reception/random.hpp"

using namespace reception;

namespace {

std::vector<DocumentRecord> ingest_string(const std::string& s) {
    std::istringstream in(s);
    return ingest(in);
}

DocumentRecord doc_with_words(std::size_t n, Rng& rng) {
    static const char* words[] = {"the", "mind", "Locke's", "idea,", "(reason)", "and", "—", "x.", "\"quoted\""};
    DocumentRecord d{"d1", "w1", "", "", {}, "", "en", ""};
    for (std::size_t i = 0; i < n; ++i) {
        if (i) d.text += (uniform_below(rng, 5) == 0) ? "\n  " : " ";
        d.text += words[uniform_below(rng, std::size(words))];
    }
    return d;
}

}  // namespace

TEST(Tokenizer, SplitsPunctuationAndClitics) {
    EXPECT_EQ(tokenize("Mr. Locke's Essay"), (std::vector<std::string>{"Mr", ".", "Locke", "'s", "Essay"}));
    EXPECT_EQ(tokenize("(\"Hume,\" he said)"),
              (std::vector<std::string>{"(", "\"", "Hume", ",", "\"", "he", "said", ")"}));
    EXPECT_EQ(tokenize("don't"), (std::vector<std::string>{"don", "'t"}));
    EXPECT_TRUE(tokenize("   \n\t ").empty());
}

TEST(Tokenizer, OffsetsPointIntoText) {
    const std::string text = "  The  understanding, (like the eye) ";
    for (const auto& t : tokenize_with_offsets(text)) {
        EXPECT_EQ(text.substr(t.begin, t.end - t.begin), t.text);
        EXPECT_EQ(t.text.data(), text.data() + t.begin);
    }
}

TEST(Tokenizer, NonAsciiStaysInsideWords) {
    auto toks = tokenize("déjà vu—encore");
    ASSERT_EQ(toks.size(), 2u);
    EXPECT_EQ(toks[0], "déjà");
}

TEST(Chunking, TilesDocumentProperty) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = uniform_below(rng, 400);
        const std::size_t size = 1 + uniform_below(rng, 120);
        const auto doc = doc_with_words(n, rng);
        const auto tokens = tokenize_with_offsets(doc.text);
        const auto chunks = chunk_document(doc, size);

        ASSERT_EQ(chunks.size(), (tokens.size() + size - 1) / size);
        std::size_t expect_start = 0;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            const auto& c = chunks[i];
            EXPECT_EQ(c.chunk_id, "d1#" + std::to_string(i));
            EXPECT_EQ(c.work_id, "w1");
            EXPECT_EQ(c.token_start, expect_start);
            EXPECT_GT(c.token_end, c.token_start);
            EXPECT_LE(c.token_end - c.token_start, size);
            if (i + 1 < chunks.size()) {
                EXPECT_EQ(c.token_end - c.token_start, size);
            }
            EXPECT_EQ(c.char_start, tokens[c.token_start].begin);
            EXPECT_EQ(c.char_end, tokens[c.token_end - 1].end);
            EXPECT_EQ(c.text, doc.text.substr(c.char_start, c.char_end - c.char_start));
            expect_start = c.token_end;
        }
        EXPECT_EQ(expect_start, tokens.size());
    }
}

TEST(Chunking, ZeroSizeRejected) {
    DocumentRecord d{"d", "w", "", "", {}, "", "", "a b"};
    EXPECT_THROW(chunk_document(d, 0), std::invalid_argument);
}

TEST(Chunking, RoundTripThroughJsonl) {
    DocumentRecord d{"d", "w", "", "", {}, "", "", "one two three four five"};
    auto chunks = chunk_document(d, 2);
    std::stringstream ss;
    write_chunks(ss, chunks);
    auto back = read_chunks(ss);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[2].text, "five");
    EXPECT_EQ(back[1].char_start, chunks[1].char_start);
}

TEST(Catalog, NeighborhoodStaysInDocument) {
    DocumentRecord a{"a", "w", "", "", {}, "", "", "1 2 3 4 5 6"};
    DocumentRecord b{"b", "w", "", "", {}, "", "", "7 8"};
    auto ca = chunk_document(a, 1);
    auto cb = chunk_document(b, 1);
    ca.insert(ca.end(), cb.begin(), cb.end());
    ChunkCatalog cat(ca);
    auto n = cat.neighborhood("a#1", 2);
    ASSERT_EQ(n.size(), 4u);
    EXPECT_EQ(n.front()->chunk_id, "a#0");
    EXPECT_EQ(n.back()->chunk_id, "a#3");
    EXPECT_EQ(cat.neighborhood("b#0", 5).size(), 2u);
    EXPECT_EQ(cat.find("zzz"), nullptr);
    EXPECT_THROW(cat.at("zzz"), DataError);
}

TEST(Ingest, ParsesMetadata) {
    auto docs = ingest_string(
        R"({"doc_id":"a","work_id":"W","text":"hi","year":1790,"author":"A","genre":"essay","declared_language":"en"})"
        "\n\n"
        R"({"doc_id":"b","work_id":"W","text":"there","year":null})");
    ASSERT_EQ(docs.size(), 2u);
    EXPECT_EQ(docs[0].year, 1790);
    EXPECT_EQ(docs[0].genre, "essay");
    EXPECT_FALSE(docs[1].year.has_value());
    EXPECT_EQ(docs[1].author, "");
}

TEST(Ingest, RejectsBadRecordsWithLineNumbers) {
    auto expect_line = [](const std::string& input, const std::string& fragment) {
        try {
            ingest_string(input);
            FAIL() << "no error for " << input;
        } catch (const DataError& e) {
            EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
        }
    };
    expect_line(R"({"doc_id":"a","work_id":"W"})", "line 1");
    expect_line("{\"doc_id\":\"a\",\"work_id\":\"W\",\"text\":\"\"}\nnot json", "line 2");
    expect_line("{\"doc_id\":\"a\",\"work_id\":\"W\",\"text\":\"\"}\n{\"doc_id\":\"a\",\"work_id\":\"V\",\"text\":\"\"}",
                "duplicate doc_id 'a'");
    expect_line(R"({"doc_id":"a","work_id":"W","text":"t","year":"1790"})", "year");
    expect_line(R"({"doc_id":"","work_id":"W","text":"t"})", "empty doc_id");
}
