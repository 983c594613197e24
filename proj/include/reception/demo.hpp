#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reception/annotate.hpp"
#include "reception/corpus.hpp"
#include "reception/reuse.hpp"

namespace reception {

struct DemoOptions {
    std::uint64_t seed = 42;
    std::size_t quotes = 8;
    std::size_t verbatim_per_quote = 3;
    std::size_t paraphrases_per_quote = 2;  // alternately Paraphrase / MeaningMatch
    std::size_t topical_per_quote = 3;
    std::size_t noise_docs = 80;
    std::size_t french_docs = 6;
    double ocr_rate = 0.0;  // per-letter substitution probability outside the source

    void validate() const;  // throws std::invalid_argument
};

enum class PlantKind { Source, SourceEdition, Verbatim, Paraphrase, MeaningVariant, Topical, Noise };
std::string_view to_string(PlantKind k);
std::optional<PlantKind> parse_plant_kind(std::string_view s);

struct DemoQuote {
    std::size_t index = 0;
    std::string text;
    Span source_span;
};

// Ground truth for one generated document.
struct DemoPlant {
    std::string doc_id;
    std::string work_id;
    PlantKind kind = PlantKind::Noise;
    std::optional<std::size_t> quote_index;
    Span target_span;  // planted region in the document, when any
};

struct DemoCorpus {
    std::vector<DocumentRecord> documents;
    std::string source_doc_id;
    std::string source_work_id;
    std::vector<DemoQuote> quotes;
    std::vector<DemoPlant> plants;
};

/// Seeded synthetic corpus. Paraphrases, meaning variants and topical
/// neighbours are regenerated until the aligner finds nothing against their
/// quote on the uncorrupted text.
DemoCorpus make_demo_corpus(const DemoOptions& options = {});

/// Uniform letter substitution with probability `rate` per ASCII letter.
std::string corrupt_ocr(std::string_view text, double rate, std::uint64_t seed);

Json to_json(const DemoPlant& p);
DemoPlant plant_from_json(const Json& j);
Json to_json(const DemoQuote& q);
DemoQuote demo_quote_from_json(const Json& j);

/// Label an annotator with the ground truth would give `doc_id` for the
/// planted quote `quote_index`. Noise documents occasionally get Don't Know.
Label simulated_label(const std::vector<DemoPlant>& plants, std::size_t quote_index, const std::string& doc_id);

/// Every word the generator can emit, lowercased.
std::vector<std::string> demo_vocabulary();

}  // namespace reception
