#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reception/corpus.hpp"
#include "reception/index.hpp"
#include "reception/jsonl.hpp"
#include "reception/sampling.hpp"

namespace reception {

// LexicalMatch is not a runtime label: lexical hits are removed before
// annotation. It is still recognised (and skipped) on import.
enum class Label { Paraphrase, MeaningMatch, TopicalMatch, NoMatch, DontKnow };

inline constexpr std::array<Label, 5> kAllLabels = {Label::Paraphrase, Label::MeaningMatch, Label::TopicalMatch,
                                                    Label::NoMatch, Label::DontKnow};
inline constexpr std::string_view kReservedLexicalLabel = "LexicalMatch";

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);
constexpr bool is_significant(Label label) { return label == Label::Paraphrase || label == Label::MeaningMatch; }

struct Candidate {
    std::string candidate_id;  // query_id + ":" + rank
    std::string query_id;
    std::string quote_text;
    std::string chunk_id;
    std::string doc_id;
    std::string work_id;
    std::string hit_text;
    std::size_t rank = 0;
    std::size_t pool_size = 0;
    double score = 0.0;
    std::string author;
    std::string title;
    std::optional<int> year;
    std::string genre;
    std::string language;  // declared_language of the hit document
    std::string context_ref;
    std::string stage;
};

Json to_json(const Candidate& c);
Candidate candidate_from_json(const Json& j);

struct Annotation {
    std::string candidate_id;
    Label label = Label::NoMatch;
    std::string annotator_id;
    std::string created_at;  // ISO-8601 UTC
    double duration_seconds = 0.0;
};

Json to_json(const Annotation& a);

// Document metadata keyed by doc_id, as needed to render candidates.
using MetadataIndex = std::unordered_map<std::string, DocumentRecord>;
MetadataIndex index_metadata(std::vector<DocumentRecord> docs);

/// One candidate per plan entry. `pool` holds the ranked hits of the plan's
/// query; quotes maps query_id to quote text. Throws DataError naming any
/// plan rank that has no hit.
std::vector<Candidate> enqueue_candidates(const SamplingPlan& plan, const std::vector<RankedHit>& pool,
                                          const MetadataIndex& metadata, const ChunkCatalog& catalog,
                                          const std::map<std::string, std::string>& quotes);

struct QueryProgress {
    std::string query_id;
    std::size_t candidates = 0;
    std::size_t annotated = 0;
    std::map<Label, std::size_t> counts;
    std::size_t significant = 0;
    std::size_t dont_know = 0;
};

Json to_json(const QueryProgress& p, const DeepeningDecision& decision);

struct ImportResult {
    std::size_t imported = 0;
    std::size_t skipped_lexical = 0;
};

/// Candidate queue plus append-only label history. Mutations are
/// serialised through one exclusive lock; reads share. Leases live in memory
/// only and expire lazily when the queue is consulted.
class AnnotationStore {
public:
    using Clock = std::function<std::chrono::system_clock::time_point()>;
    static constexpr std::chrono::seconds kDefaultLease{600};

    explicit AnnotationStore(std::optional<std::filesystem::path> journal = std::nullopt,
                             Clock clock = [] { return std::chrono::system_clock::now(); },
                             std::chrono::seconds lease = kDefaultLease);

    /// Returns the number of candidates that were new.
    std::size_t enqueue(const std::vector<Candidate>& candidates);

    std::optional<Candidate> next_candidate(const std::string& annotator_id);
    Annotation submit_label(const std::string& candidate_id, Label label, const std::string& annotator_id,
                            double duration_seconds);
    /// Same, parsing the label; throws std::invalid_argument for values
    /// outside the taxonomy.
    Annotation submit_label(const std::string& candidate_id, std::string_view label, const std::string& annotator_id,
                            double duration_seconds);

    /// Current (non-superseded) annotations joined to their candidates,
    /// ordered by (query_id, rank).
    std::vector<Json> export_annotations(const std::optional<std::string>& query_id = std::nullopt) const;
    ImportResult import_annotations(const std::vector<Json>& rows);

    std::optional<Candidate> candidate(const std::string& candidate_id) const;
    std::vector<Annotation> history(const std::string& candidate_id) const;
    std::size_t history_size() const;
    std::vector<std::string> query_ids() const;
    QueryProgress progress(const std::string& query_id) const;

    /// Rewrites the journal as a minimal replay of the current state.
    void compact();

private:
    struct Entry {
        Candidate candidate;
        std::vector<std::size_t> history;  // indices into history_
        std::optional<std::string> lease_holder;
        std::chrono::system_clock::time_point lease_expiry{};
    };

    bool add_candidate_locked(const Candidate& c);
    void append_annotation_locked(Annotation a);
    void journal_write(const Json& row);
    void replay();

    std::optional<std::filesystem::path> journal_;
    Clock clock_;
    std::chrono::seconds lease_;

    mutable std::shared_mutex mu_;
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::vector<Annotation> history_;
};

std::string format_timestamp(std::chrono::system_clock::time_point tp);

}  // namespace reception
