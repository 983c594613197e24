#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "reception/corpus.hpp"
#include "reception/stats.hpp"

namespace reception {

// Universal part-of-speech tagset (12 coarse categories).
enum class PosTag { Noun, Verb, Adj, Adv, Pron, Det, Adp, Num, Conj, Prt, Punct, X };
inline constexpr std::size_t kPosTagCount = 12;

std::string_view to_string(PosTag tag);
std::optional<PosTag> parse_pos_tag(std::string_view s);

struct AnnotatedToken {
    std::string text;
    std::string lemma;  // lowercased
    PosTag tag = PosTag::X;
};

class LinguisticAnnotator {
public:
    virtual ~LinguisticAnnotator() = default;
    virtual std::vector<AnnotatedToken> annotate(std::string_view text) const = 0;
};

struct LexiconEntry {
    PosTag tag = PosTag::X;
    std::string lemma;  // empty: derive by suffix stripping
};

using Lexicon = std::unordered_map<std::string, LexiconEntry>;

/// word<TAB>TAG[<TAB>lemma] lines; '#' starts a comment.
Lexicon load_lexicon(std::istream& in);
Lexicon load_lexicon_file(const std::filesystem::path& path);

/// Suffix-stripping lemmatizer for lowercased English words.
std::string strip_suffix(std::string_view lower_word);

/// Rule tokenizer, lexicon lookup, suffix heuristics for unknown words.
class RuleAnnotator final : public LinguisticAnnotator {
public:
    explicit RuleAnnotator(Lexicon lexicon = {});
    std::vector<AnnotatedToken> annotate(std::string_view text) const override;

private:
    PosTag guess_tag(std::string_view token, std::string_view lower) const;
    Lexicon lexicon_;
};

using Vocabulary = std::unordered_set<std::string>;
Vocabulary load_vocabulary(std::istream& in);
Vocabulary load_vocabulary_file(const std::filesystem::path& path);

struct LinguisticProfile {
    std::size_t token_count = 0;  // word tokens (punctuation excluded)
    std::set<std::string> lemma_set;
    std::size_t oov_count = 0;
    std::array<double, kPosTagCount> pos_distribution{};
    bool degenerate = false;  // no tokens at all; distribution is uniform
};

LinguisticProfile profile(std::string_view text, const LinguisticAnnotator& annotator, const Vocabulary& vocabulary);

struct SetSimilarity {
    double value = 0.0;
    bool degenerate = false;  // both sets empty
};

SetSimilarity jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
SetSimilarity vocab_jaccard(const LinguisticProfile& a, const LinguisticProfile& b);

/// Percentage of OOV word tokens; nullopt for an empty profile.
std::optional<double> oov_rate(const LinguisticProfile& p);

/// Base-2 Jensen-Shannon divergence. Throws std::invalid_argument on size
/// mismatch.
double jensen_shannon(std::span<const double> p, std::span<const double> q);
std::optional<double> pos_jsd(const LinguisticProfile& a, const LinguisticProfile& b);

enum class Quadrant { TopP, TopN, TailN, TailP, Unbanded };
inline constexpr std::array<Quadrant, 4> kBandedQuadrants = {Quadrant::TopP, Quadrant::TopN, Quadrant::TailN,
                                                             Quadrant::TailP};
std::string_view to_string(Quadrant q);

// Which labels count as non-significant for the N quadrants.
enum class NegativeClass {
    Inclusive,  // TopicalMatch and NoMatch
    Strict,     // NoMatch only; TopicalMatch is Unbanded
};

struct QuadrantAssignment {
    std::string candidate_id;
    Quadrant quadrant = Quadrant::Unbanded;
};

/// Bands on rank / pool_size: top is <= 30%, tail is (60%, 90%].
/// Throws DataError when rank or pool_size is missing (zero), or when
/// english_only is set and a hit has no language tag.
std::vector<QuadrantAssignment> assign_quadrants(const std::vector<AnnotatedHit>& hits, bool english_only = true,
                                                 NegativeClass negatives = NegativeClass::Inclusive);

struct CandidateFeatures {
    std::string candidate_id;
    double vocab_sim = 0.0;
    bool vocab_sim_degenerate = false;
    std::optional<double> quote_oov;
    std::optional<double> hit_oov;
    std::optional<double> pos_div;
};

/// Features of each (quote_text, hit_text) pair, in input order.
std::vector<CandidateFeatures> compute_features(const std::vector<AnnotatedHit>& hits,
                                                const LinguisticAnnotator& annotator, const Vocabulary& vocabulary,
                                                unsigned threads = 0);

struct MeanStd {
    std::size_t n = 0;  // defined values
    std::optional<double> mean;
    std::optional<double> std;  // population
};

MeanStd mean_std(std::span<const double> values);

struct FeatureSummary {
    Quadrant quadrant = Quadrant::Unbanded;
    std::size_t n = 0;
    MeanStd vocab_sim;
    MeanStd quote_oov;
    MeanStd hit_oov;
    MeanStd pos_div;
};

/// One row per banded quadrant, in TopP, TopN, TailN, TailP order. Throws
/// DataError when a banded candidate has no features.
std::vector<FeatureSummary> quadrant_summary(const std::vector<QuadrantAssignment>& assignments,
                                             const std::vector<CandidateFeatures>& features);

std::string features_csv(const std::vector<CandidateFeatures>& features);
std::string quadrants_csv(const std::vector<QuadrantAssignment>& assignments);
std::string summary_csv(const std::vector<FeatureSummary>& rows);

class LanguageDetector {
public:
    virtual ~LanguageDetector() = default;
    /// ISO 639-1 style tag, or "und" when undecidable.
    virtual std::string detect(std::string_view text) const = 0;
};

/// Stopword-profile scorer for en, fr, la, it, es.
class StopwordDetector final : public LanguageDetector {
public:
    StopwordDetector();
    std::string detect(std::string_view text) const override;

private:
    std::vector<std::pair<std::string, std::unordered_set<std::string>>> profiles_;
};

/// Word tokens per declared_language ("unknown" when empty).
std::map<std::string, double> token_baseline(const std::vector<DocumentRecord>& docs);

struct LanguageRow {
    std::string name;  // label name or "Baseline"
    std::size_t n = 0;
    std::map<std::string, double> pct;
    std::map<std::string, std::optional<double>> enrichment;  // share / baseline share
};

struct LanguageTable {
    std::vector<std::string> languages;  // by baseline share desc, then name
    std::vector<LanguageRow> rows;       // one per label with hits, then Baseline
};

/// languages[i] is the detected language of hits[i].
LanguageTable language_distribution(const std::vector<AnnotatedHit>& hits, const std::vector<std::string>& languages,
                                    const std::map<std::string, double>& baseline);
std::string language_table_csv(const LanguageTable& table);

}  // namespace reception
