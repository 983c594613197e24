#include "reception/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "reception/error.hpp"

namespace reception {

namespace {

constexpr std::array<std::string_view, kPosTagCount> kTagNames = {"NOUN", "VERB", "ADJ", "ADV",  "PRON", "DET",
                                                                  "ADP",  "NUM",  "CONJ", "PRT", ".",    "X"};

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// "stopped" -> "stopp" -> "stop"; l, s and z doubles are kept ("called", "passed").
std::string undouble(std::string stem) {
    const auto n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' && stem[n - 1] != 's' &&
        stem[n - 1] != 'z') {
        stem.pop_back();
    }
    return stem;
}

bool has_alnum(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

// ASCII letters and UTF-8 multibyte sequences; apostrophes and digits disqualify.
bool is_alphabetic(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u >= 0x80 || std::isalpha(u) != 0;
    });
}

bool is_punct_token(std::string_view s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; });
}

bool is_number_token(std::string_view s) {
    bool digit = false;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) digit = true;
        else if (c != '.' && c != ',') return false;
    }
    return digit;
}

std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, int prec = 6) { return v ? fmt(*v, prec) : std::string("NA"); }

std::string csv_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string_view to_string(PosTag tag) { return kTagNames[static_cast<std::size_t>(tag)]; }

std::optional<PosTag> parse_pos_tag(std::string_view s) {
    for (std::size_t i = 0; i < kTagNames.size(); ++i) {
        if (kTagNames[i] == s) return static_cast<PosTag>(i);
    }
    if (s == "PUNCT") return PosTag::Punct;
    return std::nullopt;
}

Lexicon load_lexicon(std::istream& in) {
    Lexicon lex;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (;;) {
            const auto tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (cols.size() < 2) throw DataError("lexicon line " + std::to_string(line_no) + ": expected word<TAB>TAG");
        const auto tag = parse_pos_tag(cols[1]);
        if (!tag) throw DataError("lexicon line " + std::to_string(line_no) + ": unknown tag '" + cols[1] + "'");
        LexiconEntry e{*tag, cols.size() > 2 ? lower_ascii(cols[2]) : std::string()};
        lex.emplace(lower_ascii(cols[0]), std::move(e));
    }
    return lex;
}

Lexicon load_lexicon_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon '" + path.string() + "'");
    return load_lexicon(in);
}

std::string strip_suffix(std::string_view w) {
    const std::string s(w);
    const auto n = s.size();
    if (n >= 5 && ends_with(s, "ies")) return s.substr(0, n - 3) + "y";
    if (ends_with(s, "sses")) return s.substr(0, n - 2);
    if (n >= 5 && ends_with(s, "es")) {
        const auto stem = std::string_view(s).substr(0, n - 2);
        if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") || ends_with(stem, "ch") ||
            ends_with(stem, "sh")) {
            return std::string(stem);
        }
    }
    if (n >= 4 && s.back() == 's' && !ends_with(s, "ss") && !ends_with(s, "us") && !ends_with(s, "is")) {
        return s.substr(0, n - 1);
    }
    if (n >= 5 && ends_with(s, "ed")) return undouble(s.substr(0, n - 2));
    if (n >= 6 && ends_with(s, "ing")) return undouble(s.substr(0, n - 3));
    return s;
}

RuleAnnotator::RuleAnnotator(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

PosTag RuleAnnotator::guess_tag(std::string_view token, std::string_view lower) const {
    if (is_punct_token(token)) return PosTag::Punct;
    if (is_number_token(token)) return PosTag::Num;
    if (auto it = lexicon_.find(std::string(lower)); it != lexicon_.end()) return it->second.tag;
    if (auto it = lexicon_.find(strip_suffix(lower)); it != lexicon_.end()) {
        const auto t = it->second.tag;
        if (t == PosTag::Noun || t == PosTag::Verb || t == PosTag::Adj) return t;
    }
    if (!has_alnum(token)) return PosTag::X;
    if (lower.size() > 4 && ends_with(lower, "ly")) return PosTag::Adv;
    if (lower.size() > 5 && (ends_with(lower, "ing") || ends_with(lower, "ed"))) return PosTag::Verb;
    for (std::string_view suf : {"tion", "sion", "ment", "ness", "ity", "ism", "ance", "ence", "ship", "hood"}) {
        if (lower.size() > suf.size() + 2 && ends_with(lower, suf)) return PosTag::Noun;
    }
    for (std::string_view suf : {"ous", "ful", "ive", "able", "ible", "less", "ish", "ical", "al", "ic"}) {
        if (lower.size() > suf.size() + 2 && ends_with(lower, suf)) return PosTag::Adj;
    }
    return PosTag::Noun;
}

std::vector<AnnotatedToken> RuleAnnotator::annotate(std::string_view text) const {
    std::vector<AnnotatedToken> out;
    for (const auto& tok : tokenize_with_offsets(text)) {
        AnnotatedToken a;
        a.text = std::string(tok.text);
        const auto lower = lower_ascii(tok.text);
        a.tag = guess_tag(tok.text, lower);
        if (auto it = lexicon_.find(lower); it != lexicon_.end()) {
            a.lemma = it->second.lemma.empty() ? lower : it->second.lemma;
        } else if (is_alphabetic(lower)) {
            a.lemma = strip_suffix(lower);
        } else {
            a.lemma = lower;
        }
        out.push_back(std::move(a));
    }
    return out;
}

Vocabulary load_vocabulary(std::istream& in) {
    Vocabulary v;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        v.insert(lower_ascii(line));
    }
    return v;
}

Vocabulary load_vocabulary_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary '" + path.string() + "'");
    return load_vocabulary(in);
}

LinguisticProfile profile(std::string_view text, const LinguisticAnnotator& annotator, const Vocabulary& vocabulary) {
    LinguisticProfile p;
    const auto tokens = annotator.annotate(text);
    std::array<std::size_t, kPosTagCount> counts{};
    for (const auto& t : tokens) {
        ++counts[static_cast<std::size_t>(t.tag)];
        if (!has_alnum(t.text)) continue;
        ++p.token_count;
        if (!vocabulary.contains(lower_ascii(t.text))) ++p.oov_count;
        if (is_alphabetic(t.text)) p.lemma_set.insert(t.lemma);
    }
    if (tokens.empty()) {
        p.degenerate = true;
        p.pos_distribution.fill(1.0 / static_cast<double>(kPosTagCount));
    } else {
        for (std::size_t i = 0; i < kPosTagCount; ++i) {
            p.pos_distribution[i] = static_cast<double>(counts[i]) / static_cast<double>(tokens.size());
        }
    }
    return p;
}

SetSimilarity jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return {0.0, true};
    std::size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    const auto uni = a.size() + b.size() - inter;
    return {static_cast<double>(inter) / static_cast<double>(uni), false};
}

SetSimilarity vocab_jaccard(const LinguisticProfile& a, const LinguisticProfile& b) {
    return jaccard(a.lemma_set, b.lemma_set);
}

std::optional<double> oov_rate(const LinguisticProfile& p) {
    if (p.token_count == 0) return std::nullopt;
    return 100.0 * static_cast<double>(p.oov_count) / static_cast<double>(p.token_count);
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("jensen_shannon: size mismatch");
    double js = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) js += 0.5 * p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) js += 0.5 * q[i] * std::log2(q[i] / m);
    }
    return std::clamp(js, 0.0, 1.0);
}

std::optional<double> pos_jsd(const LinguisticProfile& a, const LinguisticProfile& b) {
    if (a.degenerate || b.degenerate) return std::nullopt;
    return jensen_shannon(a.pos_distribution, b.pos_distribution);
}

std::string_view to_string(Quadrant q) {
    switch (q) {
        case Quadrant::TopP: return "TopP";
        case Quadrant::TopN: return "TopN";
        case Quadrant::TailN: return "TailN";
        case Quadrant::TailP: return "TailP";
        case Quadrant::Unbanded: return "Unbanded";
    }
    return "Unbanded";
}

std::vector<QuadrantAssignment> assign_quadrants(const std::vector<AnnotatedHit>& hits, bool english_only,
                                                 NegativeClass negatives) {
    std::vector<QuadrantAssignment> out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        if (h.rank == 0 || h.pool_size == 0) {
            throw DataError("candidate '" + h.candidate_id + "' has no percentile rank (rank/pool_size missing)");
        }
        if (english_only && h.language.empty()) {
            throw DataError("candidate '" + h.candidate_id + "' has no language tag");
        }
        QuadrantAssignment a{h.candidate_id, Quadrant::Unbanded};
        out.push_back(a);
        if (english_only && h.language != "en") continue;
        if (h.label == Label::DontKnow) continue;
        const bool significant = is_significant(h.label);
        if (!significant && negatives == NegativeClass::Strict && h.label != Label::NoMatch) continue;
        // percentile = rank / pool_size, compared in integers
        const auto r10 = 10 * h.rank;
        const auto top = r10 <= 3 * h.pool_size;
        const auto tail = r10 > 6 * h.pool_size && r10 <= 9 * h.pool_size;
        if (top) out.back().quadrant = significant ? Quadrant::TopP : Quadrant::TopN;
        else if (tail) out.back().quadrant = significant ? Quadrant::TailP : Quadrant::TailN;
    }
    return out;
}

std::vector<CandidateFeatures> compute_features(const std::vector<AnnotatedHit>& hits,
                                                const LinguisticAnnotator& annotator, const Vocabulary& vocabulary,
                                                unsigned threads) {
    std::vector<CandidateFeatures> out(hits.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& h = hits[i];
            const auto q = profile(h.quote_text, annotator, vocabulary);
            const auto t = profile(h.hit_text, annotator, vocabulary);
            const auto sim = vocab_jaccard(q, t);
            out[i] = {h.candidate_id, sim.value, sim.degenerate, oov_rate(q), oov_rate(t), pos_jsd(q, t)};
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, hits.size() / 16)));
    if (threads <= 1) {
        work(0, hits.size());
        return out;
    }
    {
        std::vector<std::jthread> pool;
        const auto per = (hits.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const auto b = std::min(hits.size(), t * per);
            const auto e = std::min(hits.size(), b + per);
            pool.emplace_back(work, b, e);
        }
    }
    return out;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd m;
    m.n = values.size();
    if (values.empty()) return m;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    m.mean = mean;
    m.std = std::sqrt(ss / static_cast<double>(values.size()));
    return m;
}

std::vector<FeatureSummary> quadrant_summary(const std::vector<QuadrantAssignment>& assignments,
                                             const std::vector<CandidateFeatures>& features) {
    std::unordered_map<std::string, const CandidateFeatures*> by_id;
    for (const auto& f : features) by_id.emplace(f.candidate_id, &f);
    std::vector<FeatureSummary> rows;
    for (const auto q : kBandedQuadrants) {
        FeatureSummary row;
        row.quadrant = q;
        std::vector<double> sim, qoov, hoov, pos;
        for (const auto& a : assignments) {
            if (a.quadrant != q) continue;
            ++row.n;
            auto it = by_id.find(a.candidate_id);
            if (it == by_id.end()) throw DataError("no features for candidate '" + a.candidate_id + "'");
            const auto& f = *it->second;
            sim.push_back(f.vocab_sim);
            if (f.quote_oov) qoov.push_back(*f.quote_oov);
            if (f.hit_oov) hoov.push_back(*f.hit_oov);
            if (f.pos_div) pos.push_back(*f.pos_div);
        }
        row.vocab_sim = mean_std(sim);
        row.quote_oov = mean_std(qoov);
        row.hit_oov = mean_std(hoov);
        row.pos_div = mean_std(pos);
        rows.push_back(row);
    }
    return rows;
}

std::string features_csv(const std::vector<CandidateFeatures>& features) {
    std::ostringstream out;
    out << "candidate_id,vocab_sim,vocab_sim_degenerate,quote_oov,hit_oov,pos_div\n";
    for (const auto& f : features) {
        out << csv_quote(f.candidate_id) << ',' << fmt(f.vocab_sim) << ',' << (f.vocab_sim_degenerate ? 1 : 0) << ','
            << fmt_opt(f.quote_oov) << ',' << fmt_opt(f.hit_oov) << ',' << fmt_opt(f.pos_div) << '\n';
    }
    return out.str();
}

std::string quadrants_csv(const std::vector<QuadrantAssignment>& assignments) {
    std::ostringstream out;
    out << "candidate_id,quadrant\n";
    for (const auto& a : assignments) out << csv_quote(a.candidate_id) << ',' << to_string(a.quadrant) << '\n';
    return out.str();
}

std::string summary_csv(const std::vector<FeatureSummary>& rows) {
    std::ostringstream out;
    out << "quadrant,n,vocab_sim_mean,vocab_sim_std,quote_oov_mean,quote_oov_std,hit_oov_mean,hit_oov_std,"
           "pos_div_mean,pos_div_std\n";
    for (const auto& r : rows) {
        out << to_string(r.quadrant) << ',' << r.n;
        for (const auto* m : {&r.vocab_sim, &r.quote_oov, &r.hit_oov, &r.pos_div}) {
            out << ',' << fmt_opt(m->mean) << ',' << fmt_opt(m->std);
        }
        out << '\n';
    }
    return out.str();
}

StopwordDetector::StopwordDetector() {
    auto words = [](std::initializer_list<const char*> list) {
        std::unordered_set<std::string> s;
        for (const auto* w : list) s.insert(w);
        return s;
    };
    profiles_.emplace_back("en", words({"the",  "and",   "of",   "to",   "in",    "is",    "that",  "it",   "was",
                                        "for",  "with",  "as",   "his",  "be",    "by",    "which", "not",  "this",
                                        "are",  "have",  "from", "but",  "or",    "they",  "their", "he",   "had",
                                        "we",   "you",   "all",  "will", "would", "there", "been",  "were", "these",
                                        "upon", "what",  "who",  "them", "our",   "shall", "may",   "than", "its"}));
    profiles_.emplace_back("fr", words({"le",   "la",   "les",  "des",   "du",    "et",   "est",  "une",  "dans",
                                        "que",  "qui",  "pour", "pas",   "par",   "sur",  "au",   "aux",  "ce",
                                        "cette", "il",  "elle", "sont",  "avec",  "ne",   "se",   "son",  "ses",
                                        "nous", "vous", "leur", "mais",  "ou",    "comme", "été", "être", "ont"}));
    profiles_.emplace_back("la", words({"et",    "in",   "est",  "non",   "ad",    "cum",   "quod", "qui",  "quae",
                                        "sed",   "ut",   "ab",   "ex",    "enim",  "autem", "esse", "sunt", "atque",
                                        "nec",   "per",  "hoc",  "quam",  "vel",   "etiam", "tamen", "ergo", "sic",
                                        "eius",  "nam",  "quia", "ubi",   "inter", "sive",  "ita",  "post"}));
    profiles_.emplace_back("it", words({"il",   "di",    "che",  "e",     "per",   "un",    "una",   "non",  "sono",
                                        "della", "del",  "nel",  "alla",  "gli",   "si",    "con",   "anche", "questo",
                                        "come", "più",   "ma",   "ed",    "dei",   "delle", "lo",    "degli", "nella",
                                        "essere", "questa", "sua", "suo", "quale", "quando", "molto"}));
    profiles_.emplace_back("es", words({"el",   "de",   "que",   "y",     "los",  "las",   "en",   "un",   "una",
                                        "por",  "con",  "para",  "se",    "no",   "es",    "del",  "al",   "lo",
                                        "como", "más",  "pero",  "sus",   "su",   "muy",   "ya",   "este", "esta",
                                        "está", "son",  "también", "porque", "cuando", "hay", "fue", "ser"}));
}

std::string StopwordDetector::detect(std::string_view text) const {
    std::vector<std::size_t> scores(profiles_.size(), 0);
    for (const auto& tok : tokenize(text)) {
        const auto lower = lower_ascii(tok);
        for (std::size_t i = 0; i < profiles_.size(); ++i) {
            if (profiles_[i].second.contains(lower)) ++scores[i];
        }
    }
    const auto best = std::max_element(scores.begin(), scores.end());  // first maximum wins ties
    if (*best == 0) return "und";
    return profiles_[static_cast<std::size_t>(best - scores.begin())].first;
}

std::map<std::string, double> token_baseline(const std::vector<DocumentRecord>& docs) {
    std::map<std::string, double> out;
    for (const auto& d : docs) {
        std::size_t words = 0;
        for (const auto& t : tokenize_with_offsets(d.text)) {
            if (has_alnum(t.text)) ++words;
        }
        out[d.declared_language.empty() ? "unknown" : d.declared_language] += static_cast<double>(words);
    }
    return out;
}

LanguageTable language_distribution(const std::vector<AnnotatedHit>& hits, const std::vector<std::string>& languages,
                                    const std::map<std::string, double>& baseline) {
    if (hits.size() != languages.size()) throw std::invalid_argument("language_distribution: one language per hit");
    const double baseline_total = std::accumulate(baseline.begin(), baseline.end(), 0.0,
                                                  [](double acc, const auto& kv) { return acc + kv.second; });
    std::map<std::string, double> base_pct;
    for (const auto& [lang, n] : baseline) base_pct[lang] = baseline_total > 0 ? 100.0 * n / baseline_total : 0.0;

    std::set<std::string> all(languages.begin(), languages.end());
    for (const auto& [lang, n] : baseline) all.insert(lang);
    LanguageTable table;
    table.languages.assign(all.begin(), all.end());
    std::stable_sort(table.languages.begin(), table.languages.end(), [&](const std::string& a, const std::string& b) {
        const double pa = base_pct.contains(a) ? base_pct.at(a) : 0.0;
        const double pb = base_pct.contains(b) ? base_pct.at(b) : 0.0;
        return pa != pb ? pa > pb : a < b;
    });

    for (const auto label : kAllLabels) {
        std::map<std::string, std::size_t> counts;
        std::size_t n = 0;
        for (std::size_t i = 0; i < hits.size(); ++i) {
            if (hits[i].label != label) continue;
            ++counts[languages[i]];
            ++n;
        }
        if (n == 0) continue;
        LanguageRow row;
        row.name = std::string(to_string(label));
        row.n = n;
        for (const auto& lang : table.languages) {
            const auto it = counts.find(lang);
            const double share = it == counts.end() ? 0.0 : 100.0 * static_cast<double>(it->second) / n;
            row.pct[lang] = share;
            const double b = base_pct.contains(lang) ? base_pct.at(lang) : 0.0;
            row.enrichment[lang] = b > 0 ? std::optional<double>(share / b) : std::nullopt;
        }
        table.rows.push_back(std::move(row));
    }

    LanguageRow base;
    base.name = "Baseline";
    base.n = static_cast<std::size_t>(baseline_total);
    for (const auto& lang : table.languages) {
        base.pct[lang] = base_pct.contains(lang) ? base_pct.at(lang) : 0.0;
        base.enrichment[lang] = base.pct[lang] > 0 ? std::optional<double>(1.0) : std::nullopt;
    }
    table.rows.push_back(std::move(base));
    return table;
}

std::string language_table_csv(const LanguageTable& table) {
    std::ostringstream out;
    out << "row,n";
    for (const auto& l : table.languages) out << ',' << l << "_pct";
    for (const auto& l : table.languages) out << ',' << l << "_enrichment";
    out << '\n';
    for (const auto& r : table.rows) {
        out << r.name << ',' << r.n;
        for (const auto& l : table.languages) out << ',' << fmt(r.pct.at(l), 3);
        for (const auto& l : table.languages) out << ',' << fmt_opt(r.enrichment.at(l), 3);
        out << '\n';
    }
    return out.str();
}

}  // namespace reception
