#include "reception/demo.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <stdexcept>
#include <utility>

#include "reception/error.hpp"
#include "reception/random.hpp"

namespace reception {

namespace {

using Pair = std::pair<const char*, const char*>;  // word, substitute

constexpr std::size_t kTopicCount = 8;
constexpr std::size_t kPairsPerTopic = 14;

// clang-format off
const std::array<std::array<Pair, kPairsPerTopic>, kTopicCount> kTopics = {{
    {{{"mind", "intellect"}, {"ideas", "notions"}, {"understanding", "comprehension"}, {"thought", "reflection"},
      {"perceive", "discern"}, {"knowledge", "learning"}, {"reason", "judgment"}, {"senses", "faculties"},
      {"clear", "distinct"}, {"simple", "plain"}, {"objects", "things"}, {"experience", "observation"},
      {"innate", "inborn"}, {"principles", "maxims"}}},
    {{{"words", "terms"}, {"signs", "marks"}, {"speech", "discourse"}, {"names", "titles"},
      {"meaning", "signification"}, {"language", "tongue"}, {"abuse", "misuse"}, {"common", "general"},
      {"use", "practice"}, {"obscure", "doubtful"}, {"dispute", "controversy"}, {"learned", "scholarly"},
      {"define", "explain"}, {"confusion", "disorder"}}},
    {{{"liberty", "freedom"}, {"will", "volition"}, {"power", "ability"}, {"action", "deed"},
      {"choose", "prefer"}, {"desire", "wish"}, {"uneasiness", "disquiet"}, {"happiness", "felicity"},
      {"pleasure", "delight"}, {"pain", "suffering"}, {"determine", "decide"}, {"suspend", "delay"},
      {"good", "benefit"}, {"necessity", "constraint"}}},
    {{{"person", "self"}, {"identity", "sameness"}, {"consciousness", "awareness"}, {"memory", "remembrance"},
      {"substance", "essence"}, {"body", "frame"}, {"soul", "spirit"}, {"past", "former"},
      {"actions", "doings"}, {"same", "identical"}, {"change", "alteration"}, {"punishment", "penalty"},
      {"life", "existence"}, {"continued", "enduring"}}},
    {{{"government", "authority"}, {"property", "possessions"}, {"consent", "agreement"}, {"society", "community"},
      {"law", "statute"}, {"nature", "creation"}, {"people", "subjects"}, {"magistrate", "ruler"},
      {"labour", "industry"}, {"estate", "fortune"}, {"rights", "privileges"}, {"civil", "political"},
      {"preserve", "protect"}, {"commonwealth", "state"}}},
    {{{"children", "youth"}, {"education", "instruction"}, {"tutor", "teacher"}, {"virtue", "goodness"},
      {"habits", "customs"}, {"manners", "behaviour"}, {"discipline", "training"}, {"parents", "fathers"},
      {"gentle", "mild"}, {"play", "recreation"}, {"lessons", "studies"}, {"early", "timely"},
      {"character", "disposition"}, {"shame", "disgrace"}}},
    {{{"religion", "faith"}, {"church", "congregation"}, {"toleration", "forbearance"}, {"conscience", "heart"},
      {"worship", "devotion"}, {"opinions", "beliefs"}, {"salvation", "redemption"}, {"force", "compulsion"},
      {"persuade", "convince"}, {"scripture", "revelation"}, {"sincere", "earnest"}, {"errors", "mistakes"},
      {"charity", "kindness"}, {"peace", "concord"}}},
    {{{"motion", "movement"}, {"particles", "corpuscles"}, {"qualities", "properties"}, {"colour", "hue"},
      {"figure", "shape"}, {"solidity", "firmness"}, {"extension", "magnitude"}, {"bodies", "masses"},
      {"secondary", "derived"}, {"primary", "original"}, {"powers", "capacities"}, {"heat", "warmth"},
      {"light", "brightness"}, {"experiments", "trials"}}},
}};

const std::vector<const char*> kFunctionWords = {
    "the", "of", "and", "to", "in", "that", "is", "it", "as", "by", "which", "for", "be", "not", "we",
    "they", "with", "from", "our", "all", "this", "are", "have", "so", "may", "but", "or", "their", "them",
    "when", "can", "no", "what", "if", "must", "into", "these", "only", "such", "any", "more", "upon"};

const std::vector<const char*> kGeneralWords = {
    "account", "answer", "attention", "begin", "certain", "city", "country", "course", "daily", "degree",
    "doctor", "draw", "earth", "england", "evening", "example", "family", "father", "field", "friend",
    "garden", "hand", "history", "house", "journey", "king", "letter", "london", "morning", "mother",
    "night", "number", "ocean", "paper", "river", "road", "season", "ship", "story", "street",
    "summer", "table", "town", "travel", "voyage", "water", "weather", "window", "winter", "year",
    "army", "battle", "bread", "castle", "coffee", "crown", "dinner", "farmer", "forest", "harbour",
    "horse", "island", "lady", "market", "merchant", "mountain", "music", "news", "officer", "parish",
    "picture", "price", "queen", "rain", "servant", "silver", "soldier", "stone", "sugar", "tea",
    "theatre", "trade", "village", "wine", "wood", "writer", "young", "old", "small", "large",
    "rich", "poor", "long", "short", "new", "little", "great", "many", "much", "every"};

const std::vector<const char*> kFrenchWords = {
    "le", "la", "les", "des", "du", "et", "est", "une", "dans", "que", "qui", "pour", "pas", "par", "sur",
    "au", "ce", "cette", "il", "elle", "sont", "avec", "ne", "se", "son", "nous", "vous", "leur", "mais",
    "comme", "roi", "ville", "homme", "esprit", "raison", "lettre", "jour", "temps", "monde", "amour",
    "histoire", "nature", "pays", "maison", "guerre", "paix", "livre", "philosophe", "idées", "loi"};

const std::vector<const char*> kAuthors = {
    "Astell, Mary", "Berkeley, George", "Burnet, Thomas", "Clarke, Samuel", "Collins, Anthony",
    "Defoe, Daniel", "Edwards, John", "Fielding, Henry", "Hume, David", "Hutcheson, Francis",
    "Law, Edmund", "Lee, Henry", "Masham, Damaris", "Norris, John", "Reid, Thomas", "Sergeant, John",
    "Stillingfleet, Edward", "Swift, Jonathan", "Watts, Isaac", "", ""};

const std::vector<const char*> kGenres = {"Philosophy", "Religion", "Education", "Politics", "Literature",
                                          "History", "Science", ""};
// clang-format on

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[uniform_below(rng, v.size())];
}

class Generator {
public:
    explicit Generator(const DemoOptions& o) : opts_(o), rng_(o.seed) {}

    DemoCorpus run();

private:
    std::string sentence(std::optional<std::size_t> topic, std::size_t min_words, std::size_t max_words);
    std::string passage(std::optional<std::size_t> topic, std::size_t min_words);
    std::string french_passage(std::size_t min_words);
    std::string quote_text(std::size_t topic);
    std::string rewrite(const std::string& quote, std::size_t topic, double substitution);
    DocumentRecord document(std::string doc_id, std::string work_id, std::string text);
    bool aligns(std::string_view quote, std::string_view text) const;

    DemoOptions opts_;
    Rng rng_;
    AlignmentParams params_{};
    std::size_t title_counter_ = 0;
};

std::string Generator::sentence(std::optional<std::size_t> topic, std::size_t min_words, std::size_t max_words) {
    const auto n = min_words + uniform_below(rng_, max_words - min_words + 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = uniform_unit(rng_);
        std::string w;
        if (topic && u < 0.45) {
            w = kTopics[*topic][uniform_below(rng_, kPairsPerTopic)].first;
        } else if (u < (topic ? 0.9 : 0.5)) {
            w = pick(rng_, kFunctionWords);
        } else {
            w = pick(rng_, kGeneralWords);
        }
        if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        if (!out.empty()) out += ' ';
        out += w;
    }
    out += '.';
    return out;
}

std::string Generator::passage(std::optional<std::size_t> topic, std::size_t min_words) {
    std::string out;
    std::size_t words = 0;
    while (words < min_words) {
        auto s = sentence(topic, 8, 14);
        words += static_cast<std::size_t>(std::count(s.begin(), s.end(), ' ')) + 1;
        if (!out.empty()) out += ' ';
        out += s;
    }
    return out;
}

std::string Generator::french_passage(std::size_t min_words) {
    std::string out;
    for (std::size_t i = 0; i < min_words; ++i) {
        std::string w = pick(rng_, kFrenchWords);
        if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        if (!out.empty()) out += ' ';
        out += w;
        if (i + 1 == min_words || uniform_below(rng_, 12) == 0) out += '.';
    }
    return out;
}

std::string Generator::quote_text(std::size_t topic) {
    for (;;) {
        std::string q;
        while (utf8_length(q) < 180) {
            if (!q.empty()) q += ' ';
            q += sentence(topic, 8, 12);
        }
        if (utf8_length(q) <= 260) return q;
    }
}

// Substitutes topic words with their pair and shuffles word order within
// each sentence; sentence order is reversed.
std::string Generator::rewrite(const std::string& quote, std::size_t topic, double substitution) {
    std::vector<std::vector<std::string>> sentences(1);
    for (const auto& tok : tokenize(quote)) {
        if (tok == ".") {
            sentences.emplace_back();
            continue;
        }
        std::string w = tok;
        for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        for (const auto& [word, sub] : kTopics[topic]) {
            if (w == word && uniform_unit(rng_) < substitution) {
                w = sub;
                break;
            }
        }
        sentences.back().push_back(std::move(w));
    }
    std::string out;
    for (auto it = sentences.rbegin(); it != sentences.rend(); ++it) {
        auto& words = *it;
        if (words.empty()) continue;
        for (std::size_t i = words.size(); i > 1; --i) std::swap(words[i - 1], words[uniform_below(rng_, i)]);
        words[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(words[0][0])));
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (!out.empty()) out += ' ';
            out += words[i];
        }
        out += '.';
    }
    return out;
}

bool Generator::aligns(std::string_view quote, std::string_view text) const {
    return !align_pair(quote, text, params_).empty();
}

DocumentRecord Generator::document(std::string doc_id, std::string work_id, std::string text) {
    DocumentRecord d;
    d.doc_id = std::move(doc_id);
    d.work_id = std::move(work_id);
    d.title = "Treatise " + std::to_string(++title_counter_);
    d.author = pick(rng_, kAuthors);
    if (uniform_below(rng_, 10) != 0) d.year = 1690 + static_cast<int>(uniform_below(rng_, 110));
    d.genre = pick(rng_, kGenres);
    d.declared_language = "en";
    d.text = std::move(text);
    return d;
}

DemoCorpus Generator::run() {
    DemoCorpus corpus;
    corpus.source_doc_id = "src-0";
    corpus.source_work_id = "W-SRC";

    // Source: quotes separated by untopical filler.
    std::string source = passage(std::nullopt, 30);
    for (std::size_t i = 0; i < opts_.quotes; ++i) {
        DemoQuote q;
        q.index = i;
        q.text = quote_text(i % kTopicCount);
        source += ' ';
        q.source_span = {source.size(), source.size() + q.text.size()};
        source += q.text;
        source += ' ';
        source += passage(std::nullopt, 25);
        corpus.quotes.push_back(std::move(q));
    }

    std::vector<std::pair<DocumentRecord, DemoPlant>> docs;
    auto add = [&](DocumentRecord d, PlantKind kind, std::optional<std::size_t> qi, Span span) {
        DemoPlant p{d.doc_id, d.work_id, kind, qi, span};
        docs.emplace_back(std::move(d), std::move(p));
    };

    auto src = document(corpus.source_doc_id, corpus.source_work_id, source);
    src.author = "Locke, John";
    src.year = 1690;
    src.genre = "Philosophy";
    src.title = "An Essay Concerning Humane Understanding";
    // An abridgement in the source's own work: excerpts that must not count
    // as external reuse.
    auto abridged = src;
    abridged.doc_id = "src-1";
    abridged.year = 1694;
    abridged.title = "An Abridgment of the Essay";
    abridged.text = passage(std::nullopt, 20);
    for (std::size_t i = 0; i < std::min<std::size_t>(2, corpus.quotes.size()); ++i) {
        abridged.text += ' ' + corpus.quotes[i].text + ' ' + passage(std::nullopt, 20);
    }
    const auto abridged_size = abridged.text.size();
    add(std::move(src), PlantKind::Source, std::nullopt, {0, source.size()});
    add(std::move(abridged), PlantKind::SourceEdition, std::nullopt, {0, abridged_size});

    std::size_t work_counter = 0;
    auto next_work = [&] {
        char buf[32];
        std::snprintf(buf, sizeof buf, "W-%04zu", ++work_counter);
        return std::string(buf);
    };

    for (const auto& q : corpus.quotes) {
        const auto topic = q.index % kTopicCount;
        for (std::size_t j = 0; j < opts_.verbatim_per_quote; ++j) {
            std::string text = passage(std::nullopt, 20 + uniform_below(rng_, 120));
            text += ' ';
            const Span span{text.size(), text.size() + q.text.size()};
            text += q.text;
            text += ' ';
            text += passage(std::nullopt, 20 + uniform_below(rng_, 120));
            add(document("vb-" + std::to_string(q.index) + "-" + std::to_string(j), next_work(), std::move(text)),
                PlantKind::Verbatim, q.index, span);
        }
        for (std::size_t j = 0; j < opts_.paraphrases_per_quote; ++j) {
            const bool meaning = j % 2 == 1;
            std::string para;
            for (int attempt = 0;; ++attempt) {
                para = rewrite(q.text, topic, meaning ? 0.8 : 0.5);
                if (!aligns(q.text, para)) break;
                if (attempt > 200) throw std::logic_error("demo: cannot build a non-aligning paraphrase");
            }
            const Span span{0, para.size()};
            std::string text = para + ' ' + passage(std::nullopt, 12);
            add(document("pp-" + std::to_string(q.index) + "-" + std::to_string(j), next_work(), std::move(text)),
                meaning ? PlantKind::MeaningVariant : PlantKind::Paraphrase, q.index, span);
        }
        for (std::size_t j = 0; j < opts_.topical_per_quote; ++j) {
            std::string text;
            for (int attempt = 0;; ++attempt) {
                text = passage(topic, 60 + uniform_below(rng_, 40));
                if (!aligns(q.text, text)) break;
                if (attempt > 200) throw std::logic_error("demo: cannot build a non-aligning topical document");
            }
            const Span span{0, text.size()};
            add(document("tp-" + std::to_string(q.index) + "-" + std::to_string(j), next_work(), std::move(text)),
                PlantKind::Topical, q.index, span);
        }
    }

    for (std::size_t i = 0; i < opts_.noise_docs; ++i) {
        // every tenth noise document is a second edition of the previous one
        if (i % 10 == 9 && !docs.empty() && docs.back().second.kind == PlantKind::Noise) {
            auto ed = docs.back().first;
            ed.doc_id = "nz-" + std::to_string(i);
            if (ed.year) ed.year = *ed.year + 5;
            add(std::move(ed), PlantKind::Noise, std::nullopt, {});
            continue;
        }
        add(document("nz-" + std::to_string(i), next_work(), passage(std::nullopt, 60 + uniform_below(rng_, 240))),
            PlantKind::Noise, std::nullopt, {});
    }
    for (std::size_t i = 0; i < opts_.french_docs; ++i) {
        auto d = document("fr-" + std::to_string(i), next_work(), french_passage(80 + uniform_below(rng_, 200)));
        d.declared_language = "fr";
        add(std::move(d), PlantKind::Noise, std::nullopt, {});
    }

    // Interleave kinds; OCR noise is applied per letter, so planted spans
    // keep their offsets.
    for (std::size_t i = docs.size(); i > 1; --i) std::swap(docs[i - 1], docs[uniform_below(rng_, i)]);
    const std::uint64_t ocr_seed = rng_();
    for (auto& [doc, plant] : docs) {
        if (opts_.ocr_rate > 0.0 && plant.kind != PlantKind::Source) {
            doc.text = corrupt_ocr(doc.text, opts_.ocr_rate, ocr_seed ^ fnv1a(doc.doc_id));
        }
        corpus.documents.push_back(std::move(doc));
        corpus.plants.push_back(std::move(plant));
    }
    return corpus;
}

}  // namespace

void DemoOptions::validate() const {
    if (quotes == 0) throw std::invalid_argument("demo: quotes must be positive");
    if (ocr_rate < 0.0 || ocr_rate > 1.0) throw std::invalid_argument("demo: ocr_rate must be in [0, 1]");
}

std::string_view to_string(PlantKind k) {
    switch (k) {
        case PlantKind::Source: return "source";
        case PlantKind::SourceEdition: return "source_edition";
        case PlantKind::Verbatim: return "verbatim";
        case PlantKind::Paraphrase: return "paraphrase";
        case PlantKind::MeaningVariant: return "meaning_variant";
        case PlantKind::Topical: return "topical";
        case PlantKind::Noise: return "noise";
    }
    return "noise";
}

std::optional<PlantKind> parse_plant_kind(std::string_view s) {
    for (auto k : {PlantKind::Source, PlantKind::SourceEdition, PlantKind::Verbatim, PlantKind::Paraphrase,
                   PlantKind::MeaningVariant, PlantKind::Topical, PlantKind::Noise}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

DemoCorpus make_demo_corpus(const DemoOptions& options) {
    options.validate();
    return Generator(options).run();
}

std::string corrupt_ocr(std::string_view text, double rate, std::uint64_t seed) {
    std::string out(text);
    if (rate <= 0.0) return out;
    Rng rng(seed);
    for (auto& c : out) {
        const auto u = static_cast<unsigned char>(c);
        if (!std::isalpha(u) || u >= 0x80) continue;
        if (uniform_unit(rng) >= rate) continue;
        char r;
        do {
            r = static_cast<char>('a' + uniform_below(rng, 26));
        } while (r == std::tolower(u));
        c = r;
    }
    return out;
}

Json to_json(const DemoPlant& p) {
    Json j;
    j["doc_id"] = p.doc_id;
    j["work_id"] = p.work_id;
    j["kind"] = to_string(p.kind);
    j["quote_index"] = p.quote_index ? Json(*p.quote_index) : Json(nullptr);
    j["target_start"] = p.target_span.begin;
    j["target_end"] = p.target_span.end;
    return j;
}

DemoPlant plant_from_json(const Json& j) {
    DemoPlant p;
    try {
        p.doc_id = j.at("doc_id").get<std::string>();
        p.work_id = j.at("work_id").get<std::string>();
        const auto kind = parse_plant_kind(j.at("kind").get<std::string>());
        if (!kind) throw DataError("unknown plant kind");
        p.kind = *kind;
        if (!j.at("quote_index").is_null()) p.quote_index = j.at("quote_index").get<std::size_t>();
        p.target_span = {j.at("target_start").get<std::size_t>(), j.at("target_end").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad ground-truth row: ") + e.what());
    }
    return p;
}

Json to_json(const DemoQuote& q) {
    Json j;
    j["index"] = q.index;
    j["text"] = q.text;
    j["source_start"] = q.source_span.begin;
    j["source_end"] = q.source_span.end;
    return j;
}

DemoQuote demo_quote_from_json(const Json& j) {
    try {
        return {j.at("index").get<std::size_t>(), j.at("text").get<std::string>(),
                {j.at("source_start").get<std::size_t>(), j.at("source_end").get<std::size_t>()}};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad demo quote row: ") + e.what());
    }
}

Label simulated_label(const std::vector<DemoPlant>& plants, std::size_t quote_index, const std::string& doc_id) {
    for (const auto& p : plants) {
        if (p.doc_id != doc_id) continue;
        if (p.quote_index == quote_index) {
            switch (p.kind) {
                case PlantKind::Verbatim:
                case PlantKind::Paraphrase: return Label::Paraphrase;
                case PlantKind::MeaningVariant: return Label::MeaningMatch;
                case PlantKind::Topical: return Label::TopicalMatch;
                default: break;
            }
        }
        if (p.kind == PlantKind::Noise && fnv1a(doc_id + "#" + std::to_string(quote_index)) % 17 == 0) {
            return Label::DontKnow;
        }
        return Label::NoMatch;
    }
    return Label::NoMatch;
}

std::vector<std::string> demo_vocabulary() {
    std::set<std::string> words;
    for (const auto& topic : kTopics) {
        for (const auto& [w, s] : topic) {
            words.insert(w);
            words.insert(s);
        }
    }
    for (const auto* w : kFunctionWords) words.insert(w);
    for (const auto* w : kGeneralWords) words.insert(w);
    return {words.begin(), words.end()};
}

}  // namespace reception
