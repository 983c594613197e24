#include "reception/annotate.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "reception/error.hpp"

namespace reception {

std::string_view to_string(Label label) {
    switch (label) {
        case Label::Paraphrase: return "Paraphrase";
        case Label::MeaningMatch: return "MeaningMatch";
        case Label::TopicalMatch: return "TopicalMatch";
        case Label::NoMatch: return "NoMatch";
        case Label::DontKnow: return "DontKnow";
    }
    return "NoMatch";
}

std::optional<Label> parse_label(std::string_view text) {
    for (const auto l : kAllLabels) {
        if (text == to_string(l)) return l;
    }
    return std::nullopt;
}

std::string format_timestamp(std::chrono::system_clock::time_point tp) {
    using namespace std::chrono;
    const auto ms = duration_cast<milliseconds>(tp.time_since_epoch()).count();
    const std::time_t secs = static_cast<std::time_t>(ms / 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms % 1000));
    return buf;
}

Json to_json(const Candidate& c) {
    Json j;
    j["candidate_id"] = c.candidate_id;
    j["query_id"] = c.query_id;
    j["rank"] = c.rank;
    j["pool_size"] = c.pool_size;
    j["score"] = c.score;
    j["chunk_id"] = c.chunk_id;
    j["doc_id"] = c.doc_id;
    j["work_id"] = c.work_id;
    j["author"] = c.author;
    j["title"] = c.title;
    j["year"] = c.year ? Json(*c.year) : Json(nullptr);
    j["genre"] = c.genre;
    j["language"] = c.language;
    j["stage"] = c.stage;
    j["context_ref"] = c.context_ref;
    j["quote_text"] = c.quote_text;
    j["hit_text"] = c.hit_text;
    return j;
}

Candidate candidate_from_json(const Json& j) {
    try {
        Candidate c;
        c.candidate_id = j.at("candidate_id").get<std::string>();
        c.query_id = j.at("query_id").get<std::string>();
        c.rank = j.at("rank").get<std::size_t>();
        c.pool_size = j.value("pool_size", std::size_t{0});
        c.score = j.value("score", 0.0);
        c.chunk_id = jsonl::get_string(j, "chunk_id");
        c.doc_id = jsonl::get_string(j, "doc_id");
        c.work_id = jsonl::get_string(j, "work_id");
        c.author = jsonl::get_string(j, "author");
        c.title = jsonl::get_string(j, "title");
        if (auto it = j.find("year"); it != j.end() && it->is_number_integer()) c.year = it->get<int>();
        c.genre = jsonl::get_string(j, "genre");
        c.language = jsonl::get_string(j, "language");
        c.stage = jsonl::get_string(j, "stage");
        c.context_ref = jsonl::get_string(j, "context_ref");
        c.quote_text = jsonl::get_string(j, "quote_text");
        c.hit_text = jsonl::get_string(j, "hit_text");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad candidate record: ") + e.what());
    }
}

Json to_json(const Annotation& a) {
    Json j;
    j["candidate_id"] = a.candidate_id;
    j["label"] = to_string(a.label);
    j["annotator"] = a.annotator_id;
    j["created_at"] = a.created_at;
    j["duration_seconds"] = a.duration_seconds;
    return j;
}

Json to_json(const QueryProgress& p, const DeepeningDecision& decision) {
    Json j;
    j["query_id"] = p.query_id;
    j["candidates"] = p.candidates;
    j["annotated"] = p.annotated;
    Json counts;
    for (const auto l : kAllLabels) {
        auto it = p.counts.find(l);
        counts[std::string(to_string(l))] = it == p.counts.end() ? 0 : it->second;
    }
    j["counts"] = std::move(counts);
    j["significant"] = p.significant;
    j["significant_density"] =
        decision.significant_density ? Json(*decision.significant_density) : Json(nullptr);
    j["threshold"] = decision.threshold;
    j["decision"] = decision.deepen ? "deepen" : "stop";
    return j;
}

MetadataIndex index_metadata(std::vector<DocumentRecord> docs) {
    MetadataIndex out;
    out.reserve(docs.size());
    for (auto& d : docs) {
        auto id = d.doc_id;
        d.text.clear();
        out.emplace(std::move(id), std::move(d));
    }
    return out;
}

std::vector<Candidate> enqueue_candidates(const SamplingPlan& plan, const std::vector<RankedHit>& pool,
                                          const MetadataIndex& metadata, const ChunkCatalog& catalog,
                                          const std::map<std::string, std::string>& quotes) {
    std::unordered_map<std::size_t, const RankedHit*> by_rank;
    std::size_t pool_size = 0;
    for (const auto& h : pool) {
        if (h.query_id != plan.query_id) continue;
        by_rank.emplace(h.rank, &h);
        ++pool_size;
    }
    std::vector<Candidate> out;
    out.reserve(plan.entries.size());
    for (const auto& e : plan.entries) {
        auto it = by_rank.find(e.rank);
        if (it == by_rank.end()) {
            throw DataError("plan rank " + std::to_string(e.rank) + " for query '" + plan.query_id +
                            "' has no hit in the pool");
        }
        const RankedHit& h = *it->second;
        Candidate c;
        c.candidate_id = plan.query_id + ":" + std::to_string(e.rank);
        c.query_id = plan.query_id;
        c.chunk_id = h.chunk_id;
        c.doc_id = h.doc_id;
        c.work_id = h.work_id;
        c.rank = h.rank;
        c.pool_size = pool_size;
        c.score = h.score;
        c.stage = std::string(to_string(plan.stage));
        if (auto q = quotes.find(plan.query_id); q != quotes.end()) c.quote_text = q->second;
        if (const auto* chunk = catalog.find(h.chunk_id)) c.hit_text = chunk->text;
        if (auto m = metadata.find(h.doc_id); m != metadata.end()) {
            c.author = m->second.author;
            c.title = m->second.title;
            c.year = m->second.year;
            c.genre = m->second.genre;
            c.language = m->second.declared_language;
        }
        c.context_ref = "/api/context?chunk=" + h.chunk_id + "&radius=2";
        out.push_back(std::move(c));
    }
    return out;
}

// --- AnnotationStore ---------------------------------------------------------

AnnotationStore::AnnotationStore(std::optional<std::filesystem::path> journal, Clock clock,
                                 std::chrono::seconds lease)
    : journal_(std::move(journal)), clock_(std::move(clock)), lease_(lease) {
    if (journal_ && std::filesystem::exists(*journal_)) replay();
}

void AnnotationStore::replay() {
    std::ifstream in(*journal_, std::ios::binary);
    if (!in) throw DataError("cannot open journal " + journal_->string());
    jsonl::for_each(in, [&](const Json& j, std::size_t line) {
        const auto event = jsonl::get_string(j, "event");
        if (event == "candidate") {
            add_candidate_locked(candidate_from_json(j.at("candidate")));
        } else if (event == "annotation") {
            Annotation a;
            a.candidate_id = j.at("candidate_id").get<std::string>();
            const auto label = parse_label(j.at("label").get<std::string>());
            if (!label) throw DataError("journal line " + std::to_string(line) + ": unknown label");
            a.label = *label;
            a.annotator_id = jsonl::get_string(j, "annotator");
            a.created_at = jsonl::get_string(j, "created_at");
            a.duration_seconds = j.value("duration_seconds", 0.0);
            if (!by_id_.contains(a.candidate_id)) {
                throw DataError("journal line " + std::to_string(line) + ": annotation for unknown candidate");
            }
            append_annotation_locked(std::move(a));
        } else {
            throw DataError("journal line " + std::to_string(line) + ": unknown event '" + event + "'");
        }
    });
}

void AnnotationStore::journal_write(const Json& row) {
    if (!journal_) return;
    std::ofstream out(*journal_, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot append to journal " + journal_->string());
    jsonl::write_line(out, row);
    out.flush();
}

bool AnnotationStore::add_candidate_locked(const Candidate& c) {
    if (by_id_.contains(c.candidate_id)) return false;
    by_id_.emplace(c.candidate_id, entries_.size());
    entries_.push_back({c, {}, std::nullopt, {}});
    return true;
}

void AnnotationStore::append_annotation_locked(Annotation a) {
    auto& entry = entries_[by_id_.at(a.candidate_id)];
    entry.history.push_back(history_.size());
    entry.lease_holder.reset();
    history_.push_back(std::move(a));
}

std::size_t AnnotationStore::enqueue(const std::vector<Candidate>& candidates) {
    std::unique_lock lock(mu_);
    std::size_t added = 0;
    for (const auto& c : candidates) {
        if (add_candidate_locked(c)) {
            Json row;
            row["event"] = "candidate";
            row["candidate"] = to_json(c);
            journal_write(row);
            ++added;
        }
    }
    return added;
}

std::optional<Candidate> AnnotationStore::next_candidate(const std::string& annotator_id) {
    std::unique_lock lock(mu_);
    const auto now = clock_();
    Entry* pick = nullptr;
    for (auto& e : entries_) {
        if (!e.history.empty()) continue;
        if (e.lease_holder && e.lease_expiry <= now) e.lease_holder.reset();
        if (e.lease_holder) {
            if (*e.lease_holder == annotator_id) {
                // Re-polling returns the candidate this annotator already holds.
                e.lease_expiry = now + lease_;
                return e.candidate;
            }
            continue;
        }
        if (pick == nullptr || std::tie(e.candidate.rank, e.candidate.query_id) <
                                   std::tie(pick->candidate.rank, pick->candidate.query_id)) {
            pick = &e;
        }
    }
    if (pick == nullptr) return std::nullopt;
    pick->lease_holder = annotator_id;
    pick->lease_expiry = now + lease_;
    return pick->candidate;
}

Annotation AnnotationStore::submit_label(const std::string& candidate_id, Label label,
                                         const std::string& annotator_id, double duration_seconds) {
    if (!(duration_seconds >= 0.0)) throw std::invalid_argument("duration_seconds must be non-negative");
    std::unique_lock lock(mu_);
    if (!by_id_.contains(candidate_id)) throw DataError("unknown candidate '" + candidate_id + "'");
    Annotation a{candidate_id, label, annotator_id, format_timestamp(clock_()), duration_seconds};
    Json row;
    row["event"] = "annotation";
    const auto fields = to_json(a);
    for (const auto& [k, v] : fields.items()) row[k] = v;
    journal_write(row);
    append_annotation_locked(a);
    return a;
}

Annotation AnnotationStore::submit_label(const std::string& candidate_id, std::string_view label,
                                         const std::string& annotator_id, double duration_seconds) {
    const auto parsed = parse_label(label);
    if (!parsed) throw std::invalid_argument("label '" + std::string(label) + "' is not in the taxonomy");
    return submit_label(candidate_id, *parsed, annotator_id, duration_seconds);
}

std::vector<Json> AnnotationStore::export_annotations(const std::optional<std::string>& query_id) const {
    std::shared_lock lock(mu_);
    std::vector<const Entry*> rows;
    for (const auto& e : entries_) {
        if (e.history.empty()) continue;
        if (query_id && e.candidate.query_id != *query_id) continue;
        rows.push_back(&e);
    }
    std::sort(rows.begin(), rows.end(), [](const Entry* a, const Entry* b) {
        return std::tie(a->candidate.query_id, a->candidate.rank) < std::tie(b->candidate.query_id, b->candidate.rank);
    });
    std::vector<Json> out;
    out.reserve(rows.size());
    for (const auto* e : rows) {
        const auto& a = history_[e->history.back()];
        Json j = to_json(e->candidate);
        j["label"] = to_string(a.label);
        j["annotator"] = a.annotator_id;
        j["created_at"] = a.created_at;
        j["duration_seconds"] = a.duration_seconds;
        out.push_back(std::move(j));
    }
    return out;
}

ImportResult AnnotationStore::import_annotations(const std::vector<Json>& rows) {
    ImportResult res;
    std::unique_lock lock(mu_);
    for (const auto& j : rows) {
        const auto label_text = jsonl::get_string(j, "label");
        if (label_text == kReservedLexicalLabel) {
            ++res.skipped_lexical;
            continue;
        }
        const auto label = parse_label(label_text);
        if (!label) throw DataError("import: unknown label '" + label_text + "'");
        auto c = candidate_from_json(j);
        if (add_candidate_locked(c)) {
            Json row;
            row["event"] = "candidate";
            row["candidate"] = to_json(c);
            journal_write(row);
        }
        Annotation a{c.candidate_id, *label, jsonl::get_string(j, "annotator"), jsonl::get_string(j, "created_at"),
                     j.value("duration_seconds", 0.0)};
        Json row;
        row["event"] = "annotation";
        const auto fields = to_json(a);
        for (const auto& [k, v] : fields.items()) row[k] = v;
        journal_write(row);
        append_annotation_locked(std::move(a));
        ++res.imported;
    }
    return res;
}

std::optional<Candidate> AnnotationStore::candidate(const std::string& candidate_id) const {
    std::shared_lock lock(mu_);
    auto it = by_id_.find(candidate_id);
    if (it == by_id_.end()) return std::nullopt;
    return entries_[it->second].candidate;
}

std::vector<Annotation> AnnotationStore::history(const std::string& candidate_id) const {
    std::shared_lock lock(mu_);
    std::vector<Annotation> out;
    auto it = by_id_.find(candidate_id);
    if (it == by_id_.end()) return out;
    for (const auto idx : entries_[it->second].history) out.push_back(history_[idx]);
    return out;
}

std::size_t AnnotationStore::history_size() const {
    std::shared_lock lock(mu_);
    return history_.size();
}

std::vector<std::string> AnnotationStore::query_ids() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> ids;
    for (const auto& e : entries_) ids.push_back(e.candidate.query_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

QueryProgress AnnotationStore::progress(const std::string& query_id) const {
    std::shared_lock lock(mu_);
    QueryProgress p;
    p.query_id = query_id;
    for (const auto l : kAllLabels) p.counts[l] = 0;
    for (const auto& e : entries_) {
        if (e.candidate.query_id != query_id) continue;
        ++p.candidates;
        if (e.history.empty()) continue;
        ++p.annotated;
        const auto label = history_[e.history.back()].label;
        ++p.counts[label];
        if (is_significant(label)) ++p.significant;
        if (label == Label::DontKnow) ++p.dont_know;
    }
    return p;
}

void AnnotationStore::compact() {
    std::unique_lock lock(mu_);
    if (!journal_) return;
    auto tmp = *journal_;
    tmp += ".compact";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        for (const auto& e : entries_) {
            Json row;
            row["event"] = "candidate";
            row["candidate"] = to_json(e.candidate);
            jsonl::write_line(out, row);
        }
        for (const auto& a : history_) {
            Json row;
            row["event"] = "annotation";
            const auto fields = to_json(a);
            for (const auto& [k, v] : fields.items()) row[k] = v;
            jsonl::write_line(out, row);
        }
    }
    std::filesystem::rename(tmp, *journal_);
}

}  // namespace reception
