#include "reception/workflow.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "reception/annotate.hpp"
#include "reception/corpus.hpp"
#include "reception/demo.hpp"
#include "reception/diagnostics.hpp"
#include "reception/embed.hpp"
#include "reception/error.hpp"
#include "reception/index.hpp"
#include "reception/pipeline.hpp"
#include "reception/reuse.hpp"
#include "reception/sampling.hpp"
#include "reception/stats.hpp"

#ifndef RECEPTION_DATA_DIR
#define RECEPTION_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace reception {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument("config '" + key + "': bad number '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("config '" + key + "': expected true/false, got '" + value + "'");
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Json> read_rows(const fs::path& p) { return jsonl::read_file(p.string()); }

// Every output exists and none is older than any input.
bool up_to_date(const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
    std::error_code ec;
    fs::file_time_type oldest_out = fs::file_time_type::max();
    for (const auto& o : outputs) {
        const auto t = fs::last_write_time(o, ec);
        if (ec) return false;
        oldest_out = std::min(oldest_out, t);
    }
    for (const auto& i : inputs) {
        const auto t = fs::last_write_time(i, ec);
        if (ec || t > oldest_out) return false;
    }
    return true;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

template <typename T>
std::vector<Json> rows_of(const std::vector<T>& items) {
    std::vector<Json> rows;
    rows.reserve(items.size());
    for (const auto& i : items) rows.push_back(to_json(i));
    return rows;
}

std::map<std::string, std::vector<RankedHit>> group_hits(const std::vector<RankedHit>& hits) {
    std::map<std::string, std::vector<RankedHit>> out;
    for (const auto& h : hits) out[h.query_id].push_back(h);
    return out;
}

struct Stage {
    std::string name;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    std::function<void()> run;
};

class Runner {
public:
    Runner(const RunConfig& cfg, std::ostream* log) : cfg_(cfg), log_(log) {}
    RunReport run();

private:
    fs::path out(const char* name) const { return cfg_.out_dir / name; }
    fs::path corpus_path() const { return cfg_.demo ? out("corpus.jsonl") : cfg_.corpus; }
    fs::path annotations_path() const { return cfg_.annotations.empty() ? out("annotations.jsonl") : cfg_.annotations; }
    fs::path vocab_path() const { return cfg_.vocab.empty() ? fs::path(RECEPTION_DATA_DIR) / "en_vocab.txt" : cfg_.vocab; }
    fs::path lexicon_path() const {
        return cfg_.lexicon.empty() ? fs::path(RECEPTION_DATA_DIR) / "en_lexicon.tsv" : cfg_.lexicon;
    }
    std::string source_doc() const { return cfg_.demo ? std::string("src-0") : cfg_.source_doc; }
    AlignmentParams params() const {
        AlignmentParams p;
        p.min_score = cfg_.min_score;
        return p;
    }
    void warn(std::string w) {
        if (log_) *log_ << "warning: " << w << '\n';
        report_.warnings.push_back(std::move(w));
    }

    void write_config();
    void stage_demo();
    void stage_ingest();
    void stage_embed();
    void stage_reuse();
    void stage_query_embed();
    void stage_search();
    void stage_lexical();
    void stage_partition();
    void stage_plan();
    void stage_annotate();
    void stage_stats();
    void stage_diagnose();

    std::vector<DocumentRecord> documents() const { return ingest_file(out("documents.jsonl").string()); }
    std::unordered_set<std::string> allowed_docs(const std::vector<DocumentRecord>& docs) const;

    const RunConfig& cfg_;
    std::ostream* log_;
    RunReport report_;
};

void Runner::write_config() {
    const auto text = cfg_.content_json().dump(2) + "\n";
    std::error_code ec;
    if (fs::exists(out("config.json"), ec)) {
        if (read_text(out("config.json")) == text) return;  // keep mtime so stages stay fresh
    }
    write_text_file(out("config.json"), text);
}

std::unordered_set<std::string> Runner::allowed_docs(const std::vector<DocumentRecord>& docs) const {
    const auto src = source_doc();
    std::string work;
    for (const auto& d : docs) {
        if (d.doc_id == src) work = d.work_id;
    }
    if (work.empty()) throw DataError("source document '" + src + "' is not in the corpus");
    std::unordered_set<std::string> allowed;
    for (const auto& d : docs) {
        if (d.work_id != work) allowed.insert(d.doc_id);
    }
    return allowed;
}

void Runner::stage_demo() {
    DemoOptions o;
    o.seed = cfg_.demo_seed;
    o.quotes = cfg_.demo_quotes;
    o.ocr_rate = cfg_.ocr_rate;
    const auto demo = make_demo_corpus(o);
    std::ostringstream corpus;
    write_documents(corpus, demo.documents);
    write_text_file(out("corpus.jsonl"), corpus.str());
    std::vector<Json> truth, quotes;
    for (const auto& p : demo.plants) truth.push_back(to_json(p));
    for (const auto& q : demo.quotes) quotes.push_back(to_json(q));
    write_jsonl_file(out("demo_truth.jsonl"), truth);
    write_jsonl_file(out("demo_quotes.jsonl"), quotes);
}

void Runner::stage_ingest() {
    const auto docs = ingest_file(corpus_path().string());
    std::vector<Chunk> chunks;
    for (const auto& d : docs) {
        auto c = chunk_document(d, cfg_.chunk_size);
        chunks.insert(chunks.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
    }
    std::ostringstream d_out, c_out;
    write_documents(d_out, docs);
    write_chunks(c_out, chunks);
    write_text_file(out("documents.jsonl"), d_out.str());
    write_text_file(out("chunks.jsonl"), c_out.str());
}

void Runner::stage_embed() {
    VectorCollection vectors;
    if (cfg_.embedder == "import") {
        vectors = import_vectors_file(cfg_.chunk_vectors.string());
    } else {
        const auto chunks = read_chunks_file(out("chunks.jsonl").string());
        vectors = embed_chunks(chunks, HashEmbedder(cfg_.dim));
    }
    write_text_file(out("chunk_vectors.rmv"), save_vectors(vectors));
}

void Runner::stage_reuse() {
    const auto docs = documents();
    const auto src_id = source_doc();
    auto it = std::find_if(docs.begin(), docs.end(), [&](const DocumentRecord& d) { return d.doc_id == src_id; });
    if (it == docs.end()) throw DataError("source document '" + src_id + "' is not in the corpus");
    const auto matches = detect_reuse(it->text, docs, params(), src_id, src_id, cfg_.threads == 0 ? 1 : cfg_.threads);
    std::vector<Json> match_rows;
    for (const auto& m : matches) match_rows.push_back(to_json(m));
    write_jsonl_file(out("source_matches.jsonl"), match_rows);

    const auto clusters = cluster_reuses(matches, it->work_id, it->text);
    std::vector<Json> cluster_rows;
    for (const auto& c : clusters) cluster_rows.push_back(to_json(c));
    write_jsonl_file(out("clusters.jsonl"), cluster_rows);

    const auto ranked = extract_query_quotes(clusters);
    std::vector<Json> quote_rows;
    for (const auto& q : ranked) quote_rows.push_back(to_json(q));
    write_jsonl_file(out("quotes.jsonl"), quote_rows);

    const auto selection = select_query_set(ranked, cfg_.seed);
    for (const auto& w : selection.warnings) warn(w);
    if (selection.quotes.empty()) throw DataError("no quote satisfies the length and frequency constraints");
    std::vector<Json> query_rows;
    for (const auto& q : selection.quotes) query_rows.push_back(to_json(q));
    write_jsonl_file(out("queries.jsonl"), query_rows);
}

void Runner::stage_query_embed() {
    VectorCollection vectors;
    const auto queries = read_quotes_file(out("queries.jsonl").string());
    if (cfg_.embedder == "import") {
        auto all = import_vectors_file(cfg_.query_vectors.string());
        for (const auto& q : queries) {
            auto v = std::find_if(all.begin(), all.end(), [&](const EmbeddingVector& e) { return e.id == q.quote_id; });
            if (v == all.end()) throw DataError("no imported vector for query '" + q.quote_id + "'");
            vectors.push_back(*v);
        }
    } else {
        for (const auto& q : queries) {
            auto v = hash_embed(q.text, cfg_.dim);
            v.id = q.quote_id;
            vectors.push_back(std::move(v));
        }
    }
    write_text_file(out("query_vectors.rmv"), save_vectors(vectors));
}

void Runner::stage_search() {
    const auto chunks = load_vectors_file(out("chunk_vectors.rmv").string());
    const auto queries = load_vectors_file(out("query_vectors.rmv").string());
    const ChunkCatalog catalog(read_chunks_file(out("chunks.jsonl").string()));
    const auto index = FlatIndex::build(chunks);
    if (!queries.empty() && queries.front().dim() != index.dim()) {
        throw DataError("query vectors have dim " + std::to_string(queries.front().dim()) + ", index has " +
                        std::to_string(index.dim()));
    }
    write_jsonl_file(out("hits.jsonl"), rows_of(search_all(index, queries, cfg_.k, catalog, cfg_.threads)));
}

void Runner::stage_lexical() {
    const auto docs = documents();
    const auto allowed = allowed_docs(docs);
    std::vector<DocumentRecord> targets;
    for (const auto& d : docs) {
        if (allowed.contains(d.doc_id)) targets.push_back(d);
    }
    std::vector<AlignmentMatch> all;
    for (const auto& q : read_quotes_file(out("queries.jsonl").string())) {
        auto m = detect_reuse(q.text, targets, params(), q.quote_id, {}, cfg_.threads == 0 ? 1 : cfg_.threads);
        all.insert(all.end(), m.begin(), m.end());
    }
    write_jsonl_file(out("lexical.jsonl"), rows_of(all));
}

void Runner::stage_partition() {
    const auto hits = read_hits_file(out("hits.jsonl").string());
    const auto lexical = read_matches_file(out("lexical.jsonl").string());
    const ChunkCatalog catalog(read_chunks_file(out("chunks.jsonl").string()));
    const auto allowed = allowed_docs(documents());
    const auto deduped = dedupe_by_work(filter_subcorpus(hits, allowed));
    const auto part = anti_lexical_partition(deduped, lexical, catalog);
    write_jsonl_file(out("partition.jsonl"), partition_rows(part));
    write_jsonl_file(out("pool.jsonl"), rows_of(part.unique_semantic));

    std::vector<Json> recall_rows;
    for (const auto& q : read_quotes_file(out("queries.jsonl").string())) {
        HitPartition one;
        for (const auto& h : part.intersection) {
            if (h.query_id == q.quote_id) one.intersection.push_back(h);
        }
        for (const auto& m : part.unique_lexical) {
            if (m.query_doc == q.quote_id) one.unique_lexical.push_back(m);
        }
        Json row;
        row["query_id"] = q.quote_id;
        row["intersection"] = one.intersection.size();
        row["unique_lexical"] = one.unique_lexical.size();
        const auto r = lexical_recall(one);
        row["lexical_recall"] = r ? Json(*r) : Json(nullptr);
        recall_rows.push_back(std::move(row));
    }
    write_jsonl_file(out("recall.jsonl"), recall_rows);
}

void Runner::stage_plan() {
    const auto pool = group_hits(read_hits_file(out("pool.jsonl").string()));
    const auto queries = read_quotes_file(out("queries.jsonl").string());
    const auto metadata = index_metadata(documents());
    const ChunkCatalog catalog(read_chunks_file(out("chunks.jsonl").string()));
    std::map<std::string, std::string> quote_text;
    for (const auto& q : queries) quote_text[q.quote_id] = q.text;

    std::vector<Json> plan_out, cand_out;
    for (const auto& q : queries) {
        auto it = pool.find(q.quote_id);
        const std::vector<RankedHit> empty;
        const auto& hits = it == pool.end() ? empty : it->second;
        if (hits.empty()) {
            warn("query " + q.quote_id + " has no unique semantic hits");
            continue;
        }
        auto result = pilot_plan(hits.size(), q.quote_id);
        for (const auto& w : result.warnings) warn(w);
        for (auto& r : plan_rows(result.plan)) plan_out.push_back(std::move(r));
        for (const auto& c : enqueue_candidates(result.plan, hits, metadata, catalog, quote_text)) {
            cand_out.push_back(to_json(c));
        }
    }
    write_jsonl_file(out("plans.jsonl"), plan_out);
    write_jsonl_file(out("candidates.jsonl"), cand_out);
}

// Labels every queued candidate from the demo ground truth, then applies
// the deepening rule once per query.
void Runner::stage_annotate() {
    const auto plants = [&] {
        std::vector<DemoPlant> p;
        for (const auto& j : read_rows(out("demo_truth.jsonl"))) p.push_back(plant_from_json(j));
        return p;
    }();
    std::vector<DemoQuote> demo_quotes;
    for (const auto& j : read_rows(out("demo_quotes.jsonl"))) demo_quotes.push_back(demo_quote_from_json(j));
    std::map<std::string, Span> cluster_span;
    for (const auto& j : read_rows(out("clusters.jsonl"))) {
        const auto c = cluster_from_json(j);
        cluster_span[c.cluster_id] = c.source_span;
    }
    const auto queries = read_quotes_file(out("queries.jsonl").string());
    std::map<std::string, std::optional<std::size_t>> quote_index;
    for (const auto& q : queries) {
        std::size_t best = 0;
        for (const auto& dq : demo_quotes) {
            const auto ov = overlap(cluster_span[q.cluster_id], dq.source_span);
            if (ov > best) {
                best = ov;
                quote_index[q.quote_id] = dq.index;
            }
        }
    }

    auto now = std::chrono::system_clock::time_point{} + std::chrono::seconds(1704067200);  // 2024-01-01T00:00:00Z
    AnnotationStore store(std::nullopt, [&now] { return now; });
    std::vector<Candidate> pilot;
    for (const auto& j : read_rows(out("candidates.jsonl"))) pilot.push_back(candidate_from_json(j));
    store.enqueue(pilot);

    auto label_all = [&] {
        while (auto c = store.next_candidate("simulated")) {
            const auto qi = quote_index[c->query_id];
            const auto label = qi ? simulated_label(plants, *qi, c->doc_id) : Label::NoMatch;
            const double duration = 8.0 + static_cast<double>(fnv1a(c->candidate_id) % 25);
            now += std::chrono::milliseconds(static_cast<long long>(duration * 1000));
            store.submit_label(c->candidate_id, label, "simulated", duration);
        }
    };
    label_all();

    const auto pool = group_hits(read_hits_file(out("pool.jsonl").string()));
    const auto metadata = index_metadata(documents());
    const ChunkCatalog catalog(read_chunks_file(out("chunks.jsonl").string()));
    std::map<std::string, std::string> quote_text;
    for (const auto& q : queries) quote_text[q.quote_id] = q.text;

    std::vector<Json> decisions;
    for (const auto& qid : store.query_ids()) {
        const auto p = store.progress(qid);
        const auto d = decide_deepening(p.significant, p.annotated, p.dont_know, cfg_.deepen_threshold, qid);
        Json row = to_json(p, d);
        std::string next = "stop";
        if (d.deepen) {
            const auto& hits = pool.at(qid);
            const auto plan = hits.size() >= kTriageWindow ? triage_plan(hits.size(), qid)
                                                            : exhaustive_plan(hits.size(), qid);
            next = std::string(to_string(plan.stage));
            store.enqueue(enqueue_candidates(plan, hits, metadata, catalog, quote_text));
        }
        row["next_stage"] = next;
        decisions.push_back(std::move(row));
    }
    label_all();
    write_jsonl_file(out("decisions.jsonl"), decisions);
    write_jsonl_file(out("annotations.jsonl"), store.export_annotations());
}

void Runner::stage_stats() {
    const auto hits = annotated_hits_from_rows(read_rows(annotations_path()));
    const auto mode = cfg_.rho_mode == "mean" ? RhoMode::Mean : RhoMode::Pooled;
    const auto table = category_table(hits, mode);
    write_text_file(out("table1.txt"), render_category_table(table));
    write_text_file(out("table1.csv"), category_table_csv(table));

    std::map<std::string, std::vector<AnnotatedHit>> per_query;
    for (const auto& h : hits) per_query[h.query_id].push_back(h);
    std::ostringstream yield;
    yield << "query_id,rank,cumulative_significant_fraction\n";
    for (const auto& [q, list] : per_query) {
        for (const auto& p : yield_curve(list)) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", p.cumulative_significant_fraction);
            yield << q << ',' << p.rank << ',' << buf << '\n';
        }
    }
    write_text_file(out("yield.csv"), yield.str());

    write_text_file(out("facets_author.csv"), facet_table_csv(facet_counts(hits, Facet::Author, 20)));
    write_text_file(out("facets_genre.csv"), facet_table_csv(facet_counts(hits, Facet::Genre)));
    write_text_file(out("facets_decade.csv"), facet_table_csv(facet_counts(hits, Facet::Decade)));
    write_text_file(out("scores.csv"), score_by_category_csv(hits));

    HitPartition part;
    std::vector<std::optional<double>> recalls;
    for (const auto& j : read_rows(out("partition.jsonl"))) {
        if (jsonl::get_string(j, "partition") == "intersection") part.intersection.push_back(hit_from_json(j));
        if (jsonl::get_string(j, "partition") == "unique_lexical") part.unique_lexical.push_back(match_from_json(j));
    }
    const auto works = work_level_comparison(part, hits);
    Json wl;
    wl["significant_semantic_works"] = works.significant_semantic_works;
    wl["lexical_works"] = works.lexical_works;
    const auto r = lexical_recall(part);
    wl["lexical_recall"] = r ? Json(*r) : Json(nullptr);
    const auto med = median_duration_seconds(hits);
    wl["median_duration_seconds"] = med ? Json(*med) : Json(nullptr);
    wl["annotated"] = hits.size();
    write_text_file(out("worklevel.json"), wl.dump(2) + "\n");
}

void Runner::stage_diagnose() {
    auto hits = annotated_hits_from_rows(read_rows(annotations_path()));
    const RuleAnnotator annotator(load_lexicon_file(lexicon_path()));
    const auto vocab = load_vocabulary_file(vocab_path());
    const StopwordDetector detector;
    std::vector<std::string> langs;
    for (auto& h : hits) {
        langs.push_back(detector.detect(h.hit_text));
        h.language = langs.back();
    }
    const auto features = compute_features(hits, annotator, vocab, cfg_.threads);
    const auto quadrants = assign_quadrants(hits, true, NegativeClass::Inclusive);
    write_text_file(out("features.csv"), features_csv(features));
    write_text_file(out("quadrants.csv"), quadrants_csv(quadrants));
    write_text_file(out("summary.csv"), summary_csv(quadrant_summary(quadrants, features)));
    const auto baseline = token_baseline(documents());
    write_text_file(out("langdist.csv"), language_table_csv(language_distribution(hits, langs, baseline)));
}

RunReport Runner::run() {
    std::error_code ec;
    fs::create_directories(cfg_.out_dir, ec);
    if (ec) throw StageError("setup", "cannot create '" + cfg_.out_dir.string() + "': " + ec.message(), 2);
    write_config();
    const auto config = out("config.json");

    std::vector<Stage> stages;
    if (cfg_.demo) {
        stages.push_back({"demo", {config}, {out("corpus.jsonl"), out("demo_truth.jsonl"), out("demo_quotes.jsonl")},
                          [this] { stage_demo(); }});
    }
    stages.push_back({"ingest", {corpus_path(), config}, {out("documents.jsonl"), out("chunks.jsonl")},
                      [this] { stage_ingest(); }});
    std::vector<fs::path> embed_in = {out("chunks.jsonl"), config};
    std::vector<fs::path> query_embed_in = {out("queries.jsonl"), config};
    if (cfg_.embedder == "import") {
        embed_in.push_back(cfg_.chunk_vectors);
        query_embed_in.push_back(cfg_.query_vectors);
    }
    stages.push_back({"embed", embed_in, {out("chunk_vectors.rmv")}, [this] { stage_embed(); }});
    stages.push_back({"reuse",
                      {out("documents.jsonl"), config},
                      {out("source_matches.jsonl"), out("clusters.jsonl"), out("quotes.jsonl"), out("queries.jsonl")},
                      [this] { stage_reuse(); }});
    stages.push_back({"query_embed", query_embed_in, {out("query_vectors.rmv")}, [this] { stage_query_embed(); }});
    stages.push_back({"search",
                      {out("chunk_vectors.rmv"), out("query_vectors.rmv"), out("chunks.jsonl"), config},
                      {out("hits.jsonl")},
                      [this] { stage_search(); }});
    stages.push_back({"lexical", {out("queries.jsonl"), out("documents.jsonl"), config}, {out("lexical.jsonl")},
                      [this] { stage_lexical(); }});
    stages.push_back({"partition",
                      {out("hits.jsonl"), out("lexical.jsonl"), out("documents.jsonl"), out("chunks.jsonl"), config},
                      {out("partition.jsonl"), out("pool.jsonl"), out("recall.jsonl")},
                      [this] { stage_partition(); }});
    stages.push_back({"plan",
                      {out("pool.jsonl"), out("queries.jsonl"), out("documents.jsonl"), out("chunks.jsonl"), config},
                      {out("plans.jsonl"), out("candidates.jsonl")},
                      [this] { stage_plan(); }});

    const bool simulate = cfg_.demo && cfg_.annotations.empty();
    if (simulate) {
        stages.push_back({"annotate",
                          {out("candidates.jsonl"), out("pool.jsonl"), out("demo_truth.jsonl"),
                           out("demo_quotes.jsonl"), out("clusters.jsonl"), config},
                          {out("annotations.jsonl"), out("decisions.jsonl")},
                          [this] { stage_annotate(); }});
    }
    if (simulate || !cfg_.annotations.empty()) {
        stages.push_back({"stats",
                          {annotations_path(), out("partition.jsonl"), config},
                          {out("table1.txt"), out("table1.csv"), out("yield.csv"), out("facets_author.csv"),
                           out("facets_genre.csv"), out("facets_decade.csv"), out("scores.csv"), out("worklevel.json")},
                          [this] { stage_stats(); }});
        stages.push_back({"diagnose",
                          {annotations_path(), out("documents.jsonl"), vocab_path(), lexicon_path(), config},
                          {out("features.csv"), out("quadrants.csv"), out("summary.csv"), out("langdist.csv")},
                          [this] { stage_diagnose(); }});
    } else {
        warn("no annotations yet: stats and diagnose skipped (serve the candidates, then rerun with annotations=...)");
    }

    for (const auto& s : stages) {
        if (up_to_date(s.inputs, s.outputs)) {
            if (log_) *log_ << "[skip] " << s.name << '\n';
            report_.stages.push_back({s.name, false});
            continue;
        }
        if (log_) *log_ << "[run]  " << s.name << '\n';
        try {
            s.run();
        } catch (const StageError&) {
            throw;
        } catch (const DataError& e) {
            throw StageError(s.name, e.what(), 2);
        } catch (const std::invalid_argument& e) {
            throw StageError(s.name, e.what(), 1);
        } catch (const std::exception& e) {
            throw StageError(s.name, e.what(), 3);
        }
        report_.stages.push_back({s.name, true});
    }
    return report_;
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (out_dir.empty()) fail("out_dir is required");
    if (!demo) {
        if (corpus.empty()) fail("corpus is required unless demo = true");
        if (source_doc.empty()) fail("source_doc is required unless demo = true");
    }
    if (demo_quotes == 0) fail("demo_quotes must be positive");
    if (ocr_rate < 0.0 || ocr_rate > 1.0) fail("ocr_rate must be in [0, 1]");
    if (chunk_size == 0) fail("chunk_size must be positive");
    if (embedder != "hash" && embedder != "import") fail("embedder must be 'hash' or 'import'");
    if (embedder == "import" && (chunk_vectors.empty() || query_vectors.empty())) {
        fail("embedder = import needs chunk_vectors and query_vectors");
    }
    if (dim < 8) fail("dim must be at least 8");
    if (k == 0) fail("k must be positive");
    if (min_score <= 0) fail("min_score must be positive");
    if (!(deepen_threshold >= 0.0 && deepen_threshold <= 1.0)) fail("deepen_threshold must be in [0, 1]");
    if (port <= 0 || port > 65535) fail("port must be in 1..65535");
    if (rho_mode != "pooled" && rho_mode != "mean") fail("rho_mode must be 'pooled' or 'mean'");
}

Json RunConfig::content_json() const {
    Json j;
    j["corpus"] = demo ? std::string() : corpus.string();
    j["source_doc"] = source_doc;
    j["demo"] = demo;
    j["demo_seed"] = demo_seed;
    j["demo_quotes"] = demo_quotes;
    j["ocr_rate"] = ocr_rate;
    j["chunk_size"] = chunk_size;
    j["embedder"] = embedder;
    j["dim"] = dim;
    j["chunk_vectors"] = chunk_vectors.string();
    j["query_vectors"] = query_vectors.string();
    j["k"] = k;
    j["min_score"] = min_score;
    j["seed"] = seed;
    j["deepen_threshold"] = deepen_threshold;
    j["annotations"] = annotations.string();
    j["vocab"] = vocab.string();
    j["lexicon"] = lexicon.string();
    j["rho_mode"] = rho_mode;
    return j;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "out_dir") cfg.out_dir = value;
    else if (key == "corpus") cfg.corpus = value;
    else if (key == "source_doc") cfg.source_doc = value;
    else if (key == "demo") cfg.demo = parse_bool(key, value);
    else if (key == "demo_seed") cfg.demo_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "demo_quotes") cfg.demo_quotes = parse_number<std::size_t>(key, value);
    else if (key == "ocr_rate") cfg.ocr_rate = parse_number<double>(key, value);
    else if (key == "chunk_size") cfg.chunk_size = parse_number<std::size_t>(key, value);
    else if (key == "embedder") cfg.embedder = value;
    else if (key == "dim") cfg.dim = parse_number<std::size_t>(key, value);
    else if (key == "chunk_vectors") cfg.chunk_vectors = value;
    else if (key == "query_vectors") cfg.query_vectors = value;
    else if (key == "k") cfg.k = parse_number<std::size_t>(key, value);
    else if (key == "min_score") cfg.min_score = parse_number<int>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "deepen_threshold") cfg.deepen_threshold = parse_number<double>(key, value);
    else if (key == "port") cfg.port = parse_number<int>(key, value);
    else if (key == "threads") cfg.threads = parse_number<unsigned>(key, value);
    else if (key == "annotations") cfg.annotations = value;
    else if (key == "vocab") cfg.vocab = value;
    else if (key == "lexicon") cfg.lexicon = value;
    else if (key == "rho_mode") cfg.rho_mode = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    RunConfig cfg;
    const auto base = path.parent_path();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    for (auto* p : {&cfg.out_dir, &cfg.corpus, &cfg.chunk_vectors, &cfg.query_vectors, &cfg.annotations, &cfg.vocab,
                    &cfg.lexicon}) {
        if (!p->empty() && p->is_relative()) *p = base / *p;
    }
    return cfg;
}

RunReport run_pipeline(const RunConfig& cfg, std::ostream* log) {
    cfg.validate();
    return Runner(cfg, log).run();
}

void write_text_file(const fs::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw DataError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename onto '" + path.string() + "': " + ec.message());
}

void write_jsonl_file(const fs::path& path, const std::vector<Json>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) jsonl::write_line(out, r);
    write_text_file(path, out.str());
}

}  // namespace reception
