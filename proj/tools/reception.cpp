// Command-line entry point. Exit codes: 0 ok, 1 usage, 2 data error,
// 3 internal error.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
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
#include "reception/server.hpp"
#include "reception/stats.hpp"
#include "reception/workflow.hpp"

#ifndef RECEPTION_DATA_DIR
#define RECEPTION_DATA_DIR "data"
#endif

using namespace reception;
namespace fs = std::filesystem;

namespace {

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    write_text_file(path, content);
}

void emit_rows(const std::string& path, const std::vector<Json>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) jsonl::write_line(out, r);
    emit(path, out.str());
}

template <typename T>
std::vector<Json> rows_of(const std::vector<T>& items) {
    std::vector<Json> rows;
    for (const auto& i : items) rows.push_back(to_json(i));
    return rows;
}

std::vector<Chunk> chunk_all(const std::vector<DocumentRecord>& docs, std::size_t chunk_size) {
    std::vector<Chunk> out;
    for (const auto& d : docs) {
        auto c = chunk_document(d, chunk_size);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

const DocumentRecord& find_doc(const std::vector<DocumentRecord>& docs, const std::string& id) {
    for (const auto& d : docs) {
        if (d.doc_id == id) return d;
    }
    throw DataError("document '" + id + "' is not in the corpus");
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

AnnotationServer* g_server = nullptr;
void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic reception toolkit: retrieval, anti-lexical filtering, sampling, annotation, diagnostics"};
    app.require_subcommand(1);
    std::function<void()> action;

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate a corpus and tile it into chunks");
    std::string ing_corpus, ing_docs_out, ing_chunks_out;
    std::size_t ing_chunk_size = kDefaultChunkSize;
    ingest_cmd->add_option("--corpus", ing_corpus, "Corpus JSONL")->required();
    ingest_cmd->add_option("--chunk-size", ing_chunk_size, "Tokens per chunk")->check(CLI::PositiveNumber);
    ingest_cmd->add_option("--documents-out", ing_docs_out, "Normalised documents JSONL");
    ingest_cmd->add_option("--chunks-out", ing_chunks_out, "Chunks JSONL (default stdout)");
    ingest_cmd->callback([&] {
        action = [&] {
            const auto docs = ingest_file(ing_corpus);
            if (!ing_docs_out.empty()) {
                std::ostringstream d;
                write_documents(d, docs);
                emit(ing_docs_out, d.str());
            }
            std::ostringstream c;
            write_chunks(c, chunk_all(docs, ing_chunk_size));
            emit(ing_chunks_out, c.str());
        };
    });

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "Embed chunks or quotes, or import external vectors");
    std::string emb_chunks, emb_quotes, emb_import, emb_out;
    std::size_t emb_dim = 256;
    embed_cmd->add_option("--chunks", emb_chunks, "Chunks JSONL");
    embed_cmd->add_option("--quotes", emb_quotes, "Quotes JSONL (ids are quote_id)");
    embed_cmd->add_option("--import", emb_import, "External vectors (RMV1 or JSONL id/values)");
    embed_cmd->add_option("--dim", emb_dim, "Hash embedding dimension")->check(CLI::Range(8, 1 << 20));
    embed_cmd->add_option("--output", emb_out, "RMV1 output")->required();
    embed_cmd->callback([&] {
        action = [&] {
            const int sources = !emb_chunks.empty() + !emb_quotes.empty() + !emb_import.empty();
            if (sources != 1) throw std::invalid_argument("embed: give exactly one of --chunks, --quotes, --import");
            VectorCollection v;
            if (!emb_import.empty()) {
                v = import_vectors_file(emb_import);
            } else if (!emb_chunks.empty()) {
                v = embed_chunks(read_chunks_file(emb_chunks), HashEmbedder(emb_dim));
            } else {
                for (const auto& q : read_quotes_file(emb_quotes)) {
                    auto e = hash_embed(q.text, emb_dim);
                    e.id = q.quote_id;
                    v.push_back(std::move(e));
                }
            }
            save_vectors_file(emb_out, v);
        };
    });

    // search
    auto* search_cmd = app.add_subcommand("search", "Exact top-k cosine search");
    std::string s_index, s_queries, s_chunks, s_out;
    std::size_t s_k = 1000;
    unsigned s_threads = 0;
    search_cmd->add_option("--index", s_index, "Chunk vectors (RMV1)")->required();
    search_cmd->add_option("--queries", s_queries, "Query vectors (RMV1)")->required();
    search_cmd->add_option("--chunks", s_chunks, "Chunks JSONL for provenance")->required();
    search_cmd->add_option("--k", s_k, "Hits per query")->check(CLI::PositiveNumber);
    search_cmd->add_option("--threads", s_threads, "Worker threads (0 = hardware)");
    search_cmd->add_option("--output", s_out, "Hits JSONL (default stdout)");
    search_cmd->callback([&] {
        action = [&] {
            const auto index = FlatIndex::build(load_vectors_file(s_index));
            const auto queries = load_vectors_file(s_queries, {static_cast<std::uint32_t>(index.dim()), true});
            const ChunkCatalog catalog(read_chunks_file(s_chunks));
            emit_rows(s_out, rows_of(search_all(index, queries, s_k, catalog, s_threads)));
        };
    });

    // reuse
    auto* reuse_cmd = app.add_subcommand("reuse", "Lexical reuse detection and quote extraction");
    reuse_cmd->require_subcommand(1);
    std::string r_corpus, r_source, r_out, r_matches, r_clusters_out, r_quotes_out, r_select_out, r_queries;
    int r_min_score = 30;
    unsigned r_threads = 1;
    std::uint64_t r_seed = 1;
    auto* detect_cmd = reuse_cmd->add_subcommand("detect", "Align a source document (or quotes) against the corpus");
    detect_cmd->add_option("--corpus", r_corpus, "Documents JSONL")->required();
    detect_cmd->add_option("--source-doc", r_source, "Source doc_id to align against the corpus; with --queries, its work is excluded");
    detect_cmd->add_option("--queries", r_queries, "Quotes JSONL; each quote is aligned separately");
    detect_cmd->add_option("--min-score", r_min_score, "Minimum alignment score")->check(CLI::PositiveNumber);
    detect_cmd->add_option("--threads", r_threads, "Worker threads");
    detect_cmd->add_option("--output", r_out, "Matches JSONL (default stdout)");
    detect_cmd->callback([&] {
        action = [&] {
            const auto docs = ingest_file(r_corpus);
            AlignmentParams p;
            p.min_score = r_min_score;
            if (r_queries.empty() && r_source.empty()) {
                throw std::invalid_argument("reuse detect: give --source-doc or --queries");
            }
            std::vector<DocumentRecord> targets = docs;
            if (!r_source.empty()) {
                const auto work = find_doc(docs, r_source).work_id;
                if (!r_queries.empty()) {
                    std::erase_if(targets, [&](const DocumentRecord& d) { return d.work_id == work; });
                }
            }
            std::vector<AlignmentMatch> all;
            if (r_queries.empty()) {
                const auto& src = find_doc(docs, r_source);
                all = detect_reuse(src.text, targets, p, src.doc_id, src.doc_id, r_threads);
            } else {
                for (const auto& q : read_quotes_file(r_queries)) {
                    auto m = detect_reuse(q.text, targets, p, q.quote_id, {}, r_threads);
                    all.insert(all.end(), m.begin(), m.end());
                }
            }
            emit_rows(r_out, rows_of(all));
        };
    });
    auto* quotes_cmd = reuse_cmd->add_subcommand("quotes", "Cluster matches, extract and select query quotes");
    quotes_cmd->add_option("--matches", r_matches, "Matches JSONL from 'reuse detect --source-doc'")->required();
    quotes_cmd->add_option("--corpus", r_corpus, "Documents JSONL")->required();
    quotes_cmd->add_option("--source-doc", r_source, "Source doc_id")->required();
    quotes_cmd->add_option("--seed", r_seed, "Seed for tier sampling");
    quotes_cmd->add_option("--clusters-out", r_clusters_out, "Clusters JSONL");
    quotes_cmd->add_option("--quotes-out", r_quotes_out, "All eligible quotes JSONL");
    quotes_cmd->add_option("--output", r_select_out, "Selected query quotes JSONL (default stdout)");
    quotes_cmd->callback([&] {
        action = [&] {
            const auto docs = ingest_file(r_corpus);
            const auto& src = find_doc(docs, r_source);
            const auto clusters = cluster_reuses(read_matches_file(r_matches), src.work_id, src.text);
            if (!r_clusters_out.empty()) emit_rows(r_clusters_out, rows_of(clusters));
            const auto ranked = extract_query_quotes(clusters);
            if (!r_quotes_out.empty()) emit_rows(r_quotes_out, rows_of(ranked));
            const auto sel = select_query_set(ranked, r_seed);
            for (const auto& w : sel.warnings) std::cerr << "warning: " << w << '\n';
            emit_rows(r_select_out, rows_of(sel.quotes));
        };
    });

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "Subcorpus filter, work dedupe, anti-lexical partition");
    pipe_cmd->require_subcommand(1);
    std::string p_hits, p_allowed, p_corpus, p_exclude_work, p_lexical, p_chunks, p_out;
    auto* filter_cmd = pipe_cmd->add_subcommand("filter", "Keep hits from allowed documents");
    filter_cmd->add_option("--hits", p_hits, "Hits JSONL")->required();
    filter_cmd->add_option("--allowed", p_allowed, "File of allowed doc_ids, one per line");
    filter_cmd->add_option("--corpus", p_corpus, "Documents JSONL (with --exclude-work)");
    filter_cmd->add_option("--exclude-work", p_exclude_work, "Drop every document of this work");
    filter_cmd->add_option("--output", p_out, "Hits JSONL (default stdout)");
    filter_cmd->callback([&] {
        action = [&] {
            std::unordered_set<std::string> allowed;
            if (!p_allowed.empty()) {
                for (auto& l : read_lines(p_allowed)) allowed.insert(std::move(l));
            } else if (!p_corpus.empty()) {
                for (const auto& d : ingest_file(p_corpus)) {
                    if (d.work_id != p_exclude_work) allowed.insert(d.doc_id);
                }
            } else {
                throw std::invalid_argument("pipeline filter: give --allowed or --corpus");
            }
            emit_rows(p_out, rows_of(filter_subcorpus(read_hits_file(p_hits), allowed)));
        };
    });
    auto* dedupe_cmd = pipe_cmd->add_subcommand("dedupe", "Keep the best hit per work");
    dedupe_cmd->add_option("--hits", p_hits, "Hits JSONL")->required();
    dedupe_cmd->add_option("--output", p_out, "Hits JSONL (default stdout)");
    dedupe_cmd->callback([&] { action = [&] { emit_rows(p_out, rows_of(dedupe_by_work(read_hits_file(p_hits)))); }; });
    auto* part_cmd = pipe_cmd->add_subcommand("partition", "Split hits against lexical matches");
    part_cmd->add_option("--hits", p_hits, "Hits JSONL")->required();
    part_cmd->add_option("--lexical", p_lexical, "Matches JSONL")->required();
    part_cmd->add_option("--chunks", p_chunks, "Chunks JSONL")->required();
    part_cmd->add_option("--output", p_out, "Partition rows JSONL (default stdout)");
    part_cmd->callback([&] {
        action = [&] {
            const ChunkCatalog catalog(read_chunks_file(p_chunks));
            const auto part = anti_lexical_partition(read_hits_file(p_hits), read_matches_file(p_lexical), catalog);
            emit_rows(p_out, partition_rows(part));
            const auto r = lexical_recall(part);
            std::cerr << "intersection=" << part.intersection.size()
                      << " unique_semantic=" << part.unique_semantic.size()
                      << " unique_lexical=" << part.unique_lexical.size()
                      << " lexical_recall=" << (r ? std::to_string(*r) : std::string("undefined")) << '\n';
        };
    });

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "Annotation sampling plans and the deepening rule");
    sample_cmd->require_subcommand(1);
    std::size_t sm_pool = 0, sm_sig = 0, sm_total = 0, sm_dk = 0;
    std::string sm_query, sm_hits, sm_out;
    double sm_threshold = kDefaultDeepenThreshold;
    for (const char* name : {"pilot", "triage", "exhaustive"}) {
        auto* cmd = sample_cmd->add_subcommand(name, std::string(name) + " plan");
        cmd->add_option("--pool-size", sm_pool, "Number of ranked hits");
        cmd->add_option("--query", sm_query, "Query id");
        cmd->add_option("--hits", sm_hits, "Pool hits JSONL: one plan per query");
        cmd->add_option("--output", sm_out, "Plan rows JSONL (default stdout)");
        const std::string stage = name;
        cmd->callback([&, stage] {
            action = [&, stage] {
                auto make = [&](std::size_t n, const std::string& q) {
                    if (stage == "pilot") {
                        auto r = pilot_plan(n, q);
                        for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
                        return r.plan;
                    }
                    return stage == "triage" ? triage_plan(n, q) : exhaustive_plan(n, q);
                };
                std::vector<Json> rows;
                if (!sm_hits.empty()) {
                    std::map<std::string, std::size_t> sizes;
                    std::vector<std::string> order;
                    for (const auto& h : read_hits_file(sm_hits)) {
                        if (!sizes.contains(h.query_id)) order.push_back(h.query_id);
                        ++sizes[h.query_id];
                    }
                    for (const auto& q : order) {
                        for (auto& r : plan_rows(make(sizes[q], q))) rows.push_back(std::move(r));
                    }
                } else {
                    if (sm_pool == 0) throw std::invalid_argument("sample: give --pool-size or --hits");
                    rows = plan_rows(make(sm_pool, sm_query));
                }
                emit_rows(sm_out, rows);
            };
        });
    }
    auto* decide_cmd = sample_cmd->add_subcommand("decide", "Deepen or stop from label counts");
    decide_cmd->add_option("--significant", sm_sig, "Paraphrase + Meaning Match count")->required();
    decide_cmd->add_option("--total", sm_total, "Annotated count")->required();
    decide_cmd->add_option("--dont-know", sm_dk, "Don't Know count");
    decide_cmd->add_option("--threshold", sm_threshold, "Density threshold")->check(CLI::Range(0.0, 1.0));
    decide_cmd->add_option("--query", sm_query, "Query id");
    decide_cmd->callback([&] {
        action = [&] {
            const auto d = decide_deepening(sm_sig, sm_total, sm_dk, sm_threshold, sm_query);
            Json j;
            j["query_id"] = d.query_id;
            j["significant_density"] = d.significant_density ? Json(*d.significant_density) : Json(nullptr);
            j["threshold"] = d.threshold;
            j["decision"] = d.deepen ? "deepen" : "stop";
            j["warnings"] = d.warnings;
            std::cout << j.dump() << '\n';
        };
    });

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Annotation HTTP API (and the UI bundle)");
    std::string sv_hits, sv_plan, sv_corpus, sv_queries, sv_journal, sv_static, sv_host = "127.0.0.1";
    std::size_t sv_chunk_size = kDefaultChunkSize;
    int sv_port = 8080;
    double sv_threshold = kDefaultDeepenThreshold;
    serve_cmd->add_option("--hits", sv_hits, "Pool hits JSONL (unique semantic hits)")->required();
    serve_cmd->add_option("--plan", sv_plan, "Plan rows JSONL")->required();
    serve_cmd->add_option("--corpus", sv_corpus, "Documents JSONL")->required();
    serve_cmd->add_option("--queries", sv_queries, "Query quotes JSONL (quote text shown to annotators)");
    serve_cmd->add_option("--chunk-size", sv_chunk_size, "Chunk size used at ingest")->check(CLI::PositiveNumber);
    serve_cmd->add_option("--journal", sv_journal, "Append-only annotation journal");
    serve_cmd->add_option("--static", sv_static, "Directory with the UI bundle");
    serve_cmd->add_option("--host", sv_host, "Bind address");
    serve_cmd->add_option("--port", sv_port, "Port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--threshold", sv_threshold, "Deepening threshold")->check(CLI::Range(0.0, 1.0));
    serve_cmd->callback([&] {
        action = [&] {
            auto docs = ingest_file(sv_corpus);
            const ChunkCatalog catalog(chunk_all(docs, sv_chunk_size));
            const auto metadata = index_metadata(std::move(docs));
            std::map<std::string, std::string> quotes;
            if (!sv_queries.empty()) {
                for (const auto& q : read_quotes_file(sv_queries)) quotes[q.quote_id] = q.text;
            }
            std::map<std::string, std::vector<RankedHit>> pool;
            for (const auto& h : read_hits_file(sv_hits)) pool[h.query_id].push_back(h);
            std::optional<fs::path> journal;
            if (!sv_journal.empty()) journal = sv_journal;
            AnnotationStore store(journal);
            std::size_t added = 0;
            for (const auto& plan : plans_from_rows(jsonl::read_file(sv_plan))) {
                added += store.enqueue(enqueue_candidates(plan, pool[plan.query_id], metadata, catalog, quotes));
            }
            ServerOptions opts;
            opts.deepen_threshold = sv_threshold;
            if (!sv_static.empty()) opts.static_dir = sv_static;
            AnnotationServer server(store, catalog, opts);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << added << " new candidates on http://" << sv_host << ':' << sv_port << '\n';
            if (!server.listen(sv_host, sv_port)) throw DataError("cannot listen on " + sv_host + ":" + std::to_string(sv_port));
            g_server = nullptr;
        };
    });

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Ranking-validity statistics over annotations");
    stats_cmd->require_subcommand(1);
    std::string st_ann, st_out, st_rho = "pooled", st_facet = "author", st_partition;
    std::size_t st_top = 0;
    auto load_hits = [&] { return annotated_hits_from_rows(jsonl::read_file(st_ann)); };
    auto* table_cmd = stats_cmd->add_subcommand("table", "Yield by rank band and Spearman correlation per label");
    table_cmd->add_option("--rho-mode", st_rho, "pooled or mean")->check(CLI::IsMember({"pooled", "mean"}));
    auto* csv_flag = table_cmd->add_flag("--csv", "CSV instead of a text table");
    auto* curve_cmd = stats_cmd->add_subcommand("curve", "Cumulative significant yield per query");
    auto* facets_cmd = stats_cmd->add_subcommand("facets", "Label counts per author, genre or decade");
    facets_cmd->add_option("--facet", st_facet, "author, genre or decade")->check(CLI::IsMember({"author", "genre", "decade"}));
    facets_cmd->add_option("--top", st_top, "Keep the n most frequent values (0 = all)");
    auto* wl_cmd = stats_cmd->add_subcommand("worklevel", "Distinct works: significant semantic vs lexical");
    wl_cmd->add_option("--partition", st_partition, "Partition rows JSONL")->required();
    for (auto* c : {table_cmd, curve_cmd, facets_cmd, wl_cmd}) {
        c->add_option("--annotations", st_ann, "Exported annotations JSONL")->required();
        c->add_option("--out", st_out, "Output file (default stdout)");
    }
    table_cmd->callback([&] {
        action = [&] {
            const auto rows = category_table(load_hits(), st_rho == "mean" ? RhoMode::Mean : RhoMode::Pooled);
            emit(st_out, csv_flag->count() ? category_table_csv(rows) : render_category_table(rows));
        };
    });
    curve_cmd->callback([&] {
        action = [&] {
            std::map<std::string, std::vector<AnnotatedHit>> per;
            for (auto& h : load_hits()) per[h.query_id].push_back(std::move(h));
            std::ostringstream out;
            out << "query_id,rank,cumulative_significant_fraction\n";
            for (const auto& [q, list] : per) {
                for (const auto& p : yield_curve(list)) {
                    out << q << ',' << p.rank << ',' << p.cumulative_significant_fraction << '\n';
                }
            }
            emit(st_out, out.str());
        };
    });
    facets_cmd->callback([&] {
        action = [&] { emit(st_out, facet_table_csv(facet_counts(load_hits(), *parse_facet(st_facet), st_top))); };
    });
    wl_cmd->callback([&] {
        action = [&] {
            HitPartition part;
            for (const auto& j : jsonl::read_file(st_partition)) {
                if (jsonl::get_string(j, "partition") == "intersection") part.intersection.push_back(hit_from_json(j));
            }
            const auto w = work_level_comparison(part, load_hits());
            Json j;
            j["significant_semantic_works"] = w.significant_semantic_works;
            j["lexical_works"] = w.lexical_works;
            emit(st_out, j.dump(2) + "\n");
        };
    });

    // diagnose
    auto* diag_cmd = app.add_subcommand("diagnose", "Linguistic features, confusion quadrants, language mix");
    diag_cmd->require_subcommand(1);
    std::string dg_ann, dg_vocab = std::string(RECEPTION_DATA_DIR) + "/en_vocab.txt",
                        dg_lexicon = std::string(RECEPTION_DATA_DIR) + "/en_lexicon.tsv", dg_out = ".", dg_corpus;
    bool dg_all_languages = false, dg_strict = false;
    auto* feat_cmd = diag_cmd->add_subcommand("features", "Vocab Sim., OOV and POS Div. per candidate");
    auto* quad_cmd = diag_cmd->add_subcommand("quadrants", "Confusion quadrant per candidate");
    auto* sum_cmd = diag_cmd->add_subcommand("summary", "Feature mean and std per quadrant");
    auto* lang_cmd = diag_cmd->add_subcommand("langdist", "Language shares per label against the corpus baseline");
    lang_cmd->add_option("--corpus", dg_corpus, "Documents JSONL for the token baseline")->required();
    for (auto* c : {feat_cmd, quad_cmd, sum_cmd, lang_cmd}) {
        c->add_option("--annotations", dg_ann, "Exported annotations JSONL")->required();
        c->add_option("--vocab", dg_vocab, "Reference word list");
        c->add_option("--lexicon", dg_lexicon, "POS lexicon TSV");
        c->add_option("--out", dg_out, "Output directory");
    }
    for (auto* c : {quad_cmd, sum_cmd}) {
        c->add_flag("--all-languages", dg_all_languages, "Do not restrict quadrants to English hits");
        c->add_flag("--strict", dg_strict, "Only No Match counts as non-significant");
    }
    auto diagnose = [&](const std::string& which) {
        auto hits = annotated_hits_from_rows(jsonl::read_file(dg_ann));
        const StopwordDetector detector;
        std::vector<std::string> langs;
        for (auto& h : hits) {
            langs.push_back(detector.detect(h.hit_text));
            h.language = langs.back();
        }
        fs::create_directories(dg_out);
        const fs::path dir(dg_out);
        if (which == "langdist") {
            const auto table = language_distribution(hits, langs, token_baseline(ingest_file(dg_corpus)));
            write_text_file(dir / "langdist.csv", language_table_csv(table));
            return;
        }
        const auto quadrants = assign_quadrants(hits, !dg_all_languages,
                                                dg_strict ? NegativeClass::Strict : NegativeClass::Inclusive);
        if (which == "quadrants") {
            write_text_file(dir / "quadrants.csv", quadrants_csv(quadrants));
            return;
        }
        const RuleAnnotator annotator(load_lexicon_file(dg_lexicon));
        const auto features = compute_features(hits, annotator, load_vocabulary_file(dg_vocab));
        if (which == "features") {
            write_text_file(dir / "features.csv", features_csv(features));
            return;
        }
        write_text_file(dir / "summary.csv", summary_csv(quadrant_summary(quadrants, features)));
    };
    feat_cmd->callback([&] { action = [&] { diagnose("features"); }; });
    quad_cmd->callback([&] { action = [&] { diagnose("quadrants"); }; });
    sum_cmd->callback([&] { action = [&] { diagnose("summary"); }; });
    lang_cmd->callback([&] { action = [&] { diagnose("langdist"); }; });

    // demo
    auto* demo_cmd = app.add_subcommand("demo", "Write the synthetic demo corpus and its ground truth");
    DemoOptions demo_opts;
    std::string demo_out;
    demo_cmd->add_option("--seed", demo_opts.seed, "Generator seed");
    demo_cmd->add_option("--quotes", demo_opts.quotes, "Planted quotes")->check(CLI::PositiveNumber);
    demo_cmd->add_option("--verbatim", demo_opts.verbatim_per_quote, "Verbatim copies per quote");
    demo_cmd->add_option("--paraphrases", demo_opts.paraphrases_per_quote, "Paraphrases per quote");
    demo_cmd->add_option("--noise", demo_opts.noise_docs, "Noise documents");
    demo_cmd->add_option("--ocr-rate", demo_opts.ocr_rate, "Letter substitution rate")->check(CLI::Range(0.0, 1.0));
    demo_cmd->add_option("--out", demo_out, "Output directory")->required();
    demo_cmd->callback([&] {
        action = [&] {
            const auto demo = make_demo_corpus(demo_opts);
            fs::create_directories(demo_out);
            const fs::path dir(demo_out);
            std::ostringstream corpus;
            write_documents(corpus, demo.documents);
            write_text_file(dir / "corpus.jsonl", corpus.str());
            write_jsonl_file(dir / "demo_truth.jsonl", rows_of(demo.plants));
            write_jsonl_file(dir / "demo_quotes.jsonl", rows_of(demo.quotes));
            std::cerr << demo.documents.size() << " documents; source doc_id " << demo.source_doc_id << '\n';
        };
    });

    // run
    auto* run_cmd = app.add_subcommand("run", "Run the whole workflow (resumable)");
    std::string run_config, run_out;
    std::vector<std::string> run_sets;
    bool run_demo = false;
    run_cmd->add_option("--config", run_config, "key = value config file");
    run_cmd->add_option("--set", run_sets, "key=value override (repeatable)");
    run_cmd->add_option("--out-dir", run_out, "Artifact directory");
    run_cmd->add_flag("--demo", run_demo, "Use the synthetic demo corpus");
    run_cmd->callback([&] {
        action = [&] {
            RunConfig cfg = run_config.empty() ? RunConfig{} : load_run_config(run_config);
            if (run_demo) cfg.demo = true;
            if (!run_out.empty()) cfg.out_dir = run_out;
            for (const auto& kv : run_sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
                set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            }
            const auto report = run_pipeline(cfg, &std::cerr);
            std::size_t ran = 0;
            for (const auto& s : report.stages) ran += s.ran;
            std::cerr << ran << " of " << report.stages.size() << " stages ran; artifacts in " << cfg.out_dir.string()
                      << '\n';
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (action) action();
        return 0;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
