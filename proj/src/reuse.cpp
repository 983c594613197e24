#include "reception/reuse.hpp"

#include <algorithm>
#include <climits>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "reception/error.hpp"
#include "reception/random.hpp"

namespace reception {

namespace {

constexpr int kDead = INT_MIN / 4;
// Regions up to this many DP cells get a full local-alignment rescoring.
constexpr std::size_t kPolishCells = std::size_t{4} << 20;

enum Dir : std::uint8_t { kStop = 0, kDiag = 1, kUp = 2, kLeft = 3 };

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowered(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = lower(c);
    return out;
}

struct Extension {
    int score = 0;
    std::size_t a_len = 0;
    std::size_t b_len = 0;
    std::size_t matches = 0;
    std::size_t columns = 0;
};

// Gapped X-drop extension from the origin of two sequences given through
// accessors; returns the best-scoring end point with its traceback stats.
template <typename AAt, typename BAt>
Extension xdrop_extend(AAt a, std::size_t n, BAt b, std::size_t m, const AlignmentParams& p) {
    struct Row {
        std::size_t lo;
        std::vector<std::uint8_t> dir;
    };
    std::vector<Row> rows;
    int best = 0;
    std::size_t bi = 0, bj = 0;

    std::vector<int> prev{0};
    std::size_t prev_lo = 0;
    rows.push_back({0, {kStop}});
    for (std::size_t j = 1; j <= m; ++j) {
        const int v = static_cast<int>(j) * p.gap;
        if (v < best - p.x_drop) break;
        prev.push_back(v);
        rows[0].dir.push_back(kLeft);
    }

    std::vector<int> cur;
    std::vector<std::uint8_t> dir;
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t prev_hi = prev_lo + prev.size() - 1;
        const int cutoff = best - p.x_drop;
        const char ai = a(i - 1);
        cur.clear();
        dir.clear();
        for (std::size_t j = prev_lo; j <= m; ++j) {
            int v = kDead;
            std::uint8_t d = kStop;
            if (j >= 1 && j - 1 >= prev_lo && j - 1 <= prev_hi && prev[j - 1 - prev_lo] > kDead) {
                const int s = prev[j - 1 - prev_lo] + (ai == b(j - 1) ? p.match : p.mismatch);
                v = s;
                d = kDiag;
            }
            if (j <= prev_hi && prev[j - prev_lo] > kDead) {
                const int s = prev[j - prev_lo] + p.gap;
                if (s > v) {
                    v = s;
                    d = kUp;
                }
            }
            if (!cur.empty() && cur.back() > kDead) {
                const int s = cur.back() + p.gap;
                if (s > v) {
                    v = s;
                    d = kLeft;
                }
            }
            if (v < cutoff) {
                v = kDead;
                d = kStop;
            }
            cur.push_back(v);
            dir.push_back(d);
            if (j > prev_hi && v == kDead) break;
        }
        std::size_t first = 0;
        while (first < cur.size() && cur[first] == kDead) ++first;
        if (first == cur.size()) break;
        std::size_t last = cur.size() - 1;
        while (cur[last] == kDead) --last;

        const std::size_t lo = prev_lo + first;
        for (std::size_t k = first; k <= last; ++k) {
            if (cur[k] > best) {
                best = cur[k];
                bi = i;
                bj = prev_lo + k;
            }
        }
        rows.push_back({lo, std::vector<std::uint8_t>(dir.begin() + first, dir.begin() + last + 1)});
        prev.assign(cur.begin() + first, cur.begin() + last + 1);
        prev_lo = lo;
    }

    Extension ext{best, bi, bj, 0, 0};
    std::size_t i = bi, j = bj;
    while (i > 0 || j > 0) {
        const auto& row = rows[i];
        const auto d = row.dir[j - row.lo];
        if (d == kDiag) {
            ext.matches += (a(i - 1) == b(j - 1)) ? 1 : 0;
            --i;
            --j;
        } else if (d == kUp) {
            --i;
        } else if (d == kLeft) {
            --j;
        } else {
            break;
        }
        ++ext.columns;
    }
    return ext;
}

int ungapped(std::string_view q, std::string_view t, std::size_t qi, std::size_t tj, int dir,
             const AlignmentParams& p, std::size_t& len) {
    int score = 0, best = 0;
    len = 0;
    for (std::size_t k = 1;; ++k) {
        std::size_t a, b;
        if (dir > 0) {
            a = qi + k - 1;
            b = tj + k - 1;
            if (a >= q.size() || b >= t.size()) break;
        } else {
            if (k > qi || k > tj) break;
            a = qi - k;
            b = tj - k;
        }
        score += (q[a] == t[b]) ? p.match : p.mismatch;
        if (score > best) {
            best = score;
            len = k;
        } else if (score < best - p.x_drop) {
            break;
        }
    }
    return best;
}

bool contains(const Span& s, std::size_t pos) { return pos >= s.begin && pos < s.end; }

}  // namespace

void AlignmentParams::validate() const {
    if (seed_len < 3) throw std::invalid_argument("seed_len must be >= 3");
    if (match <= 0) throw std::invalid_argument("match score must be positive");
    if (mismatch >= 0) throw std::invalid_argument("mismatch score must be negative");
    if (gap >= 0) throw std::invalid_argument("gap score must be negative");
    if (x_drop <= 0) throw std::invalid_argument("x_drop must be positive");
    if (min_score <= 0) throw std::invalid_argument("min_score must be positive");
}

std::size_t overlap(const Span& a, const Span& b) {
    const auto lo = std::max(a.begin, b.begin);
    const auto hi = std::min(a.end, b.end);
    return hi > lo ? hi - lo : 0;
}

LocalAlignment smith_waterman(std::string_view a_in, std::string_view b_in, const AlignmentParams& p) {
    const std::string a = lowered(a_in);
    const std::string b = lowered(b_in);
    const std::size_t n = a.size(), m = b.size();
    LocalAlignment out;
    if (n == 0 || m == 0) return out;

    std::vector<std::uint8_t> dir((n + 1) * (m + 1), kStop);
    std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = 0;
        for (std::size_t j = 1; j <= m; ++j) {
            int v = prev[j - 1] + (a[i - 1] == b[j - 1] ? p.match : p.mismatch);
            std::uint8_t d = kDiag;
            if (prev[j] + p.gap > v) {
                v = prev[j] + p.gap;
                d = kUp;
            }
            if (cur[j - 1] + p.gap > v) {
                v = cur[j - 1] + p.gap;
                d = kLeft;
            }
            if (v <= 0) {
                v = 0;
                d = kStop;
            }
            cur[j] = v;
            dir[i * (m + 1) + j] = d;
            if (v > out.score) {
                out.score = v;
                bi = i;
                bj = j;
            }
        }
        std::swap(prev, cur);
    }
    if (out.score == 0) return out;

    std::size_t i = bi, j = bj;
    while (true) {
        const auto d = dir[i * (m + 1) + j];
        if (d == kStop) break;
        if (d == kDiag) {
            out.matches += (a[i - 1] == b[j - 1]) ? 1 : 0;
            --i;
            --j;
        } else if (d == kUp) {
            --i;
        } else {
            --j;
        }
        ++out.columns;
    }
    out.a_span = {i, bi};
    out.b_span = {j, bj};
    return out;
}

std::vector<LocalAlignment> align_pair(std::string_view query_in, std::string_view target_in,
                                       const AlignmentParams& p) {
    p.validate();
    std::vector<LocalAlignment> found;
    if (query_in.size() < p.seed_len || target_in.size() < p.seed_len) return found;

    const std::string q = lowered(query_in);
    const std::string t = lowered(target_in);
    const std::string_view qv(q), tv(t);

    std::unordered_map<std::string_view, std::vector<std::uint32_t>> seeds;
    for (std::size_t i = 0; i + p.seed_len <= q.size(); ++i) {
        seeds[qv.substr(i, p.seed_len)].push_back(static_cast<std::uint32_t>(i));
    }

    const int trigger = std::max(static_cast<int>(p.seed_len) * p.match, p.min_score / 2);
    // Per diagonal, target offset below which seeds were already explored.
    std::unordered_map<long long, std::size_t> explored;

    for (std::size_t j = 0; j + p.seed_len <= t.size(); ++j) {
        auto it = seeds.find(tv.substr(j, p.seed_len));
        if (it == seeds.end()) continue;
        for (const std::uint32_t i : it->second) {
            const long long diag = static_cast<long long>(j) - static_cast<long long>(i);
            if (auto e = explored.find(diag); e != explored.end() && j < e->second) continue;
            bool covered = false;
            for (const auto& f : found) {
                if (contains(f.a_span, i) && contains(f.b_span, j)) {
                    covered = true;
                    break;
                }
            }
            if (covered) continue;

            std::size_t left_len = 0, right_len = 0;
            const int seed_score = static_cast<int>(p.seed_len) * p.match;
            const int ug = seed_score + ungapped(qv, tv, i, j, -1, p, left_len) +
                           ungapped(qv, tv, i + p.seed_len, j + p.seed_len, +1, p, right_len);
            if (ug < trigger) {
                explored[diag] = j + p.seed_len + right_len;
                continue;
            }

            const std::size_t qe = i + p.seed_len, te = j + p.seed_len;
            const auto right = xdrop_extend([&](std::size_t k) { return qv[qe + k]; }, q.size() - qe,
                                            [&](std::size_t k) { return tv[te + k]; }, t.size() - te, p);
            const auto left = xdrop_extend([&](std::size_t k) { return qv[i - 1 - k]; }, i,
                                           [&](std::size_t k) { return tv[j - 1 - k]; }, j, p);

            LocalAlignment aln;
            aln.score = left.score + seed_score + right.score;
            aln.a_span = {i - left.a_len, qe + right.a_len};
            aln.b_span = {j - left.b_len, te + right.b_len};
            aln.matches = left.matches + p.seed_len + right.matches;
            aln.columns = left.columns + p.seed_len + right.columns;

            if (aln.a_span.length() * aln.b_span.length() <= kPolishCells) {
                auto sw = smith_waterman(qv.substr(aln.a_span.begin, aln.a_span.length()),
                                         tv.substr(aln.b_span.begin, aln.b_span.length()), p);
                if (sw.score >= aln.score) {
                    sw.a_span = {aln.a_span.begin + sw.a_span.begin, aln.a_span.begin + sw.a_span.end};
                    sw.b_span = {aln.b_span.begin + sw.b_span.begin, aln.b_span.begin + sw.b_span.end};
                    aln = sw;
                }
            }
            explored[diag] = std::max(aln.b_span.end, j + p.seed_len);
            if (aln.score < p.min_score) continue;

            bool replaced = false, dominated = false;
            for (auto& f : found) {
                const bool same_region = 2 * overlap(f.a_span, aln.a_span) >=
                                             std::min(f.a_span.length(), aln.a_span.length()) &&
                                         2 * overlap(f.b_span, aln.b_span) >=
                                             std::min(f.b_span.length(), aln.b_span.length());
                if (!same_region) continue;
                if (aln.score > f.score) {
                    f = aln;
                    replaced = true;
                } else {
                    dominated = true;
                }
                break;
            }
            if (!replaced && !dominated) found.push_back(aln);
        }
    }
    std::sort(found.begin(), found.end(), [](const LocalAlignment& x, const LocalAlignment& y) {
        return std::tie(x.b_span.begin, x.a_span.begin) < std::tie(y.b_span.begin, y.a_span.begin);
    });
    return found;
}

Json to_json(const AlignmentMatch& m) {
    Json j;
    j["query_doc"] = m.query_doc;
    j["target_doc"] = m.target_doc;
    j["target_work"] = m.target_work;
    j["query_span"] = {m.query_span.begin, m.query_span.end};
    j["target_span"] = {m.target_span.begin, m.target_span.end};
    j["score"] = m.score;
    j["identity"] = m.identity;
    return j;
}

AlignmentMatch match_from_json(const Json& j) {
    try {
        AlignmentMatch m;
        m.query_doc = j.at("query_doc").get<std::string>();
        m.target_doc = j.at("target_doc").get<std::string>();
        m.target_work = j.value("target_work", std::string{});
        m.query_span = {j.at("query_span").at(0).get<std::size_t>(), j.at("query_span").at(1).get<std::size_t>()};
        m.target_span = {j.at("target_span").at(0).get<std::size_t>(), j.at("target_span").at(1).get<std::size_t>()};
        m.score = j.at("score").get<int>();
        m.identity = j.at("identity").get<double>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad alignment record: ") + e.what());
    }
}

std::vector<AlignmentMatch> read_matches_file(const std::string& path) {
    std::vector<AlignmentMatch> out;
    for (const auto& j : jsonl::read_file(path)) out.push_back(match_from_json(j));
    return out;
}

void write_matches_file(const std::string& path, const std::vector<AlignmentMatch>& matches) {
    std::vector<Json> rows;
    for (const auto& m : matches) rows.push_back(to_json(m));
    jsonl::write_file(path, rows);
}

std::vector<AlignmentMatch> detect_reuse(std::string_view query_text, const std::vector<DocumentRecord>& corpus,
                                         const AlignmentParams& params, const std::string& query_doc,
                                         const std::string& skip_doc, unsigned threads) {
    params.validate();
    std::vector<std::vector<AlignmentMatch>> per_doc(corpus.size());
    auto work = [&](std::size_t d) {
        const auto& doc = corpus[d];
        if (!skip_doc.empty() && doc.doc_id == skip_doc) return;
        for (const auto& a : align_pair(query_text, doc.text, params)) {
            per_doc[d].push_back({query_doc, doc.doc_id, doc.work_id, a.a_span, a.b_span, a.score, a.identity()});
        }
    };
    if (threads <= 1 || corpus.size() < 2) {
        for (std::size_t d = 0; d < corpus.size(); ++d) work(d);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) {
                pool.emplace_back([&, t] {
                    try {
                        for (std::size_t d = t; d < corpus.size(); d += threads) work(d);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    std::vector<AlignmentMatch> all;
    for (auto& v : per_doc) all.insert(all.end(), v.begin(), v.end());
    return all;
}

Json to_json(const ReuseCluster& c) {
    Json j;
    j["cluster_id"] = c.cluster_id;
    j["source_span"] = {c.source_span.begin, c.source_span.end};
    j["canonical_text"] = c.canonical_text;
    j["external_frequency"] = c.external_frequency;
    Json occ = Json::array();
    for (const auto& o : c.occurrences) {
        Json x;
        x["doc_id"] = o.doc_id;
        x["work_id"] = o.work_id;
        x["span"] = {o.span.begin, o.span.end};
        occ.push_back(std::move(x));
    }
    j["occurrences"] = std::move(occ);
    return j;
}

ReuseCluster cluster_from_json(const Json& j) {
    try {
        ReuseCluster c;
        c.cluster_id = j.at("cluster_id").get<std::string>();
        c.source_span = {j.at("source_span").at(0).get<std::size_t>(), j.at("source_span").at(1).get<std::size_t>()};
        c.canonical_text = j.at("canonical_text").get<std::string>();
        c.external_frequency = j.at("external_frequency").get<std::size_t>();
        for (const auto& o : j.at("occurrences")) {
            c.occurrences.push_back({o.at("doc_id").get<std::string>(), o.at("work_id").get<std::string>(),
                                     {o.at("span").at(0).get<std::size_t>(), o.at("span").at(1).get<std::size_t>()}});
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad cluster record: ") + e.what());
    }
}

std::vector<ReuseCluster> cluster_reuses(const std::vector<AlignmentMatch>& matches, const std::string& source_work,
                                         std::string_view source_text) {
    const std::size_t n = matches.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = matches[a].query_span;
        const auto& y = matches[b].query_span;
        return std::tie(x.begin, x.end, a) < std::tie(y.begin, y.end, b);
    });

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    std::vector<std::size_t> active;
    for (const std::size_t k : order) {
        const auto& span = matches[k].query_span;
        std::erase_if(active, [&](std::size_t a) { return matches[a].query_span.end <= span.begin; });
        for (const std::size_t a : active) {
            const auto& other = matches[a].query_span;
            if (2 * overlap(span, other) >= std::min(span.length(), other.length())) {
                parent[find(a)] = find(k);
            }
        }
        active.push_back(k);
    }

    std::unordered_map<std::size_t, std::size_t> cluster_of_root;
    std::vector<std::vector<std::size_t>> members;
    for (const std::size_t k : order) {
        auto [it, inserted] = cluster_of_root.emplace(find(k), members.size());
        if (inserted) members.emplace_back();
        members[it->second].push_back(k);
    }

    std::vector<ReuseCluster> clusters;
    clusters.reserve(members.size());
    for (const auto& group : members) {
        ReuseCluster c;
        c.source_span = matches[group.front()].query_span;
        for (const std::size_t k : group) {
            const auto& m = matches[k];
            c.source_span.begin = std::min(c.source_span.begin, m.query_span.begin);
            c.source_span.end = std::max(c.source_span.end, m.query_span.end);
            c.occurrences.push_back({m.target_doc, m.target_work, m.target_span});
            if (m.target_work != source_work) ++c.external_frequency;
        }
        std::sort(c.occurrences.begin(), c.occurrences.end(), [](const Occurrence& a, const Occurrence& b) {
            return std::tie(a.doc_id, a.span.begin, a.span.end) < std::tie(b.doc_id, b.span.begin, b.span.end);
        });
        if (c.source_span.begin < source_text.size()) {
            c.canonical_text =
                std::string(source_text.substr(c.source_span.begin, c.source_span.length()));
        }
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(), [](const ReuseCluster& a, const ReuseCluster& b) {
        return std::tie(a.source_span.begin, a.source_span.end) < std::tie(b.source_span.begin, b.source_span.end);
    });
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "c%06zu", i + 1);
        clusters[i].cluster_id = buf;
    }
    return clusters;
}

Json to_json(const QueryQuote& q) {
    Json j;
    j["quote_id"] = q.quote_id;
    j["cluster_id"] = q.cluster_id;
    j["text"] = q.text;
    j["external_frequency"] = q.external_frequency;
    j["frequency_rank"] = q.frequency_rank;
    return j;
}

QueryQuote quote_from_json(const Json& j) {
    try {
        return {j.at("quote_id").get<std::string>(), j.value("cluster_id", std::string{}),
                j.at("text").get<std::string>(), j.at("external_frequency").get<std::size_t>(),
                j.at("frequency_rank").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad quote record: ") + e.what());
    }
}

std::vector<QueryQuote> read_quotes_file(const std::string& path) {
    std::vector<QueryQuote> out;
    for (const auto& j : jsonl::read_file(path)) out.push_back(quote_from_json(j));
    return out;
}

std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::vector<QueryQuote> extract_query_quotes(const std::vector<ReuseCluster>& clusters,
                                             const QuoteConstraints& constraints) {
    std::vector<const ReuseCluster*> kept;
    for (const auto& c : clusters) {
        const auto len = utf8_length(c.canonical_text);
        if (len >= constraints.min_len && len <= constraints.max_len &&
            c.external_frequency >= constraints.min_freq) {
            kept.push_back(&c);
        }
    }
    std::sort(kept.begin(), kept.end(), [](const ReuseCluster* a, const ReuseCluster* b) {
        if (a->external_frequency != b->external_frequency) return a->external_frequency > b->external_frequency;
        return a->cluster_id < b->cluster_id;
    });
    std::vector<QueryQuote> out;
    out.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "q%04zu", i + 1);
        out.push_back({buf, kept[i]->cluster_id, kept[i]->canonical_text, kept[i]->external_frequency, i + 1});
    }
    return out;
}

QuerySelection select_query_set(const std::vector<QueryQuote>& ranked, std::uint64_t seed) {
    struct Tier {
        std::size_t lo, hi;
        bool sampled;
    };
    constexpr Tier kTiers[] = {{1, 5, false}, {6, 50, true}, {51, 150, true}, {151, 1000, true}};
    constexpr std::size_t kPerTier = 5;

    QuerySelection sel;
    Rng rng(seed);
    for (const auto& tier : kTiers) {
        std::vector<const QueryQuote*> members;
        for (const auto& q : ranked) {
            if (q.frequency_rank >= tier.lo && q.frequency_rank <= tier.hi) members.push_back(&q);
        }
        std::sort(members.begin(), members.end(),
                  [](const QueryQuote* a, const QueryQuote* b) { return a->frequency_rank < b->frequency_rank; });
        if (members.size() < kPerTier) {
            sel.warnings.push_back("tier " + std::to_string(tier.lo) + "-" + std::to_string(tier.hi) + " has only " +
                                   std::to_string(members.size()) + " quotes; taking all");
        }
        std::vector<const QueryQuote*> picked;
        if (!tier.sampled || members.size() <= kPerTier) {
            picked.assign(members.begin(), members.begin() + std::min(members.size(), kPerTier));
        } else {
            for (const auto idx : sample_indices(rng, members.size(), kPerTier)) picked.push_back(members[idx]);
        }
        for (const auto* q : picked) sel.quotes.push_back(*q);
    }
    std::sort(sel.quotes.begin(), sel.quotes.end(),
              [](const QueryQuote& a, const QueryQuote& b) { return a.frequency_rank < b.frequency_rank; });
    return sel;
}

}  // namespace reception
