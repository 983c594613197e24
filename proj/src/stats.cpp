#include "reception/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <boost/math/distributions/students_t.hpp>

#include "reception/error.hpp"

namespace reception {

namespace {

std::string fmt(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, int prec) { return v ? fmt(*v, prec) : std::string("NA"); }

std::map<std::string, std::vector<const AnnotatedHit*>> by_query_sorted(const std::vector<AnnotatedHit>& hits) {
    std::map<std::string, std::vector<const AnnotatedHit*>> groups;
    for (const auto& h : hits) groups[h.query_id].push_back(&h);
    for (auto& [q, v] : groups) {
        std::stable_sort(v.begin(), v.end(), [](const AnnotatedHit* a, const AnnotatedHit* b) { return a->rank < b->rank; });
    }
    return groups;
}

}  // namespace

std::vector<AnnotatedHit> annotated_hits_from_rows(const std::vector<Json>& rows, std::size_t* skipped) {
    std::vector<AnnotatedHit> out;
    std::size_t n_skipped = 0;
    for (const auto& j : rows) {
        const auto label_text = jsonl::get_string(j, "label");
        if (label_text == kReservedLexicalLabel) {
            ++n_skipped;
            continue;
        }
        const auto label = parse_label(label_text);
        if (!label) throw DataError("unknown label '" + label_text + "'");
        AnnotatedHit h;
        h.label = *label;
        try {
            h.query_id = j.at("query_id").get<std::string>();
            h.rank = j.at("rank").get<std::size_t>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("annotation row needs query_id and rank: ") + e.what());
        }
        h.candidate_id = jsonl::get_string(j, "candidate_id", h.query_id + ":" + std::to_string(h.rank));
        h.pool_size = j.value("pool_size", std::size_t{0});
        h.score = j.value("score", 0.0);
        h.chunk_id = jsonl::get_string(j, "chunk_id");
        h.doc_id = jsonl::get_string(j, "doc_id");
        h.work_id = jsonl::get_string(j, "work_id");
        h.author = jsonl::get_string(j, "author");
        h.title = jsonl::get_string(j, "title");
        if (auto it = j.find("year"); it != j.end() && it->is_number_integer()) h.year = it->get<int>();
        h.genre = jsonl::get_string(j, "genre");
        h.language = jsonl::get_string(j, "language");
        h.quote_text = jsonl::get_string(j, "quote_text");
        h.hit_text = jsonl::get_string(j, "hit_text");
        h.duration_seconds = j.value("duration_seconds", 0.0);
        out.push_back(std::move(h));
    }
    if (skipped) *skipped = n_skipped;
    return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double correlation_p_value(double rho, std::size_t n) {
    if (n < 3) return 1.0;
    const double r2 = rho * rho;
    if (r2 >= 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = std::abs(rho) * std::sqrt(df / (1.0 - r2));
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

std::optional<Correlation> spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman_rho: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) return std::nullopt;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mean = (static_cast<double>(n) + 1.0) / 2.0;  // ranks always average to (n+1)/2
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    double rho = sxy / std::sqrt(sxx * syy);
    rho = std::clamp(rho, -1.0, 1.0);
    return Correlation{rho, correlation_p_value(rho, n)};
}

std::vector<CategoryRow> category_table(const std::vector<AnnotatedHit>& hits, RhoMode mode) {
    const auto groups = by_query_sorted(hits);

    using Pred = bool (*)(const AnnotatedHit&);
    const Pred cutoffs[4] = {
        [](const AnnotatedHit&) { return true; },
        [](const AnnotatedHit& h) { return h.rank <= 5; },
        [](const AnnotatedHit& h) { return 5 * h.rank <= h.pool_size; },
        [](const AnnotatedHit& h) { return 2 * h.rank <= h.pool_size; },
    };

    // sums[cutoff][label] of per-query percentages, with the number of
    // queries contributing to each cutoff.
    double sums[4][kAllLabels.size()] = {};
    std::size_t contributing[4] = {};
    for (const auto& [q, list] : groups) {
        for (int c = 0; c < 4; ++c) {
            std::size_t n = 0;
            std::size_t per_label[kAllLabels.size()] = {};
            for (const auto* h : list) {
                if (!cutoffs[c](*h)) continue;
                ++n;
                ++per_label[static_cast<std::size_t>(h->label)];
            }
            if (n == 0) continue;
            ++contributing[c];
            for (std::size_t l = 0; l < kAllLabels.size(); ++l) {
                sums[c][l] += 100.0 * static_cast<double>(per_label[l]) / static_cast<double>(n);
            }
        }
    }

    std::vector<CategoryRow> rows;
    for (const auto label : kAllLabels) {
        const auto l = static_cast<std::size_t>(label);
        CategoryRow row;
        row.label = label;
        std::optional<double>* cells[4] = {&row.overall_pct, &row.top5_pct, &row.top20pct_pct, &row.top50pct_pct};
        for (int c = 0; c < 4; ++c) {
            if (contributing[c] > 0) *cells[c] = sums[c][l] / static_cast<double>(contributing[c]);
        }

        if (mode == RhoMode::Pooled) {
            std::vector<double> indicator, local;
            for (const auto& [q, list] : groups) {
                for (std::size_t i = 0; i < list.size(); ++i) {
                    indicator.push_back(list[i]->label == label ? 1.0 : 0.0);
                    local.push_back(static_cast<double>(i + 1));
                }
            }
            if (auto r = spearman_rho(indicator, local)) {
                row.rho = r->rho;
                row.p_value = r->p_value;
            }
        } else {
            double total = 0.0;
            std::size_t defined = 0;
            for (const auto& [q, list] : groups) {
                std::vector<double> indicator, local;
                for (std::size_t i = 0; i < list.size(); ++i) {
                    indicator.push_back(list[i]->label == label ? 1.0 : 0.0);
                    local.push_back(static_cast<double>(i + 1));
                }
                if (auto r = spearman_rho(indicator, local)) {
                    total += r->rho;
                    ++defined;
                }
            }
            if (defined > 0) row.rho = total / static_cast<double>(defined);
        }
        rows.push_back(row);
    }
    return rows;
}

std::string render_category_table(const std::vector<CategoryRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-14s | %8s | %8s | %8s | %8s | %10s\n", "Category", "Overall", "Top-5",
                  "Top 20%", "Top 50%", "Spearman");
    out << line << std::string(74, '-') << '\n';
    for (const auto& r : rows) {
        std::string rho = fmt_opt(r.rho, 3);
        if (r.p_value) {
            if (*r.p_value < 0.001) rho += "***";
            else if (*r.p_value < 0.01) rho += "**";
            else if (*r.p_value < 0.05) rho += "*";
        }
        std::snprintf(line, sizeof line, "%-14s | %8s | %8s | %8s | %8s | %10s\n",
                      std::string(to_string(r.label)).c_str(), fmt_opt(r.overall_pct, 1).c_str(),
                      fmt_opt(r.top5_pct, 1).c_str(), fmt_opt(r.top20pct_pct, 1).c_str(),
                      fmt_opt(r.top50pct_pct, 1).c_str(), rho.c_str());
        out << line;
    }
    return out.str();
}

std::string category_table_csv(const std::vector<CategoryRow>& rows) {
    std::ostringstream out;
    out << "label,overall_pct,top5_pct,top20pct_pct,top50pct_pct,rho,p_value\n";
    for (const auto& r : rows) {
        out << to_string(r.label) << ',' << fmt_opt(r.overall_pct, 4) << ',' << fmt_opt(r.top5_pct, 4) << ','
            << fmt_opt(r.top20pct_pct, 4) << ',' << fmt_opt(r.top50pct_pct, 4) << ',' << fmt_opt(r.rho, 6) << ',';
        if (r.p_value) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", *r.p_value);
            out << buf;
        } else {
            out << "NA";
        }
        out << '\n';
    }
    return out.str();
}

std::vector<YieldPoint> yield_curve(const std::vector<AnnotatedHit>& query_hits) {
    std::vector<const AnnotatedHit*> sorted;
    for (const auto& h : query_hits) sorted.push_back(&h);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const AnnotatedHit* a, const AnnotatedHit* b) { return a->rank < b->rank; });
    std::vector<YieldPoint> out;
    std::size_t sig = 0, decisive = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        const std::size_t rank = sorted[i]->rank;
        for (; i < sorted.size() && sorted[i]->rank == rank; ++i) {
            if (sorted[i]->label == Label::DontKnow) continue;
            ++decisive;
            if (is_significant(sorted[i]->label)) ++sig;
        }
        if (decisive > 0) out.push_back({rank, static_cast<double>(sig) / static_cast<double>(decisive)});
    }
    return out;
}

std::optional<Facet> parse_facet(std::string_view s) {
    if (s == "author") return Facet::Author;
    if (s == "genre") return Facet::Genre;
    if (s == "decade") return Facet::Decade;
    return std::nullopt;
}

std::string facet_value(const AnnotatedHit& hit, Facet facet) {
    switch (facet) {
        case Facet::Author: return hit.author.empty() ? "unknown" : hit.author;
        case Facet::Genre: return hit.genre.empty() ? "unknown" : hit.genre;
        case Facet::Decade: {
            if (!hit.year) return "unknown";
            const int y = *hit.year;
            const int decade = (y >= 0 ? y / 10 : -((-y + 9) / 10)) * 10;
            return std::to_string(decade);
        }
    }
    return "unknown";
}

FacetTable facet_counts(const std::vector<AnnotatedHit>& hits, Facet facet, std::size_t top_n) {
    FacetTable t;
    t.facet = facet;
    for (const auto& h : hits) {
        const auto v = facet_value(h, facet);
        ++t.counts[v][h.label];
        ++t.totals[v];
    }
    for (const auto& [v, n] : t.totals) t.values.push_back(v);
    std::stable_sort(t.values.begin(), t.values.end(), [&](const std::string& a, const std::string& b) {
        const auto na = t.totals.at(a), nb = t.totals.at(b);
        return na != nb ? na > nb : a < b;
    });
    if (top_n > 0 && t.values.size() > top_n) {
        for (std::size_t i = top_n; i < t.values.size(); ++i) {
            t.counts.erase(t.values[i]);
            t.totals.erase(t.values[i]);
        }
        t.values.resize(top_n);
    }
    return t;
}

std::string facet_table_csv(const FacetTable& table) {
    std::ostringstream out;
    out << "value";
    for (const auto l : kAllLabels) out << ',' << to_string(l);
    out << ",total\n";
    for (const auto& v : table.values) {
        out << '"' << v << '"';
        const auto& row = table.counts.at(v);
        for (const auto l : kAllLabels) {
            auto it = row.find(l);
            out << ',' << (it == row.end() ? 0 : it->second);
        }
        out << ',' << table.totals.at(v) << '\n';
    }
    return out.str();
}

WorkLevelComparison work_level_comparison(const HitPartition& partition, const std::vector<AnnotatedHit>& hits) {
    std::unordered_set<std::string> semantic, lexical;
    for (const auto& h : hits) {
        if (is_significant(h.label) && !h.work_id.empty()) semantic.insert(h.work_id);
    }
    for (const auto& h : partition.intersection) lexical.insert(h.work_id);
    return {semantic.size(), lexical.size()};
}

std::optional<double> median_duration_seconds(const std::vector<AnnotatedHit>& hits) {
    if (hits.empty()) return std::nullopt;
    std::vector<double> d;
    for (const auto& h : hits) d.push_back(h.duration_seconds);
    std::sort(d.begin(), d.end());
    const std::size_t n = d.size();
    return n % 2 ? d[n / 2] : (d[n / 2 - 1] + d[n / 2]) / 2.0;
}

std::string score_by_category_csv(const std::vector<AnnotatedHit>& hits) {
    std::ostringstream out;
    out << "query_id,rank,label,score\n";
    for (const auto& h : hits) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", h.score);
        out << h.query_id << ',' << h.rank << ',' << to_string(h.label) << ',' << buf << '\n';
    }
    return out.str();
}

}  // namespace reception
