#include "reception/sampling.hpp"

#include <map>
#include <stdexcept>

#include "reception/error.hpp"

namespace reception {

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Pilot: return "pilot";
        case Stage::Triage: return "triage";
        case Stage::Exhaustive: return "exhaustive";
    }
    return "pilot";
}

std::string_view to_string(SampleReason r) { return r == SampleReason::Top ? "top" : "interval"; }

std::optional<Stage> parse_stage(std::string_view s) {
    if (s == "pilot") return Stage::Pilot;
    if (s == "triage") return Stage::Triage;
    if (s == "exhaustive") return Stage::Exhaustive;
    return std::nullopt;
}

std::vector<std::size_t> SamplingPlan::ranks() const {
    std::vector<std::size_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.rank);
    return out;
}

PlanResult pilot_plan(std::size_t pool_size, std::string query_id) {
    PlanResult res;
    res.plan.query_id = std::move(query_id);
    res.plan.stage = Stage::Pilot;
    auto& entries = res.plan.entries;

    if (pool_size < kPilotSize) {
        for (std::size_t r = 1; r <= pool_size; ++r) {
            entries.push_back({r, r <= kPilotTop ? SampleReason::Top : SampleReason::Interval});
        }
        res.warnings.push_back("pool of " + std::to_string(pool_size) + " is smaller than " +
                               std::to_string(kPilotSize) + "; plan covers every rank");
        return res;
    }

    for (std::size_t r = 1; r <= kPilotTop; ++r) entries.push_back({r, SampleReason::Top});
    constexpr std::size_t kIntervals = kPilotSize - kPilotTop;
    // 5 + i*(0.9N - 5)/45 == (2250 + i*(9N - 50)) / 450
    const long long span = 9LL * static_cast<long long>(pool_size) - 50;
    std::size_t last = kPilotTop;
    for (std::size_t i = 1; i <= kIntervals; ++i) {
        const long long num = 2250 + static_cast<long long>(i) * span;
        auto pos = static_cast<std::size_t>((2 * num + 450) / 900);
        if (pos <= last) pos = last + 1;
        entries.push_back({pos, SampleReason::Interval});
        last = pos;
    }
    return res;
}

SamplingPlan triage_plan(std::size_t pool_size, std::string query_id) {
    if (pool_size < kTriageWindow) {
        throw std::invalid_argument("triage plan needs a pool of at least " + std::to_string(kTriageWindow) +
                                    " hits, got " + std::to_string(pool_size));
    }
    SamplingPlan plan{std::move(query_id), Stage::Triage, {}};
    for (std::size_t r = 1; r <= kTriageTop; ++r) plan.entries.push_back({r, SampleReason::Top});
    for (std::size_t k = 0; k < kPilotSize - kTriageTop; ++k) {
        plan.entries.push_back({kTriageTop + 1 + k * kTriageStep, SampleReason::Interval});
    }
    return plan;
}

SamplingPlan exhaustive_plan(std::size_t pool_size, std::string query_id) {
    SamplingPlan plan{std::move(query_id), Stage::Exhaustive, {}};
    const std::size_t n = std::min(pool_size, kExhaustiveCap);
    for (std::size_t r = 1; r <= n; ++r) plan.entries.push_back({r, SampleReason::Top});
    return plan;
}

DeepeningDecision decide_deepening(std::size_t significant, std::size_t total, std::size_t dont_know,
                                   double threshold, std::string query_id) {
    DeepeningDecision d;
    d.query_id = std::move(query_id);
    d.threshold = threshold;
    if (dont_know > total || significant > total - dont_know) {
        throw std::invalid_argument("decide_deepening: inconsistent counts");
    }
    const std::size_t denom = total - dont_know;
    if (denom == 0) {
        d.deepen = false;
        d.warnings.push_back("no decisive annotations; stopping");
        return d;
    }
    d.significant_density = static_cast<double>(significant) / static_cast<double>(denom);
    d.deepen = *d.significant_density >= threshold;
    return d;
}

std::vector<Json> plan_rows(const SamplingPlan& plan) {
    std::vector<Json> rows;
    rows.reserve(plan.entries.size());
    for (const auto& e : plan.entries) {
        Json j;
        j["query_id"] = plan.query_id;
        j["stage"] = to_string(plan.stage);
        j["rank"] = e.rank;
        j["reason"] = to_string(e.reason);
        rows.push_back(std::move(j));
    }
    return rows;
}

std::vector<SamplingPlan> plans_from_rows(const std::vector<Json>& rows) {
    std::vector<SamplingPlan> plans;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    for (const auto& j : rows) {
        try {
            const auto qid = j.at("query_id").get<std::string>();
            const auto stage_s = j.at("stage").get<std::string>();
            const auto stage = parse_stage(stage_s);
            if (!stage) throw DataError("unknown stage '" + stage_s + "'");
            auto [it, inserted] = index.emplace(std::make_pair(qid, stage_s), plans.size());
            if (inserted) plans.push_back({qid, *stage, {}});
            const auto reason = j.value("reason", std::string("top")) == "interval" ? SampleReason::Interval
                                                                                   : SampleReason::Top;
            plans[it->second].entries.push_back({j.at("rank").get<std::size_t>(), reason});
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("bad plan record: ") + e.what());
        }
    }
    return plans;
}

}  // namespace reception
