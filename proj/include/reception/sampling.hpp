#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reception/jsonl.hpp"

namespace reception {

enum class Stage { Pilot, Triage, Exhaustive };
enum class SampleReason { Top, Interval };

std::string_view to_string(Stage s);
std::string_view to_string(SampleReason r);
std::optional<Stage> parse_stage(std::string_view s);

struct PlanEntry {
    std::size_t rank = 0;
    SampleReason reason = SampleReason::Top;

    friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

struct SamplingPlan {
    std::string query_id;
    Stage stage = Stage::Pilot;
    std::vector<PlanEntry> entries;  // strictly increasing ranks

    std::vector<std::size_t> ranks() const;
};

struct PlanResult {
    SamplingPlan plan;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kPilotSize = 50;
inline constexpr std::size_t kPilotTop = 5;
inline constexpr std::size_t kTriageTop = 20;
inline constexpr std::size_t kTriageStep = 6;
inline constexpr std::size_t kTriageWindow = 200;
inline constexpr std::size_t kExhaustiveCap = 200;

/// Ranks 1-5, then 45 interval ranks round(5 + i*(0.9N - 5)/45), i = 1..45,
/// computed in exact integer arithmetic (halves round up). A rank that does
/// not exceed its predecessor is bumped to predecessor + 1. Pools smaller
/// than 50 get every rank plus a warning.
PlanResult pilot_plan(std::size_t pool_size, std::string query_id = {});

/// {1..20} and {21, 27, ..., 195}. Throws std::invalid_argument if
/// pool_size < 200.
SamplingPlan triage_plan(std::size_t pool_size, std::string query_id = {});

/// Ranks 1..min(200, pool_size).
SamplingPlan exhaustive_plan(std::size_t pool_size, std::string query_id = {});

struct DeepeningDecision {
    std::string query_id;
    std::optional<double> significant_density;  // nullopt on a zero denominator
    double threshold = 0.5;
    bool deepen = false;
    std::vector<std::string> warnings;
};

inline constexpr double kDefaultDeepenThreshold = 0.5;

/// density = significant / (total - dont_know); deepen iff density >= threshold.
DeepeningDecision decide_deepening(std::size_t significant, std::size_t total, std::size_t dont_know,
                                   double threshold = kDefaultDeepenThreshold, std::string query_id = {});

std::vector<Json> plan_rows(const SamplingPlan& plan);
/// Groups plan rows (possibly several queries/stages) back into plans.
std::vector<SamplingPlan> plans_from_rows(const std::vector<Json>& rows);

}  // namespace reception
