#pragma once

#include <map>
#include <string>
#include <vector>

#include "lahar/eval/metrics.hpp"
#include "lahar/pipeline/pipeline.hpp"

namespace lahar::eval {

/// "Single_A" / "Multi_A" style scenario key.
std::string scenario_name(core::Scenario scenario, const std::string& house_id);

enum class SubjectMatching {
    Identity,        // predicted User i <-> dataset resident i
    BestPermutation, // permutation of present residents maximizing summed F1
};

struct SegmentEvaluation {
    std::string segment_id;
    std::string scenario;
    std::vector<ClassCounts> counts; // summed over scored residents
    ConfusionMatrix confusion{0};
    std::int64_t seconds{0};
};

/// Scores one segment against its ground truth. Only present residents are
/// evaluated; timelines of absent residents are ignored.
SegmentEvaluation evaluate_segment(const pipeline::SegmentResult& result,
                                   const core::Segment& segment, const core::HouseContext& ctx,
                                   const ClassIndex& classes, SubjectMatching matching);

struct ClassScore {
    std::int64_t tp{0};
    std::int64_t fp{0};
    std::int64_t fn{0};
    double precision{0.0};
    double recall{0.0};
    double f1{0.0};
    std::int64_t support{0};
};

/// Per-scenario pooled report: counts are accumulated across segments before
/// any ratio is computed. Aggregate rows cover catalog classes except the
/// reserved id 0 (the per-class table's class list).
struct ScenarioReport {
    std::string scenario;
    std::vector<ClassCounts> counts;
    ConfusionMatrix confusion{0};
    std::map<int, ClassScore> per_class; // catalog id -> score
    AggregateScores aggregates;
};

std::vector<ScenarioReport> pool_scenarios(const std::vector<SegmentEvaluation>& evaluations,
                                           const ClassIndex& classes);

// Rendered outputs. All emitters are deterministic for identical inputs.
std::string per_class_csv(const std::vector<ScenarioReport>& reports, const ClassIndex& classes,
                          const core::HouseContext& ctx);

/// Class rows (catalog order, id 0 omitted) x metric-per-scenario columns,
/// then Macro-Average and Weighted-Average rows; absent classes render "/".
std::string summary_grid_csv(const std::vector<ScenarioReport>& reports,
                             const ClassIndex& classes, const core::HouseContext& ctx);

std::string aggregates_json(const std::vector<ScenarioReport>& reports, const ClassIndex& classes,
                            const core::HouseContext& ctx);

/// Long form: truth,pred,mass over every cell, Unknown first.
std::string confusion_csv(const ScenarioReport& report, const ClassIndex& classes,
                          const core::HouseContext& ctx);

} // namespace lahar::eval
