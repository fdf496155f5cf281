#pragma once

#include <map>
#include <string>
#include <vector>

#include "lahar/core/types.hpp"
#include "lahar/llm/backend.hpp"
#include "lahar/promptgen/promptgen.hpp"

namespace lahar::pipeline {

/// A segment ready to run: the Segment plus its event pairs.
struct PreparedSegment {
    core::Segment segment;
    std::vector<core::EventPair> pairs;
};

struct FailedChunk {
    int stage{1};
    std::string subject; // empty for stage 1
    int chunk_index{0};
    std::string error;
};

struct StageRunResult {
    std::string segment_id;
    int stage{1};
    std::vector<core::ActionDescription> descriptions; // stage 1
    std::vector<core::ActivityRecord> records;         // stage 2 (one subject)
    std::vector<FailedChunk> failed_chunks;
    std::vector<std::string> warnings;
    std::size_t backend_calls{0};
};

enum class UnassignedPolicy { Broadcast, Drop };

struct RunOptions {
    std::size_t n{20}; // stage-1 chunk size (event pairs)
    std::size_t m{15}; // stage-2 chunk size (descriptions)
    UnassignedPolicy unassigned{UnassignedPolicy::Broadcast};
    std::string model{"gpt-4-32k-0613"};
    double temperature{0.0};
    int max_output_tokens{0};
};

/// Stage 1 over one segment: chunks processed strictly in order, carry-over
/// threaded between chunks. A chunk that fails to parse gets one repair
/// round-trip (error + original response appended); failing again marks it
/// failed, and the previous carry-over is reused. Aborts only on
/// BackendUnavailable.
StageRunResult run_stage1(const PreparedSegment& prepared, const core::HouseContext& ctx,
                          const promptgen::TemplateSet& templates, llm::Backend& backend,
                          const RunOptions& opts);

/// Stable partition by subject, each row reduced to its four stage-2 fields.
/// Unassigned rows are broadcast to every resident (or dropped, per policy).
/// Every catalog resident gets an entry, possibly empty.
std::map<std::string, std::vector<promptgen::ReducedDescription>> split_by_subject(
    const std::vector<core::ActionDescription>& descriptions, const core::HouseContext& ctx,
    UnassignedPolicy policy);

/// Stage 2 for one subject's descriptions, M at a time; the previous chunk's
/// final activity label is threaded through as last_activity.
StageRunResult run_stage2(const std::string& subject,
                          const std::vector<promptgen::ReducedDescription>& descriptions,
                          const std::string& segment_id, const core::HouseContext& ctx,
                          const promptgen::TemplateSet& templates, llm::Backend& backend,
                          const RunOptions& opts);

/// Sorts, clips to the segment span, drops duplicates, recomputes durations.
/// Overlaps between different activities are kept (multi-hot evaluation);
/// uncovered seconds stay uncovered.
core::Timeline assemble_timeline(const std::string& subject,
                                 std::vector<core::ActivityRecord> records,
                                 core::TimeSpan segment_span);

struct SegmentResult {
    std::string segment_id;
    std::string house_id;
    core::TimeSpan span;
    core::Scenario scenario{core::Scenario::Single};
    std::vector<std::string> present_residents;
    std::size_t pair_count{0};
    std::size_t backend_calls{0};
    std::vector<core::ActionDescription> descriptions;
    std::vector<FailedChunk> failed_chunks;
    std::map<std::string, std::vector<core::ActivityRecord>> records;  // per resident
    std::map<std::string, core::Timeline> timelines;                   // per resident
    std::vector<std::string> warnings;
    std::string transcript_path;
};

/// Both stages over one segment. Stage-1 chunks are sequential (carry-over
/// dependency); stage-2 subjects run in catalog order.
SegmentResult run_segment(const PreparedSegment& prepared, const core::HouseContext& ctx,
                          const promptgen::TemplateSet& templates, llm::Backend& backend,
                          const RunOptions& opts);

} // namespace lahar::pipeline
