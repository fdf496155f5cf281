#include "lahar/pipeline/pipeline.hpp"

#include <algorithm>

#include "lahar/core/errors.hpp"
#include "lahar/pipeline/parse.hpp"

namespace lahar::pipeline {

using core::ActionDescription;
using core::ActivityRecord;
using core::Timeline;
using core::TimelineEntry;
using core::TimeSpan;
using promptgen::CarryOver;
using promptgen::ReducedDescription;

namespace {

llm::CompletionRequest to_request(const promptgen::PromptBundle& bundle,
                                  const std::string& model, double temperature,
                                  int max_output_tokens) {
    llm::CompletionRequest req;
    req.model = model;
    req.temperature = temperature;
    req.system = bundle.system;
    req.user = bundle.user;
    req.max_output_tokens = max_output_tokens;
    return req;
}

llm::CompletionRequest repair_request(const llm::CompletionRequest& original,
                                      const std::string& response, const std::string& error) {
    llm::CompletionRequest repair = original;
    // keep the [Input] block intact and append the repair context after it
    repair.user += "\n\n[Repair]\nYour previous response could not be parsed.\nError: " + error +
                   "\nPrevious response:\n" + response +
                   "\nRespond again with ONLY the corrected JSON array.";
    return repair;
}

} // namespace

StageRunResult run_stage1(const PreparedSegment& prepared, const core::HouseContext& ctx,
                          const promptgen::TemplateSet& templates, llm::Backend& backend,
                          const RunOptions& opts) {
    StageRunResult result;
    result.segment_id = prepared.segment.id;
    result.stage = 1;

    const auto chunks = promptgen::chunk_pairs(prepared.pairs, opts.n);
    CarryOver carry = CarryOver::initial(ctx);

    for (std::size_t i = 0; i < chunks.size(); ++i) {
        promptgen::ChunkMeta meta;
        meta.segment_id = prepared.segment.id;
        meta.chunk_index = static_cast<int>(i);
        const promptgen::PromptBundle bundle =
            promptgen::build_stage1_prompt(ctx, templates, chunks[i], carry, meta);
        const llm::CompletionRequest req =
            to_request(bundle, opts.model, opts.temperature, opts.max_output_tokens);

        std::vector<ActionDescription> rows;
        bool ok = false;
        std::string response;
        try {
            ++result.backend_calls;
            response = backend.complete(req);
            rows = parse_stage1_response(response, ctx, prepared.segment.span);
            ok = true;
        } catch (const ResponseParseError& first_error) {
            try {
                ++result.backend_calls;
                const std::string retry =
                    backend.complete(repair_request(req, response, first_error.what()));
                rows = parse_stage1_response(retry, ctx, prepared.segment.span);
                ok = true;
            } catch (const ResponseParseError& second_error) {
                result.failed_chunks.push_back(FailedChunk{
                    1, "", static_cast<int>(i), second_error.what()});
            }
        }
        // BackendUnavailable and friends propagate: the run aborts

        if (!ok) {
            continue; // previous carry-over is reused for the next chunk
        }
        for (const auto& row : rows) {
            if (row.subject != core::kUnassignedSubject) {
                carry.last_description[row.subject] = row.description;
            }
        }
        result.descriptions.insert(result.descriptions.end(), rows.begin(), rows.end());
    }
    return result;
}

std::map<std::string, std::vector<ReducedDescription>> split_by_subject(
    const std::vector<ActionDescription>& descriptions, const core::HouseContext& ctx,
    UnassignedPolicy policy) {
    std::map<std::string, std::vector<ReducedDescription>> by_subject;
    for (const auto& r : ctx.residents) {
        by_subject[r]; // every resident present, possibly empty
    }
    for (const auto& d : descriptions) {
        ReducedDescription reduced{d.start, d.end, d.location, d.description};
        if (d.subject == core::kUnassignedSubject) {
            if (policy == UnassignedPolicy::Broadcast) {
                for (auto& [name, rows] : by_subject) {
                    (void)name;
                    rows.push_back(reduced);
                }
            }
            continue;
        }
        by_subject[d.subject].push_back(std::move(reduced));
    }
    return by_subject;
}

StageRunResult run_stage2(const std::string& subject,
                          const std::vector<ReducedDescription>& descriptions,
                          const std::string& segment_id, const core::HouseContext& ctx,
                          const promptgen::TemplateSet& templates, llm::Backend& backend,
                          const RunOptions& opts) {
    StageRunResult result;
    result.segment_id = segment_id;
    result.stage = 2;
    if (descriptions.empty()) {
        return result; // no calls for a subject with nothing to reason about
    }

    core::TimeSpan window{descriptions.front().start, descriptions.back().end + 1};
    const auto chunks = promptgen::chunk(descriptions, opts.m);
    std::string last_activity = promptgen::kNoLastActivity;

    for (std::size_t i = 0; i < chunks.size(); ++i) {
        promptgen::ChunkMeta meta;
        meta.segment_id = segment_id;
        meta.chunk_index = static_cast<int>(i);
        const promptgen::PromptBundle bundle =
            promptgen::build_stage2_prompt(ctx, templates, chunks[i], last_activity, meta);
        const llm::CompletionRequest req =
            to_request(bundle, opts.model, opts.temperature, opts.max_output_tokens);

        std::vector<ActivityRecord> rows;
        bool ok = false;
        std::string response;
        try {
            ++result.backend_calls;
            response = backend.complete(req);
            rows = parse_stage2_response(response, ctx, window);
            ok = true;
        } catch (const ResponseParseError& first_error) {
            try {
                ++result.backend_calls;
                const std::string retry =
                    backend.complete(repair_request(req, response, first_error.what()));
                rows = parse_stage2_response(retry, ctx, window);
                ok = true;
            } catch (const ResponseParseError& second_error) {
                result.failed_chunks.push_back(FailedChunk{
                    2, subject, static_cast<int>(i), second_error.what()});
            }
        }

        if (!ok) {
            continue; // last_activity stays as before
        }
        for (const auto& row : rows) {
            if (row.duration != row.end - row.start) {
                result.warnings.push_back("duration mismatch in " + segment_id);
            }
        }
        if (!rows.empty()) {
            const core::Activity* act = ctx.find_activity(rows.back().activity);
            last_activity = act != nullptr ? act->label : std::to_string(rows.back().activity);
        }
        result.records.insert(result.records.end(), rows.begin(), rows.end());
    }
    return result;
}

Timeline assemble_timeline(const std::string& subject, std::vector<ActivityRecord> records,
                           TimeSpan segment_span) {
    std::sort(records.begin(), records.end(),
              [](const ActivityRecord& a, const ActivityRecord& b) {
                  if (a.start != b.start) {
                      return a.start < b.start;
                  }
                  if (a.end != b.end) {
                      return a.end < b.end;
                  }
                  return a.activity < b.activity;
              });

    Timeline timeline;
    timeline.subject = subject;
    for (const auto& rec : records) {
        TimelineEntry entry;
        entry.start = std::max(rec.start, segment_span.start);
        entry.end = std::min(rec.end, segment_span.end);
        entry.activity = rec.activity;
        if (entry.start >= entry.end) {
            continue; // outside the span or zero length after clipping
        }
        if (!timeline.entries.empty() && timeline.entries.back() == entry) {
            continue; // duplicate record
        }
        timeline.entries.push_back(entry);
    }
    return timeline;
}

SegmentResult run_segment(const PreparedSegment& prepared, const core::HouseContext& ctx,
                          const promptgen::TemplateSet& templates, llm::Backend& backend,
                          const RunOptions& opts) {
    SegmentResult result;
    result.segment_id = prepared.segment.id;
    result.house_id = prepared.segment.house_id;
    result.span = prepared.segment.span;
    result.scenario = prepared.segment.scenario;
    result.present_residents = prepared.segment.present_residents;
    result.pair_count = prepared.pairs.size();

    StageRunResult stage1 = run_stage1(prepared, ctx, templates, backend, opts);
    result.backend_calls += stage1.backend_calls;
    result.descriptions = stage1.descriptions;
    result.failed_chunks = stage1.failed_chunks;
    result.warnings = stage1.warnings;

    const auto by_subject = split_by_subject(stage1.descriptions, ctx, opts.unassigned);
    for (const auto& resident : ctx.residents) {
        const auto& descriptions = by_subject.at(resident);
        StageRunResult stage2 = run_stage2(resident, descriptions, prepared.segment.id, ctx,
                                           templates, backend, opts);
        result.backend_calls += stage2.backend_calls;
        result.failed_chunks.insert(result.failed_chunks.end(), stage2.failed_chunks.begin(),
                                    stage2.failed_chunks.end());
        result.warnings.insert(result.warnings.end(), stage2.warnings.begin(),
                               stage2.warnings.end());
        result.records[resident] = stage2.records;
        result.timelines[resident] =
            assemble_timeline(resident, stage2.records, prepared.segment.span);
    }
    return result;
}

} // namespace lahar::pipeline
