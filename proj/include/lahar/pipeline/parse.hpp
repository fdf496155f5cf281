#pragma once

#include <string>
#include <vector>

#include "lahar/core/types.hpp"

namespace lahar::pipeline {

/// Pulls the first JSON array out of model output: strips code fences and
/// leading prose, repairs trailing commas, accepts a bare object as a
/// one-element array. Throws ResponseParseError("NoJsonFound") otherwise.
std::string extract_json_array(const std::string& text);

/// Validates keys, parses timestamps against `span`, normalizes subjects to
/// catalog residents (or the Unassigned sentinel).
/// Throws ResponseParseError: NoJsonFound, MissingKey, BadTimestamp,
/// UnknownSubject.
std::vector<core::ActionDescription> parse_stage1_response(const std::string& text,
                                                           const core::HouseContext& ctx,
                                                           core::TimeSpan span);

/// Stage-2 rows. "Activity" accepts a bare id, a bare label, or "id: label";
/// duration is recomputed from start/end (model arithmetic is not trusted).
/// Throws ResponseParseError: NoJsonFound, MissingKey, BadTimestamp,
/// UnknownActivity.
std::vector<core::ActivityRecord> parse_stage2_response(const std::string& text,
                                                        const core::HouseContext& ctx,
                                                        core::TimeSpan span);

} // namespace lahar::pipeline
