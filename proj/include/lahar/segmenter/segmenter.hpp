#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lahar/core/types.hpp"
#include "lahar/ingest/ingest.hpp"
#include "lahar/preprocess/preprocess.hpp"

namespace lahar::segmenter {

/// Replaces every raw label by its grouped image; dropped classes become 0.
/// Throws UnmappedLabel when a raw id has no image.
std::vector<ingest::ReadingRow> regroup_labels(const std::vector<ingest::ReadingRow>& rows,
                                               const core::LabelMap& map);

/// A maximal run of rows with a constant set of present residents (and
/// contiguous timestamps). Presence = raw label not in away_ids.
struct PresenceInterval {
    std::size_t first_row{0};
    std::size_t last_row{0}; // inclusive
    std::vector<int> present; // resident indices
};

std::vector<PresenceInterval> split_presence_intervals(const std::vector<ingest::ReadingRow>& rows,
                                                       const std::set<int>& away_ids);

struct SegmentOptions {
    std::set<int> away_ids;
    std::int64_t min_len{120}; // seconds; shorter intervals are discarded
    core::LabelMap label_map;
    std::vector<preprocess::FilterRule> filter_rules;
};

/// Splits rows into SINGLE/MULTI segments around away periods, attaches each
/// segment's detected+debounced+filtered events and its regrouped ground
/// truth. `day_tag` distinguishes ids across independently segmented days.
std::vector<core::Segment> build_segments(const std::vector<ingest::ReadingRow>& rows,
                                          const core::HouseContext& ctx,
                                          const SegmentOptions& opts,
                                          const std::string& day_tag = "");

} // namespace lahar::segmenter
