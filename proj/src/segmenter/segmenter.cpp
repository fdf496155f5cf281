#include "lahar/segmenter/segmenter.hpp"

#include <cstdio>

#include "lahar/core/errors.hpp"

namespace lahar::segmenter {

using core::Scenario;
using core::Segment;
using core::TimeSpan;
using core::Timestamp;
using core::TruthInterval;
using ingest::ReadingRow;

std::vector<ReadingRow> regroup_labels(const std::vector<ReadingRow>& rows,
                                       const core::LabelMap& map) {
    std::vector<ReadingRow> out = rows;
    for (auto& row : out) {
        for (auto& label : row.labels) {
            auto grouped = map.apply(label);
            if (!grouped) {
                throw UnmappedLabel("raw activity id " + std::to_string(label) +
                                    " has no image in the label map");
            }
            label = *grouped;
        }
    }
    return out;
}

std::vector<PresenceInterval> split_presence_intervals(const std::vector<ReadingRow>& rows,
                                                       const std::set<int>& away_ids) {
    std::vector<PresenceInterval> intervals;
    if (rows.empty()) {
        return intervals;
    }

    auto present_set = [&](const ReadingRow& row) {
        std::vector<int> present;
        for (std::size_t r = 0; r < row.labels.size(); ++r) {
            if (away_ids.count(row.labels[r]) == 0) {
                present.push_back(static_cast<int>(r));
            }
        }
        return present;
    };

    PresenceInterval current{0, 0, present_set(rows[0])};
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::vector<int> present = present_set(rows[i]);
        // a timestamp discontinuity (short day files under concat) always
        // starts a new interval; ground truth is undefined in the gap
        const bool contiguous = rows[i].t - rows[i - 1].t == 1;
        if (present == current.present && contiguous) {
            current.last_row = i;
        } else {
            intervals.push_back(current);
            current = PresenceInterval{i, i, std::move(present)};
        }
    }
    intervals.push_back(current);
    return intervals;
}

namespace {

std::vector<TruthInterval> run_length_encode(const std::vector<ReadingRow>& rows,
                                             std::size_t first, std::size_t last,
                                             std::size_t resident) {
    std::vector<TruthInterval> out;
    std::size_t run_start = first;
    for (std::size_t i = first + 1; i <= last + 1; ++i) {
        if (i <= last && rows[i].labels[resident] == rows[run_start].labels[resident]) {
            continue;
        }
        out.push_back(TruthInterval{rows[run_start].t, rows[i - 1].t + 1,
                                    rows[run_start].labels[resident]});
        run_start = i;
    }
    return out;
}

} // namespace

std::vector<Segment> build_segments(const std::vector<ReadingRow>& rows,
                                    const core::HouseContext& ctx, const SegmentOptions& opts,
                                    const std::string& day_tag) {
    std::vector<Segment> segments;
    const std::vector<PresenceInterval> intervals = split_presence_intervals(rows, opts.away_ids);

    int index = 0;
    for (const auto& interval : intervals) {
        const std::size_t count = interval.present.size();
        if (count == 0) {
            continue;
        }
        const std::int64_t length =
            rows[interval.last_row].t - rows[interval.first_row].t + 1;
        if (length < opts.min_len) {
            continue;
        }

        Segment seg;
        seg.house_id = ctx.house_id;
        char suffix[16];
        std::snprintf(suffix, sizeof(suffix), "s%03d", index);
        seg.id = ctx.house_id + (day_tag.empty() ? "" : "-" + day_tag) + "-" + suffix;
        seg.span = TimeSpan{rows[interval.first_row].t, rows[interval.last_row].t + 1};
        seg.scenario = count == 1 ? Scenario::Single : Scenario::Multi;
        for (int r : interval.present) {
            seg.present_residents.push_back(ctx.residents[static_cast<std::size_t>(r)]);
        }

        std::vector<ReadingRow> slice(rows.begin() + static_cast<std::ptrdiff_t>(interval.first_row),
                                      rows.begin() + static_cast<std::ptrdiff_t>(interval.last_row) + 1);
        seg.events = preprocess::apply_filters(
            preprocess::debounce(preprocess::detect_events(slice, ctx)), opts.filter_rules, ctx);

        const std::vector<ReadingRow> regrouped = regroup_labels(slice, opts.label_map);
        for (int r : interval.present) {
            seg.ground_truth[ctx.residents[static_cast<std::size_t>(r)]] =
                run_length_encode(regrouped, 0, regrouped.size() - 1,
                                  static_cast<std::size_t>(r));
        }

        segments.push_back(std::move(seg));
        ++index;
    }
    return segments;
}

} // namespace lahar::segmenter
