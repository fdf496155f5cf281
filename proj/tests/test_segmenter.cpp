#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lahar/config/config.hpp"
#include "lahar/core/errors.hpp"
#include "lahar/ingest/ingest.hpp"
#include "lahar/segmenter/segmenter.hpp"

#include "test_support.hpp"

using namespace lahar;
using core::Scenario;
using core::Timestamp;

namespace {

// two-resident rows with all-zero sensor values
std::vector<ingest::ReadingRow> rows_with_labels(const std::vector<std::pair<int, int>>& labels,
                                                 std::int64_t t0 = 0) {
    std::vector<ingest::ReadingRow> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        rows.push_back(ingest::ReadingRow{Timestamp{t0 + static_cast<std::int64_t>(i)},
                                          {0, 0, 0, 0},
                                          {labels[i].first, labels[i].second}});
    }
    return rows;
}

core::LabelMap fixture_like_map() {
    core::LabelMap map;
    map.raw_to_grouped = {{30, 0}, {31, 0}, {32, 1}, {33, 9}, {0, 0}, {1, 1}, {9, 9}};
    return map;
}

} // namespace

TEST_CASE("regroup_labels replaces raw ids by their images") {
    const auto rows = rows_with_labels({{33, 31}, {32, 30}});
    const auto out = segmenter::regroup_labels(rows, fixture_like_map());
    CHECK(out[0].labels == std::vector<int>{9, 0});
    CHECK(out[1].labels == std::vector<int>{1, 0});
}

TEST_CASE("regroup_labels: fixed points stay put; unmapped ids throw") {
    const auto map = fixture_like_map();
    const auto fixed = segmenter::regroup_labels(rows_with_labels({{9, 1}}), map);
    CHECK(fixed[0].labels == std::vector<int>{9, 1});
    CHECK_THROWS_AS(segmenter::regroup_labels(rows_with_labels({{99, 1}}), map), UnmappedLabel);
}

TEST_CASE("regroup_labels is idempotent for an idempotent map") {
    const auto map = fixture_like_map();
    const auto rows = rows_with_labels({{33, 31}, {32, 30}, {30, 33}});
    const auto once = segmenter::regroup_labels(rows, map);
    const auto twice = segmenter::regroup_labels(once, map);
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(once[i].labels == twice[i].labels);
    }
}

TEST_CASE("split_presence_intervals splits at every presence change") {
    // away id = 31; resident 2 leaves in the middle
    std::vector<std::pair<int, int>> labels;
    for (int i = 0; i < 10; ++i) {
        labels.push_back({30, 30});
    }
    for (int i = 0; i < 10; ++i) {
        labels.push_back({30, 31});
    }
    for (int i = 0; i < 10; ++i) {
        labels.push_back({30, 30});
    }
    const auto intervals = segmenter::split_presence_intervals(rows_with_labels(labels), {31});
    REQUIRE(intervals.size() == 3);
    CHECK(intervals[0].present == std::vector<int>{0, 1});
    CHECK(intervals[1].present == std::vector<int>{0});
    CHECK(intervals[2].present == std::vector<int>{0, 1});
}

TEST_CASE("split_presence_intervals also splits at timestamp discontinuities") {
    auto rows = rows_with_labels({{30, 30}, {30, 30}});
    auto more = rows_with_labels({{30, 30}, {30, 30}}, 100);
    rows.insert(rows.end(), more.begin(), more.end());
    const auto intervals = segmenter::split_presence_intervals(rows, {31});
    CHECK(intervals.size() == 2);
}

TEST_CASE("build_segments: zero presence and short intervals are discarded") {
    const core::HouseContext ctx = test::make_test_context();
    segmenter::SegmentOptions opts;
    opts.away_ids = {31};
    opts.min_len = 120;
    opts.label_map = fixture_like_map();

    SUBCASE("both residents away all day") {
        std::vector<std::pair<int, int>> labels(600, {31, 31});
        CHECK(segmenter::build_segments(rows_with_labels(labels), ctx, opts).empty());
    }
    SUBCASE("interval shorter than min_len") {
        std::vector<std::pair<int, int>> labels(600, {31, 31});
        for (int i = 300; i < 360; ++i) {
            labels[static_cast<std::size_t>(i)] = {30, 31}; // 60 s visit < 120 s
        }
        CHECK(segmenter::build_segments(rows_with_labels(labels), ctx, opts).empty());
    }
}

TEST_CASE("build_segments: constructed presence trace becomes MULTI/SINGLE/MULTI") {
    const core::HouseContext ctx = test::make_test_context();
    segmenter::SegmentOptions opts;
    opts.away_ids = {31};
    opts.min_len = 120;
    opts.label_map = fixture_like_map();

    // resident 2 away for the middle block, both home otherwise
    std::vector<std::pair<int, int>> labels;
    for (int i = 0; i < 300; ++i) {
        labels.push_back({30, 30});
    }
    for (int i = 0; i < 300; ++i) {
        labels.push_back({33, 31});
    }
    for (int i = 0; i < 300; ++i) {
        labels.push_back({30, 32});
    }
    const auto segments = segmenter::build_segments(rows_with_labels(labels), ctx, opts, "d00");
    REQUIRE(segments.size() == 3);

    CHECK(segments[0].scenario == Scenario::Multi);
    CHECK(segments[1].scenario == Scenario::Single);
    CHECK(segments[2].scenario == Scenario::Multi);
    CHECK(segments[0].span == core::TimeSpan{Timestamp{0}, Timestamp{300}});
    CHECK(segments[1].span == core::TimeSpan{Timestamp{300}, Timestamp{600}});
    CHECK(segments[2].span == core::TimeSpan{Timestamp{600}, Timestamp{900}});
    CHECK(segments[1].present_residents == std::vector<std::string>{"User 1"});
    CHECK(segments[0].id == "T-d00-s000");

    // scenario label matches a per-second presence re-scan
    for (const auto& seg : segments) {
        for (std::int64_t t = seg.span.start.value; t < seg.span.end.value; ++t) {
            int present = 0;
            const auto& row_labels = labels[static_cast<std::size_t>(t)];
            present += row_labels.first != 31 ? 1 : 0;
            present += row_labels.second != 31 ? 1 : 0;
            CHECK(present == (seg.scenario == Scenario::Single ? 1 : 2));
        }
    }

    // segments tile the presence-positive span without overlap
    for (std::size_t i = 1; i < segments.size(); ++i) {
        CHECK(segments[i - 1].span.end <= segments[i].span.start);
    }

    // ground truth is regrouped and covers the segment span
    const auto& truth = segments[1].ground_truth.at("User 1");
    REQUIRE(truth.size() == 1);
    CHECK(truth[0].activity == 9); // raw 33 -> Sleeping
    CHECK(truth[0].start == segments[1].span.start);
    CHECK(truth[0].end == segments[1].span.end);
}

TEST_CASE("fixture dataset yields the designed 2 SINGLE + 1 MULTI segments") {
    const auto cfg = config::load_house_config(test::fixture_config());
    const auto data = ingest::load_house(cfg.dataset.dir, cfg.context, cfg.dataset.concat_days,
                                         cfg.dataset.day_glob);

    segmenter::SegmentOptions opts;
    opts.away_ids = cfg.eval.away_ids;
    opts.min_len = cfg.eval.min_segment_len;
    opts.label_map = cfg.regroup;
    opts.filter_rules = cfg.filters;

    std::size_t singles = 0, multis = 0, total = 0;
    for (std::size_t d = 0; d < data.days.size(); ++d) {
        const auto segments =
            segmenter::build_segments(data.days[d], cfg.context, opts, "d0" + std::to_string(d));
        for (const auto& seg : segments) {
            ++total;
            (seg.scenario == Scenario::Single ? singles : multis) += 1;
        }
    }
    CHECK(total == 3);
    CHECK(singles == 2);
    CHECK(multis == 1);

    SUBCASE("concatenated loading produces the same segmentation") {
        const auto concat = ingest::load_house(cfg.dataset.dir, cfg.context, true);
        const auto segments = segmenter::build_segments(concat.days[0], cfg.context, opts);
        CHECK(segments.size() == 3);
    }
}
