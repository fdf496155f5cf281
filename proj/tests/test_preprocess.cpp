#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lahar/core/errors.hpp"
#include "lahar/preprocess/preprocess.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

using namespace lahar;
using core::Change;
using core::EventPair;
using core::SensorEvent;
using core::TimeSpan;
using core::Timestamp;
using test::off;
using test::on;

namespace {

ingest::ReadingRow row(std::int64_t t, std::vector<std::uint8_t> values) {
    return ingest::ReadingRow{Timestamp{t}, std::move(values), {1, 1}};
}

/// Random event stream: per-sensor strictly increasing times (one transition
/// per second per sensor, as detection produces), global (t, sensor) order.
std::vector<SensorEvent> random_events(std::mt19937& rng, std::size_t max_events,
                                       int max_sensors, std::int64_t horizon) {
    std::uniform_int_distribution<int> sensor_count(1, max_sensors);
    const int sensors = sensor_count(rng);
    std::uniform_int_distribution<std::size_t> count(0, max_events);
    std::uniform_int_distribution<std::int64_t> time(0, horizon - 1);
    std::uniform_int_distribution<int> which(0, sensors - 1);
    std::uniform_int_distribution<int> coin(0, 1);

    std::set<std::pair<std::int64_t, int>> used;
    std::vector<SensorEvent> events;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t t = time(rng);
        const int s = which(rng);
        if (!used.insert({t, s}).second) {
            continue; // a sensor changes at most once per second
        }
        events.push_back(SensorEvent{Timestamp{t}, "s" + std::to_string(s),
                                     coin(rng) ? Change::On : Change::Off});
    }
    std::sort(events.begin(), events.end(), [](const SensorEvent& a, const SensorEvent& b) {
        if (a.t != b.t) {
            return a.t < b.t;
        }
        return a.sensor < b.sensor;
    });
    return events;
}

core::HouseContext generic_context(int sensors) {
    core::HouseContext ctx;
    ctx.house_id = "G";
    ctx.residents = {"User 1"};
    for (int i = 0; i < sensors; ++i) {
        ctx.sensors.push_back(core::SensorMeta{"s" + std::to_string(i), "contact",
                                               "Room " + std::to_string(i), "", ""});
    }
    ctx.activity_catalog = {core::Activity{0, "Other", ""}};
    return ctx;
}

} // namespace

TEST_CASE("detect_events finds transitions, first row is initial state") {
    const core::HouseContext ctx = test::make_test_context();
    // sensor column k1: [0,0,1,1,0] at t=100..104
    std::vector<ingest::ReadingRow> rows;
    const std::vector<std::uint8_t> column{0, 0, 1, 1, 0};
    for (std::int64_t i = 0; i < 5; ++i) {
        rows.push_back(row(100 + i, {column[static_cast<std::size_t>(i)], 0, 0, 0}));
    }
    const auto events = preprocess::detect_events(rows, ctx);
    REQUIRE(events.size() == 2);
    CHECK(events[0] == on(102, "k1"));
    CHECK(events[1] == off(104, "k1"));
}

TEST_CASE("detect_events: constant stream produces nothing") {
    const core::HouseContext ctx = test::make_test_context();
    std::vector<ingest::ReadingRow> rows;
    for (std::int64_t i = 0; i < 50; ++i) {
        rows.push_back(row(i, {1, 0, 1, 0}));
    }
    CHECK(preprocess::detect_events(rows, ctx).empty());
}

TEST_CASE("detect_events orders same-second events by column index") {
    const core::HouseContext ctx = test::make_test_context();
    std::vector<ingest::ReadingRow> rows;
    rows.push_back(row(0, {0, 0, 0, 0}));
    rows.push_back(row(1, {0, 1, 0, 1})); // k2 and d1 toggle together
    const auto events = preprocess::detect_events(rows, ctx);
    REQUIRE(events.size() == 2);
    CHECK(events[0].sensor == "k2");
    CHECK(events[1].sensor == "d1");
    CHECK(events[0].t == events[1].t);
}

TEST_CASE("debounce keeps first and last of an uninterrupted run") {
    const auto input = std::vector<SensorEvent>{on(10, "s"), off(11, "s"), on(12, "s"),
                                                off(13, "s"), on(14, "s")};
    const auto result = preprocess::debounce(input);
    REQUIRE(result.size() == 2);
    CHECK(result[0] == on(10, "s"));
    CHECK(result[1] == on(14, "s"));
}

TEST_CASE("debounce leaves interrupted runs alone") {
    const auto input = std::vector<SensorEvent>{on(10, "s"), on(11, "r"), off(12, "s")};
    CHECK(preprocess::debounce(input) == input);
}

TEST_CASE("debounce leaves alternating sensors alone") {
    std::vector<SensorEvent> input;
    for (std::int64_t t = 0; t < 40; ++t) {
        input.push_back(t % 2 == 0 ? on(t, "s") : on(t, "r"));
    }
    CHECK(preprocess::debounce(input) == input);
}

TEST_CASE("debounce is idempotent and matches the oracle on random streams") {
    std::mt19937 rng(20240601);
    for (int trial = 0; trial < 300; ++trial) {
        const auto events = random_events(rng, 200, 5, 500);
        const auto once = preprocess::debounce(events);
        CHECK(once == oracle::debounce(events));
        CHECK(preprocess::debounce(once) == once);
    }
}

TEST_CASE("apply_filters: DROP_ALWAYS removes every event of the sensor") {
    const core::HouseContext ctx = test::make_test_context();
    const std::vector<SensorEvent> events{on(1, "k1"), on(2, "b1"), off(3, "k1"), off(4, "b1")};
    preprocess::FilterRule rule;
    rule.kind = preprocess::FilterRule::Kind::DropAlways;
    rule.sensor = "b1";
    const auto result = preprocess::apply_filters(events, {rule}, ctx);
    REQUIRE(result.size() == 2);
    for (const auto& ev : result) {
        CHECK(ev.sensor == "k1");
    }
}

TEST_CASE("apply_filters: coactivity keeps events near the coactive set") {
    const core::HouseContext ctx = test::make_test_context();
    preprocess::FilterRule rule;
    rule.kind = preprocess::FilterRule::Kind::DropUnlessCoactive;
    rule.sensor = "k1";
    rule.coactive_set = {"k2"};
    rule.window = 300;

    SUBCASE("kept when a coactive event is 30 s away") {
        const std::vector<SensorEvent> events{on(100, "k1"), on(130, "k2")};
        const auto result = preprocess::apply_filters(events, {rule}, ctx);
        CHECK(result.size() == 2);
    }
    SUBCASE("dropped when isolated by more than the window") {
        const std::vector<SensorEvent> events{on(100, "k1"), on(500, "k2")};
        const auto result = preprocess::apply_filters(events, {rule}, ctx);
        REQUIRE(result.size() == 1);
        CHECK(result[0].sensor == "k2");
    }
}

TEST_CASE("apply_filters rejects unknown sensors and keeps order") {
    const core::HouseContext ctx = test::make_test_context();
    preprocess::FilterRule rule;
    rule.sensor = "nope";
    CHECK_THROWS_AS(preprocess::apply_filters({}, {rule}, ctx), UnknownSensor);
}

TEST_CASE("apply_filters window scan matches the brute-force oracle") {
    core::HouseContext ctx = generic_context(5);
    std::mt19937 rng(77);
    preprocess::FilterRule rule;
    rule.kind = preprocess::FilterRule::Kind::DropUnlessCoactive;
    rule.sensor = "s0";
    rule.coactive_set = {"s1", "s2"};
    rule.window = 40;

    for (int trial = 0; trial < 200; ++trial) {
        const auto events = random_events(rng, 120, 5, 400);
        const auto result = preprocess::apply_filters(events, {rule}, ctx);
        std::vector<SensorEvent> expected;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (events[i].sensor == "s0" &&
                !oracle::coactive_within(events, i, rule.coactive_set, rule.window)) {
                continue;
            }
            expected.push_back(events[i]);
        }
        CHECK(result == expected);
    }
}

TEST_CASE("pair_events pairs ON with the next OFF") {
    const core::HouseContext ctx = test::make_test_context();
    const TimeSpan span{Timestamp{0}, Timestamp{100}};
    const auto pairs = preprocess::pair_events({on(10, "k1"), off(25, "k1")}, ctx, span);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].start.value == 10);
    CHECK(pairs[0].end.value == 25);
    CHECK(pairs[0].sensor == "k1");
    CHECK(pairs[0].location == "Kitchen");
    CHECK(!pairs[0].synthetic_open);
    CHECK(!pairs[0].synthetic_close);
}

TEST_CASE("pair_events closes dangling ONs at the segment edge") {
    const core::HouseContext ctx = test::make_test_context();
    const TimeSpan span{Timestamp{0}, Timestamp{100}};
    const auto pairs = preprocess::pair_events({on(40, "k1")}, ctx, span);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].end.value == 100);
    CHECK(pairs[0].synthetic_close);
}

TEST_CASE("pair_events opens a leading OFF at the segment edge") {
    const core::HouseContext ctx = test::make_test_context();
    const TimeSpan span{Timestamp{0}, Timestamp{100}};
    const auto pairs = preprocess::pair_events({off(30, "k1")}, ctx, span);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].start.value == 0);
    CHECK(pairs[0].end.value == 30);
    CHECK(pairs[0].synthetic_open);
}

TEST_CASE("pair_events matches the per-second state oracle on random streams") {
    core::HouseContext ctx = generic_context(5);
    std::mt19937 rng(424242);
    const TimeSpan span{Timestamp{0}, Timestamp{500}};
    for (int trial = 0; trial < 300; ++trial) {
        // debounced first, as in the real pipeline order
        const auto events = preprocess::debounce(random_events(rng, 200, 5, 500));
        const auto pairs = preprocess::pair_events(events, ctx, span);
        const auto expected = oracle::pairs(events, ctx, span);
        CHECK(pairs == expected);

        // per sensor: non-overlapping, ordered, start <= end
        std::map<std::string, Timestamp> last_end;
        for (const auto& p : pairs) {
            CHECK(p.start <= p.end);
            auto it = last_end.find(p.sensor);
            if (it != last_end.end()) {
                CHECK(it->second <= p.start);
            }
            last_end[p.sensor] = p.end;
        }
    }
}

TEST_CASE("render_pairs_json emits the four keys in order, sorted by start") {
    const core::HouseContext ctx = test::make_test_context();
    EventPair a{Timestamp{80124}, Timestamp{80131}, "d1", "Bedroom", false, false};
    EventPair b{Timestamp{100}, Timestamp{200}, "k1", "Kitchen", false, false};
    const std::string json = preprocess::render_pairs_json({a, b}); // out of order on purpose
    CHECK(json ==
          R"([{"start":"00:01:40","end":"00:03:20","event":"k1 ON and OFF","location":"Kitchen"},)"
          R"({"start":"22:15:24","end":"22:15:31","event":"d1 ON and OFF","location":"Bedroom"}])");
}

TEST_CASE("render_pairs_json: empty list") {
    CHECK(preprocess::render_pairs_json({}) == "[]");
}
