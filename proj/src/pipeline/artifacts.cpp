#include "lahar/pipeline/artifacts.hpp"

#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"

namespace lahar::pipeline {

using nlohmann::ordered_json;
using core::Timestamp;

namespace {

std::string render(Timestamp t) { return t.render(); }

Timestamp parse_ts(const std::string& text) {
    auto t = Timestamp::parse(text);
    if (!t) {
        throw Error("bad timestamp in artifact: " + text);
    }
    return *t;
}

ordered_json span_to_json(core::TimeSpan span) {
    return ordered_json{{"start", render(span.start)}, {"end", render(span.end)}};
}

core::TimeSpan span_from_json(const nlohmann::json& j) {
    return core::TimeSpan{parse_ts(j.at("start").get<std::string>()),
                          parse_ts(j.at("end").get<std::string>())};
}

} // namespace

std::string prepared_segment_to_json(const PreparedSegment& prepared) {
    const core::Segment& seg = prepared.segment;
    ordered_json j;
    j["id"] = seg.id;
    j["house"] = seg.house_id;
    j["span"] = span_to_json(seg.span);
    j["scenario"] = core::to_string(seg.scenario);
    j["present_residents"] = seg.present_residents;

    ordered_json events = ordered_json::array();
    for (const auto& ev : seg.events) {
        events.push_back(ordered_json{{"t", render(ev.t)},
                                      {"sensor", ev.sensor},
                                      {"change", core::to_string(ev.change)}});
    }
    j["events"] = std::move(events);

    ordered_json pairs = ordered_json::array();
    for (const auto& p : prepared.pairs) {
        ordered_json pj{{"start", render(p.start)},
                        {"end", render(p.end)},
                        {"sensor", p.sensor},
                        {"location", p.location}};
        if (p.synthetic_open) {
            pj["synthetic_open"] = true;
        }
        if (p.synthetic_close) {
            pj["synthetic_close"] = true;
        }
        pairs.push_back(std::move(pj));
    }
    j["pairs"] = std::move(pairs);

    ordered_json truth = ordered_json::object();
    for (const auto& [resident, intervals] : seg.ground_truth) {
        ordered_json arr = ordered_json::array();
        for (const auto& iv : intervals) {
            arr.push_back(ordered_json{{"start", render(iv.start)},
                                       {"end", render(iv.end)},
                                       {"activity", iv.activity}});
        }
        truth[resident] = std::move(arr);
    }
    j["ground_truth"] = std::move(truth);
    return j.dump(2) + "\n";
}

PreparedSegment prepared_segment_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    PreparedSegment prepared;
    core::Segment& seg = prepared.segment;
    seg.id = j.at("id").get<std::string>();
    seg.house_id = j.at("house").get<std::string>();
    seg.span = span_from_json(j.at("span"));
    seg.scenario = j.at("scenario").get<std::string>() == "SINGLE" ? core::Scenario::Single
                                                                   : core::Scenario::Multi;
    seg.present_residents = j.at("present_residents").get<std::vector<std::string>>();
    for (const auto& ev : j.at("events")) {
        seg.events.push_back(core::SensorEvent{
            parse_ts(ev.at("t").get<std::string>()), ev.at("sensor").get<std::string>(),
            ev.at("change").get<std::string>() == "ON" ? core::Change::On : core::Change::Off});
    }
    for (const auto& p : j.at("pairs")) {
        core::EventPair pair;
        pair.start = parse_ts(p.at("start").get<std::string>());
        pair.end = parse_ts(p.at("end").get<std::string>());
        pair.sensor = p.at("sensor").get<std::string>();
        pair.location = p.at("location").get<std::string>();
        pair.synthetic_open = p.value("synthetic_open", false);
        pair.synthetic_close = p.value("synthetic_close", false);
        prepared.pairs.push_back(std::move(pair));
    }
    if (j.contains("ground_truth")) {
        for (const auto& [resident, arr] : j.at("ground_truth").items()) {
            std::vector<core::TruthInterval> intervals;
            for (const auto& iv : arr) {
                intervals.push_back(core::TruthInterval{parse_ts(iv.at("start").get<std::string>()),
                                                        parse_ts(iv.at("end").get<std::string>()),
                                                        iv.at("activity").get<int>()});
            }
            seg.ground_truth[resident] = std::move(intervals);
        }
    }
    return prepared;
}

namespace {

ordered_json description_to_json(const core::ActionDescription& d) {
    ordered_json j;
    j["start"] = render(d.start);
    j["end"] = render(d.end);
    ordered_json states = ordered_json::object();
    for (const auto& [resident, text] : d.last_states) {
        states[resident] = text;
    }
    j["last_states"] = std::move(states);
    j["location"] = d.location;
    j["subject"] = d.subject;
    j["description"] = d.description;
    return j;
}

core::ActionDescription description_from_json(const nlohmann::json& j) {
    core::ActionDescription d;
    d.start = parse_ts(j.at("start").get<std::string>());
    d.end = parse_ts(j.at("end").get<std::string>());
    if (j.contains("last_states")) {
        for (const auto& [resident, text] : j.at("last_states").items()) {
            d.last_states[resident] = text.get<std::string>();
        }
    }
    d.location = j.at("location").get<std::string>();
    d.subject = j.at("subject").get<std::string>();
    d.description = j.at("description").get<std::string>();
    return d;
}

ordered_json record_to_json(const core::ActivityRecord& r) {
    ordered_json j;
    j["start"] = render(r.start);
    j["end"] = render(r.end);
    j["duration"] = r.duration;
    j["last_activity"] = r.last_activity;
    j["reasoning"] = r.reasoning;
    j["activity"] = r.activity;
    return j;
}

core::ActivityRecord record_from_json(const nlohmann::json& j) {
    core::ActivityRecord r;
    r.start = parse_ts(j.at("start").get<std::string>());
    r.end = parse_ts(j.at("end").get<std::string>());
    r.duration = j.at("duration").get<std::int64_t>();
    r.last_activity = j.at("last_activity").get<std::string>();
    r.reasoning = j.at("reasoning").get<std::string>();
    r.activity = j.at("activity").get<int>();
    return r;
}

} // namespace

std::string segment_result_to_json(const SegmentResult& result) {
    ordered_json j;
    j["segment"] = result.segment_id;
    j["house"] = result.house_id;
    j["span"] = span_to_json(result.span);
    j["scenario"] = core::to_string(result.scenario);
    j["present_residents"] = result.present_residents;
    j["pair_count"] = result.pair_count;
    j["backend_calls"] = result.backend_calls;

    ordered_json descriptions = ordered_json::array();
    for (const auto& d : result.descriptions) {
        descriptions.push_back(description_to_json(d));
    }
    j["descriptions"] = std::move(descriptions);

    ordered_json failed = ordered_json::array();
    for (const auto& f : result.failed_chunks) {
        failed.push_back(ordered_json{{"stage", f.stage},
                                      {"subject", f.subject},
                                      {"chunk", f.chunk_index},
                                      {"error", f.error}});
    }
    j["failed_chunks"] = std::move(failed);

    ordered_json records = ordered_json::object();
    for (const auto& [resident, rows] : result.records) {
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            arr.push_back(record_to_json(r));
        }
        records[resident] = std::move(arr);
    }
    j["records"] = std::move(records);

    ordered_json timelines = ordered_json::object();
    for (const auto& [resident, timeline] : result.timelines) {
        ordered_json arr = ordered_json::array();
        for (const auto& e : timeline.entries) {
            arr.push_back(ordered_json{
                {"start", render(e.start)}, {"end", render(e.end)}, {"activity", e.activity}});
        }
        timelines[resident] = std::move(arr);
    }
    j["timelines"] = std::move(timelines);

    j["warnings"] = result.warnings;
    j["transcript"] = result.transcript_path;
    return j.dump(2) + "\n";
}

SegmentResult segment_result_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SegmentResult result;
    result.segment_id = j.at("segment").get<std::string>();
    result.house_id = j.at("house").get<std::string>();
    result.span = span_from_json(j.at("span"));
    result.scenario = j.at("scenario").get<std::string>() == "SINGLE" ? core::Scenario::Single
                                                                      : core::Scenario::Multi;
    result.present_residents = j.at("present_residents").get<std::vector<std::string>>();
    result.pair_count = j.at("pair_count").get<std::size_t>();
    result.backend_calls = j.at("backend_calls").get<std::size_t>();
    for (const auto& d : j.at("descriptions")) {
        result.descriptions.push_back(description_from_json(d));
    }
    for (const auto& f : j.at("failed_chunks")) {
        result.failed_chunks.push_back(FailedChunk{f.at("stage").get<int>(),
                                                   f.at("subject").get<std::string>(),
                                                   f.at("chunk").get<int>(),
                                                   f.at("error").get<std::string>()});
    }
    for (const auto& [resident, arr] : j.at("records").items()) {
        std::vector<core::ActivityRecord> rows;
        for (const auto& r : arr) {
            rows.push_back(record_from_json(r));
        }
        result.records[resident] = std::move(rows);
    }
    for (const auto& [resident, arr] : j.at("timelines").items()) {
        core::Timeline timeline;
        timeline.subject = resident;
        for (const auto& e : arr) {
            timeline.entries.push_back(core::TimelineEntry{
                parse_ts(e.at("start").get<std::string>()),
                parse_ts(e.at("end").get<std::string>()), e.at("activity").get<int>()});
        }
        result.timelines[resident] = std::move(timeline);
    }
    result.warnings = j.value("warnings", std::vector<std::string>{});
    result.transcript_path = j.value("transcript", "");
    return result;
}

} // namespace lahar::pipeline
