#include "lahar/preprocess/preprocess.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"

namespace lahar::preprocess {

using core::Change;
using core::EventPair;
using core::SensorEvent;
using core::TimeSpan;
using core::Timestamp;

std::vector<SensorEvent> detect_events(const std::vector<ingest::ReadingRow>& rows,
                                       const core::HouseContext& ctx) {
    std::vector<SensorEvent> events;
    if (rows.size() < 2) {
        return events;
    }
    const std::size_t n = ctx.sensors.size();
    // row-major scan keeps events ordered by (t, column index)
    for (std::size_t r = 1; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const std::uint8_t prev = rows[r - 1].values[c];
            const std::uint8_t cur = rows[r].values[c];
            if (prev != cur) {
                events.push_back(SensorEvent{rows[r].t, ctx.sensors[c].id,
                                             cur == 1 ? Change::On : Change::Off});
            }
        }
    }
    return events;
}

std::vector<SensorEvent> debounce(const std::vector<SensorEvent>& events) {
    std::vector<SensorEvent> out;
    out.reserve(events.size());
    std::size_t i = 0;
    while (i < events.size()) {
        std::size_t j = i;
        while (j + 1 < events.size() && events[j + 1].sensor == events[i].sensor) {
            ++j;
        }
        const std::size_t run = j - i + 1;
        if (run >= 3) {
            out.push_back(events[i]);
            out.push_back(events[j]);
        } else {
            for (std::size_t k = i; k <= j; ++k) {
                out.push_back(events[k]);
            }
        }
        i = j + 1;
    }
    return out;
}

std::vector<SensorEvent> apply_filters(const std::vector<SensorEvent>& events,
                                       const std::vector<FilterRule>& rules,
                                       const core::HouseContext& ctx) {
    for (const auto& rule : rules) {
        if (ctx.sensor_index(rule.sensor) < 0) {
            throw UnknownSensor("filter rule names unknown sensor " + rule.sensor);
        }
        for (const auto& co : rule.coactive_set) {
            if (ctx.sensor_index(co) < 0) {
                throw UnknownSensor("filter rule coactive set names unknown sensor " + co);
            }
        }
        if (rule.kind == FilterRule::Kind::DropUnlessCoactive && rule.window <= 0) {
            throw Error("DROP_UNLESS_COACTIVE rule for " + rule.sensor +
                        " requires a positive window");
        }
    }

    // coactivity is judged against the full input list, so rule order is
    // irrelevant and rules cannot starve each other
    std::vector<bool> drop(events.size(), false);
    for (const auto& rule : rules) {
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (events[i].sensor != rule.sensor) {
                continue;
            }
            if (rule.kind == FilterRule::Kind::DropAlways) {
                drop[i] = true;
                continue;
            }
            bool coactive = false;
            for (std::size_t k = 0; k < events.size() && !coactive; ++k) {
                if (rule.coactive_set.count(events[k].sensor) == 0) {
                    continue;
                }
                const std::int64_t dt = events[k].t - events[i].t;
                coactive = dt >= -rule.window && dt <= rule.window;
            }
            if (!coactive) {
                drop[i] = true;
            }
        }
    }

    std::vector<SensorEvent> out;
    out.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!drop[i]) {
            out.push_back(events[i]);
        }
    }
    return out;
}

std::vector<EventPair> pair_events(const std::vector<SensorEvent>& events,
                                   const core::HouseContext& ctx, TimeSpan span) {
    struct SensorState {
        bool open = false;
        Timestamp open_t;
        bool emitted_any = false;
    };
    std::map<std::string, SensorState> states;
    std::vector<EventPair> pairs;

    auto emit = [&](Timestamp s, Timestamp e, const std::string& sensor, bool syn_open,
                    bool syn_close) {
        pairs.push_back(EventPair{s, e, sensor, ctx.sensor_location(sensor), syn_open, syn_close});
        states[sensor].emitted_any = true;
    };

    for (const auto& ev : events) {
        SensorState& st = states[ev.sensor];
        if (ev.change == Change::On) {
            if (!st.open) {
                st.open = true;
                st.open_t = ev.t;
            }
            // repeated ON while open: continuation, earliest start wins
        } else {
            if (st.open) {
                emit(st.open_t, ev.t, ev.sensor, false, false);
                st.open = false;
            } else if (!st.emitted_any) {
                // sensor was ON before the segment started
                emit(span.start, ev.t, ev.sensor, true, false);
            }
            // OFF after a known OFF: redundant, ignore
        }
    }
    for (auto& [sensor, st] : states) {
        if (st.open) {
            emit(st.open_t, span.end, sensor, false, true);
        }
    }

    std::sort(pairs.begin(), pairs.end(), [](const EventPair& a, const EventPair& b) {
        if (a.start != b.start) {
            return a.start < b.start;
        }
        return a.sensor < b.sensor;
    });
    return pairs;
}

std::string render_pairs_json(const std::vector<EventPair>& pairs) {
    std::vector<EventPair> sorted = pairs;
    std::sort(sorted.begin(), sorted.end(), [](const EventPair& a, const EventPair& b) {
        if (a.start != b.start) {
            return a.start < b.start;
        }
        return a.sensor < b.sensor;
    });

    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : sorted) {
        nlohmann::ordered_json obj;
        obj["start"] = p.start.render();
        obj["end"] = p.end.render();
        obj["event"] = p.sensor + " ON and OFF";
        obj["location"] = p.location;
        arr.push_back(std::move(obj));
    }
    return arr.dump();
}

std::string render_events_csv(const std::vector<SensorEvent>& events) {
    std::string out = "t,sensor,change\n";
    for (const auto& ev : events) {
        out += ev.t.render();
        out += ',';
        out += ev.sensor;
        out += ',';
        out += core::to_string(ev.change);
        out += '\n';
    }
    return out;
}

} // namespace lahar::preprocess
