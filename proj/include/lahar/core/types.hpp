#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lahar/core/timestamp.hpp"

namespace lahar::core {

enum class Change { On, Off };

inline const char* to_string(Change c) { return c == Change::On ? "ON" : "OFF"; }

/// One sensor state transition <t, s, c>.
struct SensorEvent {
    Timestamp t;
    std::string sensor;
    Change change{Change::On};

    bool operator==(const SensorEvent&) const = default;
};

/// A matched ON/OFF interval of one sensor. Dangling events at segment
/// boundaries are closed/opened at the edge and flagged.
struct EventPair {
    Timestamp start;
    Timestamp end;
    std::string sensor;
    std::string location;
    bool synthetic_open{false};  // no prior ON; opened at segment start
    bool synthetic_close{false}; // no later OFF; closed at segment end

    bool operator==(const EventPair&) const = default;
};

struct SensorMeta {
    std::string id;
    std::string kind; // contact, pressure, distance, photocell, ...
    std::string location;
    std::string furniture; // optional, empty when none
    std::string description;
};

struct Room {
    std::string name;
    std::vector<std::string> furniture;
    std::vector<std::string> sensor_ids;
};

struct Activity {
    int id{0};
    std::string label;
    std::string habit; // optional behaviour-pattern text
};

/// Static description of one house: everything the prompt context blocks and
/// the parsers need. Immutable after construction; id 0 is reserved for
/// "Other".
struct HouseContext {
    std::string house_id;
    std::vector<std::string> residents;
    std::vector<Room> rooms;
    std::vector<SensorMeta> sensors;
    std::vector<Activity> activity_catalog;
    std::map<std::string, std::string> schedule; // resident -> free text
    std::string background;

    int sensor_index(const std::string& id) const {
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            if (sensors[i].id == id) {
                return static_cast<int>(i);
            }
        }
        return -1;
    }

    const SensorMeta* find_sensor(const std::string& id) const {
        int i = sensor_index(id);
        return i < 0 ? nullptr : &sensors[static_cast<std::size_t>(i)];
    }

    std::string sensor_location(const std::string& id) const {
        const SensorMeta* s = find_sensor(id);
        return s ? s->location : std::string{};
    }

    const Activity* find_activity(int id) const {
        for (const auto& a : activity_catalog) {
            if (a.id == id) {
                return &a;
            }
        }
        return nullptr;
    }

    const Activity* find_activity_by_label(const std::string& label) const;

    bool has_resident(const std::string& name) const {
        for (const auto& r : residents) {
            if (r == name) {
                return true;
            }
        }
        return false;
    }
};

inline constexpr const char* kUnassignedSubject = "Unassigned";

/// Stage-1 output row: one merged event group with a subject attribution.
struct ActionDescription {
    Timestamp start;
    Timestamp end;
    std::map<std::string, std::string> last_states; // resident -> text
    std::string location;
    std::string subject; // resident name or kUnassignedSubject
    std::string description;
};

/// Stage-2 output row.
struct ActivityRecord {
    Timestamp start;
    Timestamp end;
    std::int64_t duration{0}; // normalized to end - start
    std::string last_activity;
    std::string reasoning;
    int activity{0};

    bool operator==(const ActivityRecord&) const = default;
};

struct TimelineEntry {
    Timestamp start;
    Timestamp end; // exclusive
    int activity{0};

    bool operator==(const TimelineEntry&) const = default;
};

/// Per-subject activity timeline; entries sorted by start, all inside the
/// parent segment's span.
struct Timeline {
    std::string subject;
    std::vector<TimelineEntry> entries;
};

enum class Scenario { Single, Multi };

inline const char* to_string(Scenario s) { return s == Scenario::Single ? "SINGLE" : "MULTI"; }

/// Ground-truth run: activity `activity` for every second in [start, end).
struct TruthInterval {
    Timestamp start;
    Timestamp end;
    int activity{0};

    bool operator==(const TruthInterval&) const = default;
};

struct Segment {
    std::string id;
    std::string house_id;
    TimeSpan span;
    Scenario scenario{Scenario::Single};
    std::vector<std::string> present_residents;
    std::vector<SensorEvent> events;
    // regrouped per-resident ground truth, absent when the dataset has none
    std::map<std::string, std::vector<TruthInterval>> ground_truth;
};

/// Raw dataset activity id -> grouped catalog id. `dropped` ids map to 0.
struct LabelMap {
    std::map<int, int> raw_to_grouped;
    std::set<int> dropped;

    std::optional<int> apply(int raw) const {
        if (dropped.count(raw) != 0) {
            return 0;
        }
        auto it = raw_to_grouped.find(raw);
        if (it == raw_to_grouped.end()) {
            return std::nullopt;
        }
        return it->second;
    }
};

} // namespace lahar::core
