#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lahar/core/types.hpp"
#include "lahar/ingest/ingest.hpp"

namespace lahar::preprocess {

/// Error-sensor filtering rule. DROP_ALWAYS removes every event of the
/// sensor; DROP_UNLESS_COACTIVE keeps an event only when some event of a
/// coactive_set sensor falls within +-window seconds.
struct FilterRule {
    enum class Kind { DropAlways, DropUnlessCoactive };
    Kind kind{Kind::DropAlways};
    std::string sensor;
    std::set<std::string> coactive_set;
    std::int64_t window{0}; // seconds; must be > 0 for DropUnlessCoactive
};

/// One event per 0->1 / 1->0 transition per sensor column. The first row
/// defines initial state and emits nothing. Output ordered by (t, column).
std::vector<core::SensorEvent> detect_events(const std::vector<ingest::ReadingRow>& rows,
                                             const core::HouseContext& ctx);

/// Collapses every maximal run of >= 3 consecutive events from one sensor,
/// uninterrupted by any other sensor's event, to its first and last events.
/// Idempotent.
std::vector<core::SensorEvent> debounce(const std::vector<core::SensorEvent>& events);

/// Applies every rule against the input list (rule order does not matter);
/// surviving events keep their order. Throws UnknownSensor for a rule naming
/// a sensor absent from ctx.
std::vector<core::SensorEvent> apply_filters(const std::vector<core::SensorEvent>& events,
                                             const std::vector<FilterRule>& rules,
                                             const core::HouseContext& ctx);

/// Pairs each ON with the next OFF of the same sensor, filling locations from
/// ctx. Dangling ONs close at span.end (synthetic_close); a leading OFF opens
/// at span.start (synthetic_open). Repeated ONs while a pair is open, and
/// OFFs after the sensor is already known OFF, are redundant and ignored.
/// Result sorted by (start, sensor).
std::vector<core::EventPair> pair_events(const std::vector<core::SensorEvent>& events,
                                         const core::HouseContext& ctx, core::TimeSpan span);

/// The stage-1 input block: one JSON object per pair with exactly the keys
/// "start","end","event","location" in that order, sorted by start time.
std::string render_pairs_json(const std::vector<core::EventPair>& pairs);

/// Debug CSV: t,sensor,change
std::string render_events_csv(const std::vector<core::SensorEvent>& events);

} // namespace lahar::preprocess
