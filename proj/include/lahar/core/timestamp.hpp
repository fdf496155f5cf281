#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace lahar::core {

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Seconds since the house epoch (day_index * 86400 + second_of_day).
/// Renders as "HH:MM:SS" within day 0 and "D/HH:MM:SS" on later days;
/// both forms parse back losslessly.
struct Timestamp {
    std::int64_t value{0};

    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t seconds) : value(seconds) {}

    static constexpr Timestamp from_parts(std::int64_t day, std::int64_t second_of_day) {
        return Timestamp{day * kSecondsPerDay + second_of_day};
    }

    constexpr std::int64_t day() const { return value / kSecondsPerDay; }
    constexpr std::int64_t second_of_day() const { return value % kSecondsPerDay; }

    std::string render() const;

    // Accepts "HH:MM:SS" (day 0) and "D/HH:MM:SS".
    static std::optional<Timestamp> parse(const std::string& text);

    // Resolves a rendered timestamp against a day window: "D/HH:MM:SS" parses
    // directly; a bare "HH:MM:SS" is anchored to the earliest day in
    // [day_lo, day_hi] whose absolute value falls inside [lo, hi].
    static std::optional<Timestamp> parse_in_window(const std::string& text,
                                                    Timestamp lo, Timestamp hi);

    constexpr auto operator<=>(const Timestamp&) const = default;
    constexpr Timestamp operator+(std::int64_t s) const { return Timestamp{value + s}; }
    constexpr Timestamp operator-(std::int64_t s) const { return Timestamp{value - s}; }
    constexpr std::int64_t operator-(Timestamp other) const { return value - other.value; }
};

/// Half-open interval [start, end): `end` is the first second not covered.
struct TimeSpan {
    Timestamp start;
    Timestamp end;

    constexpr std::int64_t length() const { return end.value - start.value; }
    constexpr bool contains(Timestamp t) const { return start <= t && t < end; }
    constexpr auto operator<=>(const TimeSpan&) const = default;
};

} // namespace lahar::core
