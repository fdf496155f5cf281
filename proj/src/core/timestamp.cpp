#include "lahar/core/timestamp.hpp"

#include <cctype>
#include <cstdio>

namespace lahar::core {

namespace {

bool parse_hms(const std::string& text, std::size_t pos, std::int64_t& out) {
    // strict HH:MM:SS, two digits each
    if (text.size() - pos != 8 || text[pos + 2] != ':' || text[pos + 5] != ':') {
        return false;
    }
    auto digit = [&](std::size_t i) -> int {
        unsigned char c = static_cast<unsigned char>(text[pos + i]);
        return std::isdigit(c) ? c - '0' : -1;
    };
    int h1 = digit(0), h0 = digit(1), m1 = digit(3), m0 = digit(4), s1 = digit(6), s0 = digit(7);
    if (h1 < 0 || h0 < 0 || m1 < 0 || m0 < 0 || s1 < 0 || s0 < 0) {
        return false;
    }
    int hh = h1 * 10 + h0, mm = m1 * 10 + m0, ss = s1 * 10 + s0;
    if (hh > 23 || mm > 59 || ss > 59) {
        return false;
    }
    out = hh * 3600 + mm * 60 + ss;
    return true;
}

} // namespace

std::string Timestamp::render() const {
    const std::int64_t sod = second_of_day();
    char buf[32];
    if (day() == 0) {
        std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld",
                      static_cast<long long>(sod / 3600),
                      static_cast<long long>((sod / 60) % 60),
                      static_cast<long long>(sod % 60));
    } else {
        std::snprintf(buf, sizeof(buf), "%lld/%02lld:%02lld:%02lld",
                      static_cast<long long>(day()),
                      static_cast<long long>(sod / 3600),
                      static_cast<long long>((sod / 60) % 60),
                      static_cast<long long>(sod % 60));
    }
    return buf;
}

std::optional<Timestamp> Timestamp::parse(const std::string& text) {
    std::size_t slash = text.find('/');
    std::int64_t day = 0;
    std::size_t pos = 0;
    if (slash != std::string::npos) {
        if (slash == 0) {
            return std::nullopt;
        }
        for (std::size_t i = 0; i < slash; ++i) {
            unsigned char c = static_cast<unsigned char>(text[i]);
            if (!std::isdigit(c)) {
                return std::nullopt;
            }
            day = day * 10 + (c - '0');
        }
        pos = slash + 1;
    }
    std::int64_t sod = 0;
    if (!parse_hms(text, pos, sod)) {
        return std::nullopt;
    }
    return Timestamp::from_parts(day, sod);
}

std::optional<Timestamp> Timestamp::parse_in_window(const std::string& text,
                                                    Timestamp lo, Timestamp hi) {
    if (text.find('/') != std::string::npos) {
        auto t = parse(text);
        if (!t) {
            return std::nullopt;
        }
        return t;
    }
    std::int64_t sod = 0;
    if (!parse_hms(text, 0, sod)) {
        return std::nullopt;
    }
    for (std::int64_t d = lo.day(); d <= hi.day(); ++d) {
        Timestamp candidate = Timestamp::from_parts(d, sod);
        if (lo <= candidate && candidate <= hi) {
            return candidate;
        }
    }
    // Out-of-window but well-formed: anchor to the window's first day so
    // callers can still clip it to the segment span.
    return Timestamp::from_parts(lo.day(), sod);
}

} // namespace lahar::core
