#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lahar/core/types.hpp"

namespace lahar::ingest {

/// One per-second dataset row: binary sensor values in house column order
/// plus one raw activity label per resident.
struct ReadingRow {
    core::Timestamp t;
    std::vector<std::uint8_t> values;
    std::vector<int> labels;
};

struct ParseResult {
    std::vector<ReadingRow> rows;
    std::vector<std::string> warnings;
};

/// Parses one day file: whitespace-separated integers, one row per line,
/// sensor columns first then one label column per resident.
/// t = day_index * 86400 + line_index. Row-count deviations from 86400 warn
/// instead of failing; real dataset files occasionally deviate.
/// Throws MalformedLine (with line number) on bad tokens.
ParseResult parse_day_file(const std::string& content, std::int64_t day_index,
                           const core::HouseContext& ctx);

struct HouseData {
    // one entry per day file when concat_days = false, a single concatenated
    // entry otherwise
    std::vector<std::vector<ReadingRow>> days;
    std::vector<std::string> warnings;
};

/// Loads every day file in `dir` matching `day_glob` (default DAY_*.txt),
/// ordered by the integer in the filename; DAY_n maps to day index n-1.
/// Throws MissingDay when the directory is empty or the numbering has gaps.
HouseData load_house(const std::filesystem::path& dir, const core::HouseContext& ctx,
                     bool concat_days, const std::string& day_glob = "DAY_*.txt");

} // namespace lahar::ingest
