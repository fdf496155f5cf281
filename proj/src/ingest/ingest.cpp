#include "lahar/ingest/ingest.hpp"

#include <cctype>
#include <charconv>

#include "lahar/core/errors.hpp"
#include "lahar/util/fs.hpp"
#include "lahar/util/text.hpp"

namespace lahar::ingest {

using core::Timestamp;

namespace {

bool parse_int(std::string_view token, int& out) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

long long day_number_in_name(const std::string& name) {
    for (std::size_t i = 0; i < name.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(name[i]))) {
            long long v = 0;
            while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) {
                v = v * 10 + (name[i] - '0');
                ++i;
            }
            return v;
        }
    }
    return -1;
}

} // namespace

ParseResult parse_day_file(const std::string& content, std::int64_t day_index,
                           const core::HouseContext& ctx) {
    if (day_index < 0) {
        throw Error("day_index must be >= 0");
    }
    const std::size_t sensor_count = ctx.sensors.size();
    const std::size_t label_count = ctx.residents.size();
    const std::size_t expected_columns = sensor_count + label_count;

    ParseResult result;
    std::vector<std::string> lines = util::split_lines(content);
    // a trailing newline produces one empty last line; drop it
    if (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    result.rows.reserve(lines.size());

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_number = i + 1;
        std::vector<std::string> tokens = util::split_whitespace(lines[i]);
        if (tokens.size() != expected_columns) {
            throw MalformedLine(line_number, "expected " + std::to_string(expected_columns) +
                                                 " columns, got " + std::to_string(tokens.size()));
        }
        ReadingRow row;
        row.t = Timestamp{day_index * core::kSecondsPerDay + static_cast<std::int64_t>(i)};
        row.values.resize(sensor_count);
        for (std::size_t c = 0; c < sensor_count; ++c) {
            int v = 0;
            if (!parse_int(tokens[c], v)) {
                throw MalformedLine(line_number, "non-integer token '" + tokens[c] + "'");
            }
            if (v != 0 && v != 1) {
                throw MalformedLine(line_number,
                                    "sensor value outside {0,1}: " + std::to_string(v));
            }
            row.values[c] = static_cast<std::uint8_t>(v);
        }
        row.labels.resize(label_count);
        for (std::size_t c = 0; c < label_count; ++c) {
            int v = 0;
            if (!parse_int(tokens[sensor_count + c], v)) {
                throw MalformedLine(line_number,
                                    "non-integer label '" + tokens[sensor_count + c] + "'");
            }
            if (v < 0) {
                throw MalformedLine(line_number, "negative activity label");
            }
            row.labels[c] = v;
        }
        result.rows.push_back(std::move(row));
    }

    if (result.rows.size() != static_cast<std::size_t>(core::kSecondsPerDay)) {
        result.warnings.push_back("day " + std::to_string(day_index) + ": " +
                                  std::to_string(result.rows.size()) + " rows, expected " +
                                  std::to_string(core::kSecondsPerDay));
    }
    return result;
}

HouseData load_house(const std::filesystem::path& dir, const core::HouseContext& ctx,
                     bool concat_days, const std::string& day_glob) {
    std::vector<std::filesystem::path> files = util::list_matching(dir, day_glob);
    if (files.empty()) {
        throw MissingDay("no day files matching '" + day_glob + "' in " + dir.string());
    }

    // filenames must count 1..N without gaps
    std::vector<long long> numbers;
    numbers.reserve(files.size());
    for (const auto& f : files) {
        long long n = day_number_in_name(f.filename().string());
        if (n < 0) {
            throw MissingDay("day file without a number: " + f.filename().string());
        }
        numbers.push_back(n);
    }
    for (std::size_t i = 0; i < numbers.size(); ++i) {
        const long long expected = numbers.front() + static_cast<long long>(i);
        if (numbers[i] != expected) {
            throw MissingDay("gap in day sequence: expected day " + std::to_string(expected) +
                             ", found " + std::to_string(numbers[i]));
        }
    }

    HouseData data;
    std::vector<std::vector<ReadingRow>> per_day;
    per_day.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::int64_t day_index = numbers[i] - numbers.front();
        ParseResult parsed = parse_day_file(util::read_file(files[i]), day_index, ctx);
        for (auto& w : parsed.warnings) {
            data.warnings.push_back(files[i].filename().string() + ": " + w);
        }
        per_day.push_back(std::move(parsed.rows));
    }

    if (concat_days) {
        std::vector<ReadingRow> all;
        for (auto& day : per_day) {
            all.insert(all.end(), std::make_move_iterator(day.begin()),
                       std::make_move_iterator(day.end()));
        }
        data.days.push_back(std::move(all));
    } else {
        data.days = std::move(per_day);
    }
    return data;
}

} // namespace lahar::ingest
