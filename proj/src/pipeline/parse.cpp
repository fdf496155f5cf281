#include "lahar/pipeline/parse.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"
#include "lahar/util/text.hpp"

namespace lahar::pipeline {

using core::ActionDescription;
using core::ActivityRecord;
using core::Timestamp;
using core::TimeSpan;

namespace {

std::string strip_code_fences(const std::string& text) {
    std::string out = text;
    std::size_t open = out.find("```");
    while (open != std::string::npos) {
        // drop the fence line itself (``` or ```json)
        std::size_t line_end = out.find('\n', open);
        if (line_end == std::string::npos) {
            out.erase(open);
            break;
        }
        out.erase(open, line_end - open + 1);
        open = out.find("```");
    }
    return out;
}

std::string remove_trailing_commas(std::string s) {
    // ",}" and ",]" with optional whitespace between
    std::string out;
    out.reserve(s.size());
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            out += c;
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            continue;
        }
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) {
                ++j;
            }
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) {
                continue; // drop the comma
            }
        }
        out += c;
    }
    return out;
}

// first balanced top-level array (string-aware)
std::string first_balanced(const std::string& text, char open_ch, char close_ch) {
    const std::size_t start = text.find(open_ch);
    if (start == std::string::npos) {
        return "";
    }
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == open_ch) {
            ++depth;
        } else if (c == close_ch) {
            --depth;
            if (depth == 0) {
                return text.substr(start, i - start + 1);
            }
        }
    }
    return "";
}

} // namespace

std::string extract_json_array(const std::string& text) {
    const std::string defenced = strip_code_fences(text);
    std::string candidate = first_balanced(defenced, '[', ']');
    if (candidate.empty()) {
        // a bare object counts as a one-element array
        const std::string obj = first_balanced(defenced, '{', '}');
        if (obj.empty()) {
            throw ResponseParseError("NoJsonFound", "no JSON array in response");
        }
        candidate = "[" + obj + "]";
    }
    candidate = remove_trailing_commas(candidate);
    if (!nlohmann::json::accept(candidate)) {
        throw ResponseParseError("NoJsonFound", "candidate text is not valid JSON");
    }
    return candidate;
}

namespace {

const nlohmann::json& require_key(const nlohmann::json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ResponseParseError("MissingKey", key);
    }
    return *it;
}

std::string json_to_text(const nlohmann::json& v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

Timestamp parse_ts(const nlohmann::json& v, TimeSpan span) {
    const std::string text = util::trim(json_to_text(v));
    // the span's last covered second is end-1
    auto t = Timestamp::parse_in_window(text, span.start, span.end - 1);
    if (!t) {
        throw ResponseParseError("BadTimestamp", text);
    }
    return *t;
}

std::string normalize_subject(const std::string& raw, const core::HouseContext& ctx) {
    const std::string trimmed = util::trim(raw);
    if (util::iequals(trimmed, core::kUnassignedSubject) || util::iequals(trimmed, "unknown") ||
        util::iequals(trimmed, "none")) {
        return core::kUnassignedSubject;
    }
    for (const auto& r : ctx.residents) {
        if (util::iequals(trimmed, r)) {
            return r;
        }
    }
    // tolerate squeezed forms like "User1"
    std::string squeezed;
    for (char c : trimmed) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            squeezed += c;
        }
    }
    for (const auto& r : ctx.residents) {
        std::string r_squeezed;
        for (char c : r) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                r_squeezed += c;
            }
        }
        if (util::iequals(squeezed, r_squeezed)) {
            return r;
        }
    }
    throw ResponseParseError("UnknownSubject", trimmed);
}

int normalize_activity(const nlohmann::json& v, const core::HouseContext& ctx) {
    if (v.is_number_integer()) {
        const int id = v.get<int>();
        if (ctx.find_activity(id) == nullptr) {
            throw ResponseParseError("UnknownActivity", std::to_string(id));
        }
        return id;
    }
    const std::string raw = util::trim(json_to_text(v));
    if (raw.empty()) {
        throw ResponseParseError("UnknownActivity", "(empty)");
    }
    // bare id?
    bool all_digits = std::all_of(raw.begin(), raw.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) != 0;
    });
    if (all_digits) {
        const int id = std::stoi(raw);
        if (ctx.find_activity(id) == nullptr) {
            throw ResponseParseError("UnknownActivity", raw);
        }
        return id;
    }
    // "id: label"
    const std::size_t colon = raw.find(':');
    if (colon != std::string::npos) {
        const std::string head = util::trim(raw.substr(0, colon));
        bool head_digits = !head.empty() && std::all_of(head.begin(), head.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c)) != 0;
        });
        if (head_digits) {
            const int id = std::stoi(head);
            if (ctx.find_activity(id) != nullptr) {
                return id;
            }
        }
    }
    // bare label
    for (const auto& a : ctx.activity_catalog) {
        if (util::iequals(raw, a.label)) {
            return a.id;
        }
    }
    throw ResponseParseError("UnknownActivity", raw);
}

} // namespace

std::vector<ActionDescription> parse_stage1_response(const std::string& text,
                                                     const core::HouseContext& ctx,
                                                     TimeSpan span) {
    nlohmann::json arr = nlohmann::json::parse(extract_json_array(text));
    std::vector<ActionDescription> rows;
    rows.reserve(arr.size());
    for (const auto& obj : arr) {
        if (!obj.is_object()) {
            throw ResponseParseError("MissingKey", "array element is not an object");
        }
        ActionDescription row;
        row.start = parse_ts(require_key(obj, "start"), span);
        row.end = parse_ts(require_key(obj, "end"), span);
        if (row.end < row.start) {
            std::swap(row.start, row.end);
        }
        for (const auto& r : ctx.residents) {
            row.last_states[r] = json_to_text(require_key(obj, "last state of " + r));
        }
        row.location = json_to_text(require_key(obj, "location"));
        row.subject = normalize_subject(json_to_text(require_key(obj, "subject")), ctx);
        row.description = json_to_text(require_key(obj, "description"));
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ActionDescription& a, const ActionDescription& b) {
                         return a.start < b.start;
                     });
    return rows;
}

std::vector<ActivityRecord> parse_stage2_response(const std::string& text,
                                                  const core::HouseContext& ctx, TimeSpan span) {
    nlohmann::json arr = nlohmann::json::parse(extract_json_array(text));
    std::vector<ActivityRecord> rows;
    rows.reserve(arr.size());
    for (const auto& obj : arr) {
        if (!obj.is_object()) {
            throw ResponseParseError("MissingKey", "array element is not an object");
        }
        ActivityRecord row;
        row.start = parse_ts(require_key(obj, "start"), span);
        row.end = parse_ts(require_key(obj, "end"), span);
        if (row.end < row.start) {
            std::swap(row.start, row.end);
        }
        require_key(obj, "Duration"); // present but recomputed
        row.duration = row.end - row.start;
        row.last_activity = json_to_text(require_key(obj, "Last_Activity"));
        row.reasoning = json_to_text(require_key(obj, "Reasoning"));
        row.activity = normalize_activity(require_key(obj, "Activity"), ctx);
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ActivityRecord& a, const ActivityRecord& b) {
                         return a.start < b.start;
                     });
    return rows;
}

} // namespace lahar::pipeline
