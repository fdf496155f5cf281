#include "lahar/llm/mock_backend.hpp"

#include <algorithm>
#include <optional>

#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"
#include "lahar/util/text.hpp"

namespace lahar::llm {

using core::EventPair;
using core::Timestamp;
using promptgen::CarryOver;
using promptgen::ReducedDescription;

namespace {

constexpr std::int64_t kMergeGapSeconds = 60;

struct MergedGroup {
    Timestamp start;
    Timestamp end;
    std::string location;
    std::vector<std::string> sensors; // first-seen order, unique
};

std::vector<MergedGroup> merge_pairs(const std::vector<EventPair>& pairs) {
    // per-location chains: a pair extends its location's open group when the
    // gap is <= 60 s, regardless of interleaved pairs elsewhere
    std::vector<MergedGroup> closed;
    std::map<std::string, MergedGroup> open;

    std::vector<EventPair> sorted = pairs;
    std::sort(sorted.begin(), sorted.end(), [](const EventPair& a, const EventPair& b) {
        if (a.start != b.start) {
            return a.start < b.start;
        }
        return a.sensor < b.sensor;
    });

    for (const auto& p : sorted) {
        auto it = open.find(p.location);
        if (it != open.end() && p.start - it->second.end <= kMergeGapSeconds) {
            MergedGroup& g = it->second;
            g.end = std::max(g.end, p.end);
            if (std::find(g.sensors.begin(), g.sensors.end(), p.sensor) == g.sensors.end()) {
                g.sensors.push_back(p.sensor);
            }
        } else {
            if (it != open.end()) {
                closed.push_back(it->second);
                open.erase(it);
            }
            open.emplace(p.location, MergedGroup{p.start, p.end, p.location, {p.sensor}});
        }
    }
    for (auto& [loc, g] : open) {
        (void)loc;
        closed.push_back(g);
    }
    std::sort(closed.begin(), closed.end(), [](const MergedGroup& a, const MergedGroup& b) {
        if (a.start != b.start) {
            return a.start < b.start;
        }
        return a.location < b.location;
    });
    return closed;
}

std::string sensor_phrase(const core::HouseContext& ctx, const std::vector<std::string>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        const core::SensorMeta* meta = ctx.find_sensor(ids[i]);
        out += ids[i];
        if (meta != nullptr) {
            out += " (" + meta->kind;
            if (!meta->furniture.empty()) {
                out += " on the " + meta->furniture;
            }
            out += ")";
        }
    }
    return out;
}

// The mock's own description template embeds the location between
// " in the " and " from ", which is how carry-over state is read back.
std::optional<std::string> location_from_description(const std::string& text) {
    const std::size_t a = text.find(" in the ");
    if (a == std::string::npos) {
        return std::nullopt;
    }
    const std::size_t b = text.find(" from ", a);
    if (b == std::string::npos) {
        return std::nullopt;
    }
    return text.substr(a + 8, b - (a + 8));
}

bool overlaps(const MergedGroup& a, const MergedGroup& b) {
    return a.start <= b.end && b.start <= a.end;
}

} // namespace

std::string scripted_stage1(const std::vector<EventPair>& chunk, const core::HouseContext& ctx,
                            const CarryOver& carry) {
    const std::vector<MergedGroup> groups = merge_pairs(chunk);

    struct ResidentState {
        std::string name;
        std::optional<std::string> last_location;
        std::string last_description;
        std::vector<MergedGroup> assigned;
    };
    std::vector<ResidentState> residents;
    for (const auto& name : ctx.residents) {
        ResidentState st;
        st.name = name;
        auto it = carry.last_description.find(name);
        if (it != carry.last_description.end() && !it->second.empty()) {
            st.last_description = it->second;
            st.last_location = location_from_description(it->second);
        }
        residents.push_back(std::move(st));
    }

    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        int chosen = -1;
        for (std::size_t r = 0; r < residents.size(); ++r) {
            if (residents[r].last_location && *residents[r].last_location == g.location) {
                chosen = static_cast<int>(r);
                break;
            }
        }
        if (chosen < 0) {
            for (std::size_t r = 0; r < residents.size(); ++r) {
                bool engaged_elsewhere = false;
                for (const auto& assigned : residents[r].assigned) {
                    if (assigned.location != g.location && overlaps(assigned, g)) {
                        engaged_elsewhere = true;
                        break;
                    }
                }
                if (!engaged_elsewhere) {
                    chosen = static_cast<int>(r);
                    break;
                }
            }
        }

        const std::string subject =
            chosen < 0 ? std::string(core::kUnassignedSubject) : residents[chosen].name;

        nlohmann::ordered_json obj;
        obj["start"] = g.start.render();
        obj["end"] = g.end.render();
        for (const auto& st : residents) {
            obj["last state of " + st.name] =
                st.last_description.empty() ? promptgen::kNoPriorState : st.last_description;
        }
        obj["location"] = g.location;
        obj["subject"] = subject;
        const std::string description = subject + " used " + sensor_phrase(ctx, g.sensors) +
                                        " in the " + g.location + " from " + g.start.render() +
                                        " to " + g.end.render() + ".";
        obj["description"] = description;
        arr.push_back(std::move(obj));

        if (chosen >= 0) {
            residents[chosen].assigned.push_back(g);
            residents[chosen].last_location = g.location;
            residents[chosen].last_description = description;
        }
    }
    return arr.dump(2);
}

namespace {

std::string infer_activity_label(const ReducedDescription& d) {
    const std::string loc = util::to_lower(d.location);
    const std::string text = util::to_lower(d.description);
    const std::int64_t duration = d.end - d.start;
    const std::int64_t second_of_day = d.start.second_of_day();

    if (loc.find("kitchen") != std::string::npos) {
        if (second_of_day < 12 * 3600) {
            return "Preparing Breakfast";
        }
        if (second_of_day >= 17 * 3600) {
            return "Preparing Dinner";
        }
        return "Preparing Lunch";
    }
    if (loc.find("toilet") != std::string::npos) {
        return "Toileting";
    }
    if (loc.find("bathroom") != std::string::npos) {
        if (text.find("shower") != std::string::npos) {
            return "Having Shower";
        }
        if (text.find("toilet") != std::string::npos) {
            return "Toileting";
        }
        return duration >= 300 ? "Having Shower" : "Toileting";
    }
    if (loc.find("bedroom") != std::string::npos) {
        if (text.find("on the bed") != std::string::npos && duration >= 120) {
            return "Sleeping";
        }
        if (text.find("wardrobe") != std::string::npos) {
            return "Changing Clothes";
        }
        return "Other";
    }
    if (loc.find("living") != std::string::npos) {
        return "Entertainment";
    }
    return "Other";
}

int label_to_id(const core::HouseContext& ctx, const std::string& label) {
    const core::Activity* a = ctx.find_activity_by_label(label);
    return a == nullptr ? 0 : a->id;
}

} // namespace

std::string scripted_stage2(const std::vector<ReducedDescription>& descriptions,
                            const core::HouseContext& ctx, const std::string& last_activity) {
    struct Record {
        Timestamp start;
        Timestamp end;
        std::string label;
        int id{0};
        std::string location;
    };
    std::vector<Record> records;
    for (const auto& d : descriptions) {
        const std::string label = infer_activity_label(d);
        const int id = label_to_id(ctx, label);
        if (!records.empty() && records.back().id == id) {
            records.back().end = std::max(records.back().end, d.end);
            continue;
        }
        records.push_back(Record{d.start, d.end, label, id, d.location});
    }

    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    std::string previous = last_activity.empty() ? promptgen::kNoLastActivity : last_activity;
    for (const auto& rec : records) {
        nlohmann::ordered_json obj;
        obj["start"] = rec.start.render();
        obj["end"] = rec.end.render();
        obj["Duration"] = rec.end - rec.start;
        obj["Last_Activity"] = previous;
        obj["Reasoning"] = "Activity in the " + rec.location + " lasting " +
                           std::to_string(rec.end - rec.start) + " seconds matches " + rec.label +
                           ".";
        obj["Activity"] = rec.id;
        arr.push_back(std::move(obj));
        previous = rec.label;
    }
    return arr.dump(2);
}

ParsedPrompt parse_prompt(const std::string& user_text, const core::HouseContext& ctx) {
    ParsedPrompt parsed;
    parsed.is_stage2 = user_text.find("[Last Activity]") != std::string::npos;

    const std::size_t input_pos = user_text.find("[Input]");
    if (input_pos == std::string::npos) {
        throw Error("prompt has no [Input] block");
    }
    const std::size_t array_pos = user_text.find('[', input_pos + 7);
    if (array_pos == std::string::npos) {
        throw Error("prompt [Input] block has no JSON array");
    }
    nlohmann::json arr = nlohmann::json::parse(user_text.substr(array_pos), nullptr,
                                               /*allow_exceptions=*/true,
                                               /*ignore_comments=*/false);

    if (parsed.is_stage2) {
        const std::string marker = "previous chunk: ";
        std::size_t la = user_text.find("[Last Activity]");
        la = user_text.find(marker, la);
        if (la != std::string::npos) {
            const std::size_t eol = user_text.find('\n', la);
            parsed.last_activity =
                util::trim(user_text.substr(la + marker.size(),
                                            eol == std::string::npos ? std::string::npos
                                                                     : eol - la - marker.size()));
        }
        for (const auto& obj : arr) {
            ReducedDescription d;
            auto start = Timestamp::parse(obj.value("start", ""));
            auto end = Timestamp::parse(obj.value("end", ""));
            if (!start || !end) {
                throw Error("mock could not parse description timestamps");
            }
            d.start = *start;
            d.end = *end;
            d.location = obj.value("location", "");
            d.description = obj.value("description", "");
            parsed.descriptions.push_back(std::move(d));
        }
        return parsed;
    }

    // stage 1: carry-over lines sit between [Previous State] and [Input]
    parsed.carry = CarryOver::initial(ctx);
    const std::size_t prev_pos = user_text.find("[Previous State]");
    if (prev_pos != std::string::npos && prev_pos < input_pos) {
        const std::string block = user_text.substr(prev_pos, input_pos - prev_pos);
        for (const auto& line : util::split_lines(block)) {
            for (const auto& resident : ctx.residents) {
                const std::string prefix = resident + ": ";
                if (line.rfind(prefix, 0) == 0) {
                    const std::string text = util::trim(line.substr(prefix.size()));
                    parsed.carry.last_description[resident] =
                        text == promptgen::kNoPriorState ? "" : text;
                }
            }
        }
    }

    for (const auto& obj : arr) {
        EventPair p;
        auto start = Timestamp::parse(obj.value("start", ""));
        auto end = Timestamp::parse(obj.value("end", ""));
        if (!start || !end) {
            throw Error("mock could not parse pair timestamps");
        }
        p.start = *start;
        p.end = *end;
        const std::string event = obj.value("event", "");
        p.sensor = event.substr(0, event.find(' '));
        p.location = obj.value("location", "");
        parsed.pairs.push_back(std::move(p));
    }
    return parsed;
}

namespace {

std::string apply_corruption(std::string body, Corruption corruption, bool is_stage2) {
    switch (corruption) {
    case Corruption::None:
        return body;
    case Corruption::Fence:
        return "Sure, here is the JSON you asked for:\n```json\n" + body + "\n```\n";
    case Corruption::TrailingComma: {
        const std::size_t close = body.rfind(']');
        if (close != std::string::npos) {
            body.insert(close, ",");
        }
        const std::size_t first_obj = body.find('}');
        if (first_obj != std::string::npos) {
            body.insert(first_obj, ",");
        }
        return body;
    }
    case Corruption::LabelActivity: {
        if (!is_stage2) {
            return body;
        }
        // not a parse error: the parser must accept label-form Activity
        nlohmann::ordered_json arr = nlohmann::ordered_json::parse(body);
        for (auto& obj : arr) {
            if (obj.contains("Activity") && obj["Activity"].is_number_integer()) {
                const int id = obj["Activity"].get<int>();
                std::string label = obj.value("Reasoning", "");
                const std::string needle = " seconds matches ";
                const std::size_t pos = label.find(needle);
                if (pos != std::string::npos) {
                    label = label.substr(pos + needle.size());
                    if (!label.empty() && label.back() == '.') {
                        label.pop_back();
                    }
                    obj["Activity"] = label;
                } else {
                    obj["Activity"] = std::to_string(id);
                }
            }
        }
        return arr.dump(2);
    }
    case Corruption::MissingKey: {
        nlohmann::ordered_json arr = nlohmann::ordered_json::parse(body);
        if (!arr.empty()) {
            arr[0].erase(is_stage2 ? "Activity" : "subject");
        }
        return arr.dump(2);
    }
    }
    return body;
}

} // namespace

MockBackend::MockBackend(core::HouseContext ctx, std::vector<Corruption> schedule)
    : ctx_(std::move(ctx)), schedule_(std::move(schedule)) {}

std::vector<Corruption> MockBackend::default_adversarial_schedule() {
    return {Corruption::Fence,      Corruption::TrailingComma, Corruption::LabelActivity,
            Corruption::None,       Corruption::MissingKey,    Corruption::MissingKey};
}

std::string MockBackend::complete(const CompletionRequest& req) {
    const std::size_t call_index = calls_.fetch_add(1);
    ParsedPrompt parsed = parse_prompt(req.user, ctx_);
    std::string body = parsed.is_stage2
                           ? scripted_stage2(parsed.descriptions, ctx_, parsed.last_activity)
                           : scripted_stage1(parsed.pairs, ctx_, parsed.carry);
    if (schedule_.empty()) {
        return body;
    }
    const Corruption corruption = schedule_[call_index % schedule_.size()];
    return apply_corruption(std::move(body), corruption, parsed.is_stage2);
}

} // namespace lahar::llm
