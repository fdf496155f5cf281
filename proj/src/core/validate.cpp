#include "lahar/core/validate.hpp"

#include <set>

namespace lahar::core {

const Activity* HouseContext::find_activity_by_label(const std::string& label) const {
    for (const auto& a : activity_catalog) {
        if (a.label == label) {
            return &a;
        }
    }
    return nullptr;
}

std::vector<std::string> validate_house_context(const HouseContext& ctx) {
    std::vector<std::string> violations;

    if (ctx.house_id.empty()) {
        violations.push_back("house_id is empty");
    }
    if (ctx.residents.empty()) {
        violations.push_back("house has no residents");
    }

    std::set<std::string> resident_names;
    for (const auto& r : ctx.residents) {
        if (!resident_names.insert(r).second) {
            violations.push_back("duplicate resident name '" + r + "'");
        }
    }

    std::set<std::string> sensor_ids;
    for (const auto& s : ctx.sensors) {
        if (s.id.empty()) {
            violations.push_back("sensor with empty id");
        } else if (!sensor_ids.insert(s.id).second) {
            violations.push_back("duplicate sensor id " + s.id);
        }
    }

    for (const auto& room : ctx.rooms) {
        for (const auto& sid : room.sensor_ids) {
            if (sensor_ids.count(sid) == 0) {
                violations.push_back("room '" + room.name + "' references unknown sensor " + sid);
            }
        }
    }

    std::set<int> activity_ids;
    bool has_other = false;
    for (const auto& a : ctx.activity_catalog) {
        if (!activity_ids.insert(a.id).second) {
            violations.push_back("duplicate activity id " + std::to_string(a.id));
        }
        if (a.id == 0) {
            has_other = true;
        }
        if (a.id < 0) {
            violations.push_back("negative activity id " + std::to_string(a.id));
        }
    }
    if (!ctx.activity_catalog.empty() && !has_other) {
        violations.push_back("activity catalog lacks reserved id 0 (Other)");
    }

    for (const auto& [resident, text] : ctx.schedule) {
        (void)text;
        if (resident_names.count(resident) == 0) {
            violations.push_back("schedule entry for unknown resident '" + resident + "'");
        }
    }

    return violations;
}

} // namespace lahar::core
