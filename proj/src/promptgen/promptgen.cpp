#include "lahar/promptgen/promptgen.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"
#include "lahar/preprocess/preprocess.hpp"
#include "lahar/util/fs.hpp"
#include "lahar/util/text.hpp"

namespace lahar::promptgen {

CarryOver CarryOver::initial(const core::HouseContext& ctx) {
    CarryOver carry;
    for (const auto& r : ctx.residents) {
        carry.last_description[r] = "";
    }
    return carry;
}

TemplateSet TemplateSet::load(const std::filesystem::path& template_dir,
                              const std::filesystem::path& stage1_examples_file,
                              const std::filesystem::path& stage2_examples_file) {
    TemplateSet t;
    t.stage1_system = util::read_file(template_dir / "stage1_system.txt");
    t.stage1_user = util::read_file(template_dir / "stage1_user.txt");
    t.stage2_system = util::read_file(template_dir / "stage2_system.txt");
    t.stage2_user = util::read_file(template_dir / "stage2_user.txt");
    t.stage1_examples = util::read_file(stage1_examples_file);
    t.stage2_examples = util::read_file(stage2_examples_file);
    return t;
}

std::string background_text(const core::HouseContext& ctx) {
    std::string out = "The house has " + std::to_string(ctx.residents.size()) + " resident";
    if (ctx.residents.size() != 1) {
        out += 's';
    }
    out += ": ";
    for (std::size_t i = 0; i < ctx.residents.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += ctx.residents[i];
    }
    out += ". Ambient sensors are installed throughout the house to identify the residents'"
           " activities; every sensor reports a binary state.";
    if (!ctx.background.empty()) {
        out += "\n" + ctx.background;
    }
    return out;
}

std::string house_layout_text(const core::HouseContext& ctx) {
    std::string out;
    for (const auto& room : ctx.rooms) {
        out += "- " + room.name;
        if (!room.furniture.empty()) {
            out += " (furniture: ";
            for (std::size_t i = 0; i < room.furniture.size(); ++i) {
                if (i > 0) {
                    out += ", ";
                }
                out += room.furniture[i];
            }
            out += ")";
        }
        if (!room.sensor_ids.empty()) {
            out += "; sensors: ";
            for (std::size_t i = 0; i < room.sensor_ids.size(); ++i) {
                if (i > 0) {
                    out += ", ";
                }
                out += room.sensor_ids[i];
            }
        }
        out += '\n';
    }
    if (out.empty()) {
        out = "(no rooms declared)\n";
    }
    return out;
}

std::string sensor_description_text(const core::HouseContext& ctx) {
    std::string out;
    for (const auto& s : ctx.sensors) {
        out += "- " + s.id + ": " + s.kind + " sensor";
        if (!s.furniture.empty()) {
            out += " on the " + s.furniture;
        }
        out += " in the " + s.location + ".";
        if (!s.description.empty()) {
            out += " " + s.description;
        }
        out += '\n';
    }
    if (out.empty()) {
        out = "(no sensors declared)\n";
    }
    return out;
}

std::string activity_list_text(const core::HouseContext& ctx) {
    std::string out;
    for (const auto& a : ctx.activity_catalog) {
        out += std::to_string(a.id) + ": " + a.label;
        if (!a.habit.empty()) {
            out += " — " + a.habit;
        }
        out += '\n';
    }
    if (out.empty()) {
        out = "(empty activity list)\n";
    }
    return out;
}

std::string user_schedule_text(const core::HouseContext& ctx) {
    std::string out;
    for (const auto& r : ctx.residents) {
        auto it = ctx.schedule.find(r);
        const std::string text = it == ctx.schedule.end() ? "" : util::trim(it->second);
        out += r + ": " + (text.empty() ? "no schedule constraints" : text) + '\n';
    }
    return out;
}

std::string build_stage1_context(const core::HouseContext& ctx) {
    return "[Background]\n" + background_text(ctx) + "\n\n[House Layout]\n" +
           house_layout_text(ctx) + "\n[Sensor Description]\n" + sensor_description_text(ctx);
}

std::string build_stage2_context(const core::HouseContext& ctx) {
    return "[Sensor Description]\n" + sensor_description_text(ctx) + "\n[Activity List]\n" +
           activity_list_text(ctx) + "\n[User Schedule]\n" + user_schedule_text(ctx);
}

std::vector<std::vector<core::EventPair>> chunk_pairs(const std::vector<core::EventPair>& pairs,
                                                      std::size_t n) {
    if (n < 1) {
        throw Error("chunk size must be >= 1");
    }
    return chunk(pairs, n);
}

std::vector<std::string> stage1_response_keys(const core::HouseContext& ctx) {
    std::vector<std::string> keys{"start", "end"};
    for (const auto& r : ctx.residents) {
        keys.push_back("last state of " + r);
    }
    keys.push_back("location");
    keys.push_back("subject");
    keys.push_back("description");
    return keys;
}

std::vector<std::string> stage2_response_keys() {
    return {"start", "end", "Duration", "Last_Activity", "Reasoning", "Activity"};
}

std::string carry_over_text(const core::HouseContext& ctx, const CarryOver& carry) {
    std::string out;
    for (const auto& r : ctx.residents) {
        auto it = carry.last_description.find(r);
        const std::string text = it == carry.last_description.end() ? "" : it->second;
        out += r + ": " + (text.empty() ? kNoPriorState : text) + '\n';
    }
    return out;
}

std::string render_descriptions_json(const std::vector<ReducedDescription>& descriptions) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& d : descriptions) {
        nlohmann::ordered_json obj;
        obj["start"] = d.start.render();
        obj["end"] = d.end.render();
        obj["location"] = d.location;
        obj["description"] = d.description;
        arr.push_back(std::move(obj));
    }
    return arr.dump();
}

namespace {

std::string quoted_key_list(const std::vector<std::string>& keys) {
    std::string out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += '"' + keys[i] + '"';
    }
    return out;
}

void require_single_input_block(const std::string& user_text) {
    const std::size_t first = user_text.find("[Input]");
    if (first == std::string::npos || user_text.find("[Input]", first + 1) != std::string::npos) {
        throw Error("user template must contain exactly one [Input] block");
    }
}

} // namespace

PromptBundle build_stage1_prompt(const core::HouseContext& ctx, const TemplateSet& templates,
                                 const std::vector<core::EventPair>& pairs_chunk,
                                 const CarryOver& carry, const ChunkMeta& meta) {
    if (pairs_chunk.empty()) {
        throw EmptyChunk("stage-1 chunk has no event pairs");
    }
    PromptBundle bundle;
    bundle.expected_keys = stage1_response_keys(ctx);
    bundle.chunk_meta = meta;
    bundle.chunk_meta.stage = 1;
    bundle.chunk_meta.item_count = pairs_chunk.size();

    const std::vector<std::pair<std::string, std::string>> values{
        {"background", background_text(ctx)},
        {"house_layout", house_layout_text(ctx)},
        {"sensor_description", sensor_description_text(ctx)},
        {"response_keys", quoted_key_list(bundle.expected_keys)},
        {"examples", templates.stage1_examples},
        {"carry_over", carry_over_text(ctx, carry)},
        {"input", preprocess::render_pairs_json(pairs_chunk)},
    };
    bundle.system = util::render_template(templates.stage1_system, values);
    bundle.user = util::render_template(templates.stage1_user, values);
    require_single_input_block(bundle.user);
    return bundle;
}

PromptBundle build_stage2_prompt(const core::HouseContext& ctx, const TemplateSet& templates,
                                 const std::vector<ReducedDescription>& desc_chunk,
                                 const std::string& last_activity, const ChunkMeta& meta) {
    if (desc_chunk.empty()) {
        throw EmptyChunk("stage-2 chunk has no descriptions");
    }
    PromptBundle bundle;
    bundle.expected_keys = stage2_response_keys();
    bundle.chunk_meta = meta;
    bundle.chunk_meta.stage = 2;
    bundle.chunk_meta.item_count = desc_chunk.size();

    const std::vector<std::pair<std::string, std::string>> values{
        {"sensor_description", sensor_description_text(ctx)},
        {"activity_list", activity_list_text(ctx)},
        {"user_schedule", user_schedule_text(ctx)},
        {"response_keys", quoted_key_list(bundle.expected_keys)},
        {"examples", templates.stage2_examples},
        {"last_activity", last_activity.empty() ? kNoLastActivity : last_activity},
        {"input", render_descriptions_json(desc_chunk)},
    };
    bundle.system = util::render_template(templates.stage2_system, values);
    bundle.user = util::render_template(templates.stage2_user, values);
    require_single_input_block(bundle.user);
    return bundle;
}

} // namespace lahar::promptgen
