#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lahar/core/types.hpp"

namespace lahar::promptgen {

struct ChunkMeta {
    std::string segment_id;
    int stage{1};
    int chunk_index{0};
    std::size_t item_count{0};
};

/// One fully rendered request: system + user text plus the response keys the
/// parser will demand. Building is a pure function of its inputs, so
/// identical inputs give byte-identical prompts.
struct PromptBundle {
    std::string system;
    std::string user;
    std::vector<std::string> expected_keys;
    ChunkMeta chunk_meta;
};

/// Per-resident final description from the previous chunk. An empty string
/// means "no prior state".
struct CarryOver {
    std::map<std::string, std::string> last_description;

    static CarryOver initial(const core::HouseContext& ctx);
};

/// The four prompt skeletons plus per-house few-shot example blocks, loaded
/// from plain-text files. Placeholders: {{background}}, {{house_layout}},
/// {{sensor_description}}, {{activity_list}}, {{user_schedule}},
/// {{examples}}, {{carry_over}}, {{input}}, {{last_activity}},
/// {{response_keys}}.
struct TemplateSet {
    std::string stage1_system;
    std::string stage1_user;
    std::string stage2_system;
    std::string stage2_user;
    std::string stage1_examples;
    std::string stage2_examples;

    static TemplateSet load(const std::filesystem::path& template_dir,
                            const std::filesystem::path& stage1_examples_file,
                            const std::filesystem::path& stage2_examples_file);
};

// Context block renderers. Deterministic byte output for identical ctx.
std::string background_text(const core::HouseContext& ctx);
std::string house_layout_text(const core::HouseContext& ctx);
std::string sensor_description_text(const core::HouseContext& ctx);
std::string activity_list_text(const core::HouseContext& ctx);
std::string user_schedule_text(const core::HouseContext& ctx);

/// Stage-1 context: [Background], [House Layout], [Sensor Description].
std::string build_stage1_context(const core::HouseContext& ctx);

/// Stage-2 context: [Sensor Description], [Activity List], [User Schedule].
std::string build_stage2_context(const core::HouseContext& ctx);

/// ceil(len/n) chunks; all but the last hold exactly n items, order kept.
template <typename T>
std::vector<std::vector<T>> chunk(const std::vector<T>& items, std::size_t n) {
    std::vector<std::vector<T>> chunks;
    for (std::size_t i = 0; i < items.size(); i += n) {
        const std::size_t end = std::min(i + n, items.size());
        chunks.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(i),
                            items.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return chunks;
}

std::vector<std::vector<core::EventPair>> chunk_pairs(const std::vector<core::EventPair>& pairs,
                                                      std::size_t n);

std::vector<std::string> stage1_response_keys(const core::HouseContext& ctx);
std::vector<std::string> stage2_response_keys();

std::string carry_over_text(const core::HouseContext& ctx, const CarryOver& carry);

/// Stage-2 input row: an ActionDescription reduced to its four kept fields.
struct ReducedDescription {
    core::Timestamp start;
    core::Timestamp end;
    std::string location;
    std::string description;
};

std::string render_descriptions_json(const std::vector<ReducedDescription>& descriptions);

/// Throws EmptyChunk when the chunk has no pairs.
PromptBundle build_stage1_prompt(const core::HouseContext& ctx, const TemplateSet& templates,
                                 const std::vector<core::EventPair>& chunk,
                                 const CarryOver& carry, const ChunkMeta& meta);

/// Throws EmptyChunk when the chunk has no descriptions. `last_activity` is
/// the previous chunk's final predicted activity ("none yet" initially).
PromptBundle build_stage2_prompt(const core::HouseContext& ctx, const TemplateSet& templates,
                                 const std::vector<ReducedDescription>& chunk,
                                 const std::string& last_activity, const ChunkMeta& meta);

inline constexpr const char* kNoPriorState = "no prior state";
inline constexpr const char* kNoLastActivity = "none yet";

} // namespace lahar::promptgen
