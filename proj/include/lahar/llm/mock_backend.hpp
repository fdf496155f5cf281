#pragma once

#include <atomic>
#include <vector>

#include "lahar/llm/backend.hpp"
#include "lahar/core/types.hpp"
#include "lahar/promptgen/promptgen.hpp"

namespace lahar::llm {

/// Output corruption applied on top of the scripted responses to exercise
/// the response parser's repair path.
enum class Corruption {
    None,
    Fence,         // wrap in prose + ```json fences
    TrailingComma, // ",}" and ",]" artifacts
    LabelActivity, // stage-2 "Activity" as bare label text instead of id
    MissingKey,    // first object loses a required key (unrepairable)
};

/// Deterministic scripted rules standing in for the live model. Stage 1
/// merges same-location pairs within 60 s and assigns each group to the
/// resident whose last-known location matches, else to the lowest-numbered
/// resident not engaged in a temporally overlapping group elsewhere.
/// Stage 2 is a location/duration lookup that merges consecutive
/// same-activity descriptions.
std::string scripted_stage1(const std::vector<core::EventPair>& chunk,
                            const core::HouseContext& ctx, const promptgen::CarryOver& carry);

std::string scripted_stage2(const std::vector<promptgen::ReducedDescription>& descriptions,
                            const core::HouseContext& ctx, const std::string& last_activity);

/// Reconstructs the mock's structured inputs from a rendered prompt.
/// Tied to the default templates' section markers.
struct ParsedPrompt {
    bool is_stage2{false};
    std::vector<core::EventPair> pairs;            // stage 1
    promptgen::CarryOver carry;                    // stage 1
    std::vector<promptgen::ReducedDescription> descriptions; // stage 2
    std::string last_activity;                     // stage 2
};

ParsedPrompt parse_prompt(const std::string& user_text, const core::HouseContext& ctx);

class MockBackend : public Backend {
public:
    // An empty schedule means every response is clean. Otherwise the
    // schedule cycles by call order; keep runs single-threaded when the
    // exact corruption placement matters.
    explicit MockBackend(core::HouseContext ctx, std::vector<Corruption> schedule = {});

    std::string complete(const CompletionRequest& req) override;
    std::string name() const override { return schedule_.empty() ? "mock" : "mock-adversarial"; }

    std::size_t calls() const { return calls_.load(); }

    /// Cycle exercising every repairable corruption plus the
    /// missing-key-twice failure case.
    static std::vector<Corruption> default_adversarial_schedule();

private:
    core::HouseContext ctx_;
    std::vector<Corruption> schedule_;
    std::atomic<std::size_t> calls_{0};
};

} // namespace lahar::llm
