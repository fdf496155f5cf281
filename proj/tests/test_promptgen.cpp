#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lahar/config/config.hpp"
#include "lahar/core/errors.hpp"
#include "lahar/promptgen/promptgen.hpp"

#include "test_support.hpp"

using namespace lahar;
using core::EventPair;
using core::Timestamp;

namespace {

promptgen::TemplateSet load_templates() {
    const auto fixture = test::fixture_dir() / "house_fixture";
    return promptgen::TemplateSet::load(test::template_dir(), fixture / "stage1_examples.txt",
                                        fixture / "stage2_examples.txt");
}

std::vector<EventPair> some_pairs(std::size_t n) {
    std::vector<EventPair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        pairs.push_back(EventPair{Timestamp{static_cast<std::int64_t>(10 * i)},
                                  Timestamp{static_cast<std::int64_t>(10 * i + 5)}, "k1",
                                  "Kitchen", false, false});
    }
    return pairs;
}

} // namespace

TEST_CASE("stage-1 context has the three labeled sections in order") {
    const auto ctx = test::make_test_context();
    const std::string text = promptgen::build_stage1_context(ctx);
    const auto bg = text.find("[Background]");
    const auto layout = text.find("[House Layout]");
    const auto sensors = text.find("[Sensor Description]");
    REQUIRE(bg != std::string::npos);
    REQUIRE(layout != std::string::npos);
    REQUIRE(sensors != std::string::npos);
    CHECK(bg < layout);
    CHECK(layout < sensors);
    // resident count and the ambient-sensor premise
    CHECK(text.find("2 residents") != std::string::npos);
    CHECK(text.find("Ambient sensors") != std::string::npos);
    // determinism
    CHECK(promptgen::build_stage1_context(ctx) == text);
}

TEST_CASE("stage-1 context lists a minimal house's room and sensor") {
    core::HouseContext ctx;
    ctx.house_id = "M";
    ctx.residents = {"User 1"};
    ctx.rooms = {core::Room{"Studio", {}, {"x1"}}};
    ctx.sensors = {core::SensorMeta{"x1", "contact", "Studio", "", ""}};
    ctx.activity_catalog = {core::Activity{0, "Other", ""}};
    const std::string text = promptgen::build_stage1_context(ctx);
    CHECK(text.find("Studio") != std::string::npos);
    CHECK(text.find("x1") != std::string::npos);
}

TEST_CASE("stage-2 context: activity list enumeration and empty schedule") {
    auto ctx = test::make_test_context();
    ctx.schedule.clear();
    const std::string text = promptgen::build_stage2_context(ctx);
    const auto sensors = text.find("[Sensor Description]");
    const auto activities = text.find("[Activity List]");
    const auto schedule = text.find("[User Schedule]");
    CHECK(sensors < activities);
    CHECK(activities < schedule);
    CHECK(text.find("0: Other") != std::string::npos);
    CHECK(text.find("9: Sleeping") != std::string::npos);
    CHECK(text.find("no schedule constraints") != std::string::npos);
    CHECK(promptgen::build_stage2_context(ctx) == text);
}

TEST_CASE("chunking arithmetic") {
    SUBCASE("45 items with n=20 gives 20/20/5") {
        const auto chunks = promptgen::chunk_pairs(some_pairs(45), 20);
        REQUIRE(chunks.size() == 3);
        CHECK(chunks[0].size() == 20);
        CHECK(chunks[1].size() == 20);
        CHECK(chunks[2].size() == 5);
    }
    SUBCASE("empty input gives no chunks") {
        CHECK(promptgen::chunk_pairs({}, 20).empty());
    }
    SUBCASE("short input gives one chunk") {
        const auto chunks = promptgen::chunk_pairs(some_pairs(7), 20);
        REQUIRE(chunks.size() == 1);
        CHECK(chunks[0].size() == 7);
    }
}

TEST_CASE("chunking partition property: concatenation restores the input") {
    for (std::size_t len : {0u, 1u, 19u, 20u, 21u, 45u, 100u}) {
        const auto pairs = some_pairs(len);
        const auto chunks = promptgen::chunk_pairs(pairs, 20);
        std::vector<EventPair> glued;
        for (const auto& c : chunks) {
            glued.insert(glued.end(), c.begin(), c.end());
        }
        CHECK(glued == pairs);
    }
}

TEST_CASE("stage-1 prompt bundles carry-over, examples, and input in order") {
    const auto ctx = test::make_test_context();
    const auto templates = load_templates();
    promptgen::ChunkMeta meta{"T-s000", 1, 0, 0};

    const auto first = promptgen::build_stage1_prompt(ctx, templates, some_pairs(3),
                                                      promptgen::CarryOver::initial(ctx), meta);

    // expected keys: start, end, one last-state per resident, location, subject, description
    CHECK(first.expected_keys ==
          std::vector<std::string>{"start", "end", "last state of User 1",
                                   "last state of User 2", "location", "subject", "description"});

    // first chunk: every resident shows "no prior state"
    CHECK(first.user.find("User 1: no prior state") != std::string::npos);
    CHECK(first.user.find("User 2: no prior state") != std::string::npos);

    const auto examples = first.user.find("[Examples]");
    const auto carry = first.user.find("[Previous State]");
    const auto input = first.user.find("[Input]");
    CHECK(examples < carry);
    CHECK(carry < input);

    // every expected key appears verbatim in the instruction text
    for (const auto& key : first.expected_keys) {
        CHECK(first.system.find("\"" + key + "\"") != std::string::npos);
    }

    // second chunk carries the final description of each resident
    promptgen::CarryOver carry2 = promptgen::CarryOver::initial(ctx);
    carry2.last_description["User 1"] = "User 1 worked in the Kitchen from A to B.";
    const auto second =
        promptgen::build_stage1_prompt(ctx, templates, some_pairs(3), carry2, meta);
    CHECK(second.user.find("User 1: User 1 worked in the Kitchen from A to B.") !=
          std::string::npos);
    CHECK(second.user.find("User 2: no prior state") != std::string::npos);

    // purity: identical inputs give byte-identical prompts
    const auto again = promptgen::build_stage1_prompt(ctx, templates, some_pairs(3),
                                                      promptgen::CarryOver::initial(ctx), meta);
    CHECK(again.system == first.system);
    CHECK(again.user == first.user);
}

TEST_CASE("stage-1 prompt rejects an empty chunk") {
    const auto ctx = test::make_test_context();
    const auto templates = load_templates();
    CHECK_THROWS_AS(promptgen::build_stage1_prompt(ctx, templates, {},
                                                   promptgen::CarryOver::initial(ctx), {}),
                    EmptyChunk);
}

TEST_CASE("stage-2 prompt: keys, last activity, and reduced input") {
    const auto ctx = test::make_test_context();
    const auto templates = load_templates();
    std::vector<promptgen::ReducedDescription> chunk{
        {Timestamp{100}, Timestamp{200}, "Kitchen", "User 1 worked at the counter."},
    };
    const auto bundle = promptgen::build_stage2_prompt(ctx, templates, chunk, "", {});
    CHECK(bundle.expected_keys ==
          std::vector<std::string>{"start", "end", "Duration", "Last_Activity", "Reasoning",
                                   "Activity"});
    CHECK(bundle.user.find("none yet") != std::string::npos);
    for (const auto& key : bundle.expected_keys) {
        CHECK(bundle.system.find("\"" + key + "\"") != std::string::npos);
    }
    // reduced rows expose exactly the four keys
    CHECK(bundle.user.find("\"location\":\"Kitchen\"") != std::string::npos);
    CHECK(bundle.user.find("\"subject\"") == std::string::npos);

    const auto with_last =
        promptgen::build_stage2_prompt(ctx, templates, chunk, "Sleeping", {});
    CHECK(with_last.user.find("previous chunk: Sleeping") != std::string::npos);

    CHECK_THROWS_AS(promptgen::build_stage2_prompt(ctx, templates, {}, "", {}), EmptyChunk);
}

TEST_CASE("fixture config loads and points at usable templates") {
    const auto cfg = config::load_house_config(test::fixture_config());
    const auto templates = promptgen::TemplateSet::load(
        cfg.run.template_dir, cfg.run.stage1_examples, cfg.run.stage2_examples);
    CHECK(!templates.stage1_system.empty());
    CHECK(!templates.stage2_system.empty());
    CHECK(templates.stage1_examples.find("Example 2") != std::string::npos);
    CHECK(templates.stage2_examples.find("Example 3") != std::string::npos);
}
